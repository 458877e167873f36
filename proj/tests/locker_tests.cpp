#include <doctest.h>

#include "lockopt/locker.hpp"
#include "lockopt/parser.hpp"
#include "lockopt/printer.hpp"
#include "lockopt/sim.hpp"
#include "support/bench.hpp"

using namespace lockopt;
using minic::Program;

namespace {

std::vector<ObfuscationPoint> synthetic_points(std::vector<std::pair<PointKind, int>> spec) {
    std::vector<ObfuscationPoint> pts;
    for (auto [kind, cost] : spec) {
        ObfuscationPoint p;
        p.point_id = static_cast<int>(pts.size());
        p.node_id = static_cast<int>(pts.size());
        p.kind = kind;
        p.alternatives = kind == PointKind::Operation ? 2 : 1;
        p.key_cost = cost;
        pts.push_back(p);
    }
    return pts;
}

uint32_t decode_word(const std::vector<uint8_t>& bits, size_t offset, int width) {
    uint32_t v = 0;
    for (int j = 0; j < width; ++j) v |= uint32_t(bits[offset + size_t(j)]) << j;
    return v;
}

sim::InputVector scalar_inputs(std::initializer_list<uint32_t> vals) {
    sim::InputVector iv;
    for (uint32_t v : vals) iv.values.push_back({v});
    return iv;
}

}  // namespace

TEST_CASE("allocate_bits packs ranges in point order") {
    auto pts = synthetic_points({{PointKind::Constant, 32},
                                 {PointKind::Operation, 1},
                                 {PointKind::Operation, 1}});
    SolutionVector s = {1, 0, 1};
    auto alloc = allocate_bits(pts, s);
    REQUIRE(alloc.size() == 2);
    CHECK(alloc[0].point_id == 0);
    CHECK(alloc[0].offset == 0);
    CHECK(alloc[0].length == 32);
    CHECK(alloc[1].point_id == 2);
    CHECK(alloc[1].offset == 32);
    CHECK(alloc[1].length == 1);

    CHECK(allocate_bits(pts, {0, 0, 0}).empty());
}

TEST_CASE("allocation lengths sum to the key budget") {
    auto pts = synthetic_points({{PointKind::Constant, 32},
                                 {PointKind::Branch, 1},
                                 {PointKind::Operation, 1},
                                 {PointKind::Constant, 32},
                                 {PointKind::Operation, 1}});
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        SolutionVector s(pts.size());
        for (size_t i = 0; i < pts.size(); ++i)
            s[i] = static_cast<int>(rng.below(uint32_t(pts[i].alternatives + 1)));
        auto alloc = allocate_bits(pts, s);
        int total = 0;
        int last_end = 0;
        for (const auto& a : alloc) {
            CHECK(a.offset == last_end);  // packed and disjoint
            last_end = a.offset + a.length;
            total += a.length;
        }
        CHECK(total == key_bits(s, pts));
    }
}

TEST_CASE("constant locking stores the XORed literal") {
    // Constant 5 with a key segment of value 3 stores literal 6.
    Program p = minic::parse_or_throw("int top(int a) { return a + 5; }");
    auto pts = find_points(p);
    REQUIRE(pts.size() == 2);  // '+' then literal 5
    REQUIRE(pts[1].kind == PointKind::Constant);
    SolutionVector s = {0, 1};
    Key key = Key::zeros(32);
    key.set_bit(0, 1);
    key.set_bit(1, 1);  // segment value 3
    LockedProgram locked = apply_locking(p, pts, s, key);

    bool found_stored = false;
    for (const auto& e : locked.ast.exprs) {
        if (e.kind == minic::ExprKind::IntLit && e.unsigned_literal && e.value == 6)
            found_stored = true;
    }
    CHECK(found_stored);

    // XOR involution: the correct key restores 5.
    auto out = sim::run(locked.ast, scalar_inputs({10}), key);
    CHECK(decode_word(out.bits, 0, 32) == 15);
}

TEST_CASE("operation locking selects the real op at the correct bit's index") {
    Program p = minic::parse_or_throw("int top(int a, int b) { return a + b; }");
    auto pts = find_points(p);
    REQUIRE(pts.size() == 1);
    SolutionVector s = {1};  // fake op: '-'

    SUBCASE("correct bit 1") {
        Key key = Key::zeros(1);
        key.set_bit(0, 1);
        LockedProgram locked = apply_locking(p, pts, s, key);
        auto with_correct = sim::run(locked.ast, scalar_inputs({7, 3}), key);
        CHECK(decode_word(with_correct.bits, 0, 32) == 10);
        Key wrong = key;
        wrong.flip_bit(0);
        auto with_wrong = sim::run(locked.ast, scalar_inputs({7, 3}), wrong);
        CHECK(decode_word(with_wrong.bits, 0, 32) == 4);
    }
    SUBCASE("correct bit 0") {
        Key key = Key::zeros(1);
        LockedProgram locked = apply_locking(p, pts, s, key);
        auto with_correct = sim::run(locked.ast, scalar_inputs({7, 3}), key);
        CHECK(decode_word(with_correct.bits, 0, 32) == 10);
        Key wrong = key;
        wrong.flip_bit(0);
        auto with_wrong = sim::run(locked.ast, scalar_inputs({7, 3}), wrong);
        CHECK(decode_word(with_wrong.bits, 0, 32) == 4);
    }
}

TEST_CASE("branch locking restores the original truth value for both polarities") {
    Program p = minic::parse_or_throw(
        "int top(int x) { int r; if (x < 10) { r = 1; } else { r = 2; } return r; }");
    auto pts = find_points(p);
    int branch_id = -1;
    for (const auto& pt : pts) {
        if (pt.kind == PointKind::Branch) branch_id = pt.point_id;
    }
    REQUIRE(branch_id >= 0);
    SolutionVector s(pts.size(), 0);
    s[size_t(branch_id)] = 1;

    for (uint8_t bit : {uint8_t(0), uint8_t(1)}) {
        Key key = Key::zeros(1);
        key.set_bit(0, bit);
        LockedProgram locked = apply_locking(p, pts, s, key);
        if (bit) {
            CHECK(minic::emit_source(locked.ast).find("!(x < 10)") != std::string::npos);
        }
        Key wrong = key;
        wrong.flip_bit(0);
        for (uint32_t x = 0; x <= 20; ++x) {
            auto original = sim::run(p, scalar_inputs({x}));
            auto correct = sim::run(locked.ast, scalar_inputs({x}), key);
            auto flipped = sim::run(locked.ast, scalar_inputs({x}), wrong);
            CHECK(correct.bits == original.bits);
            CHECK(flipped.bits != original.bits);  // both arms differ, so a flip always shows
        }
    }
}

TEST_CASE("non-boolean branch conditions are normalized before the key XOR") {
    Program p = minic::parse_or_throw(
        "int top(int x) { int r; if (x) { r = 1; } else { r = 2; } return r; }");
    auto pts = find_points(p);
    SolutionVector s(pts.size(), 0);
    for (const auto& pt : pts) {
        if (pt.kind == PointKind::Branch) s[size_t(pt.point_id)] = 1;
    }
    Key key = Key::zeros(1);  // correct bit 0: condition kept, normalized to != 0
    LockedProgram locked = apply_locking(p, pts, s, key);
    // Truthiness must survive for values with the low bit clear (e.g. 2).
    for (uint32_t x : {0u, 1u, 2u, 4u, 255u}) {
        auto original = sim::run(p, scalar_inputs({x}));
        auto correct = sim::run(locked.ast, scalar_inputs({x}), key);
        CHECK(correct.bits == original.bits);
    }
}

TEST_CASE("correct-key fidelity across benchmarks and random solutions") {
    for (const std::string& name : testsupport::all_benchmarks()) {
        Program p = testsupport::parse_bench(name);
        auto pts = find_points(p);
        int full = summarize_points(pts).full_bits;
        Rng rng(0xF1DE11 + full);
        auto tests = sim::random_inputs(p, 5, 2024);
        for (int trial = 0; trial < 10; ++trial) {
            Key key = Key::random(size_t(full), rng);
            SolutionVector s(pts.size());
            for (size_t i = 0; i < pts.size(); ++i)
                s[i] = static_cast<int>(rng.below(uint32_t(pts[i].alternatives + 1)));
            LockedProgram locked = apply_locking(p, pts, s, key);
            for (const auto& iv : tests) {
                auto original = sim::run(p, iv);
                auto relocked = sim::run(locked.ast, iv, key);
                CHECK(relocked.bits == original.bits);
                CHECK(relocked.status == original.status);
            }
        }
    }
}

TEST_CASE("single-bit sensitivity of each transform in isolation") {
    struct Case {
        const char* src;
        size_t lock_point;
    };
    // 8-bit operand domains keep the brute force exact.
    const Case cases[] = {
        {"int top(unsigned char a) { return a + 12; }", 1},  // constant (point 1)
        {"int top(unsigned char a, unsigned char b) { return a + b; }", 0},  // operation
        {"int top(unsigned char a) { int r; if (a < 10) { r = 1; } else { r = 2; } return r; }",
         0},  // branch: the condition root is the first point in preorder
    };
    for (const Case& c : cases) {
        Program p = minic::parse_or_throw(c.src);
        auto pts = find_points(p);
        REQUIRE(c.lock_point < pts.size());
        SolutionVector s(pts.size(), 0);
        s[c.lock_point] = 1;
        Rng rng(5);
        Key key = Key::random(size_t(summarize_points(pts).full_bits), rng);
        LockedProgram locked = apply_locking(p, pts, s, key);
        REQUIRE(locked.alloc.size() == 1);
        int offset = locked.alloc[0].offset;
        int length = locked.alloc[0].length;
        size_t arity = size_t(p.top().param_count);
        for (int bit = offset; bit < offset + length; ++bit) {
            Key flipped = key;
            flipped.flip_bit(size_t(bit));
            bool differs = false;
            for (uint32_t a = 0; a < 256 && !differs; ++a) {
                sim::InputVector iv;
                iv.values.push_back({a});
                if (arity == 2) iv.values.push_back({(a * 37 + 11) & 0xFF});
                auto lhs = sim::run(locked.ast, iv, key);
                auto rhs = sim::run(locked.ast, iv, flipped);
                differs = lhs.bits != rhs.bits;
            }
            CHECK_MESSAGE(differs, "bit ", bit, " had no effect for: ", c.src);
        }
    }
}

TEST_CASE("transforms on disjoint points act independently") {
    Program p = minic::parse_or_throw(
        "int top(int a, int b, int out[2]) { out[0] = a + b; out[1] = a ^ b; return 0; }");
    auto pts = find_points(p);
    // points: '+', '^', return literal 0
    REQUIRE(pts.size() == 3);
    Key both_key = Key::zeros(2);
    both_key.set_bit(0, 1);

    LockedProgram both = apply_locking(p, pts, {1, 1, 0}, both_key);
    Key plus_key = Key::zeros(1);
    plus_key.set_bit(0, 1);
    LockedProgram plus_only = apply_locking(p, pts, {1, 0, 0}, plus_key);
    Key xor_key = Key::zeros(1);
    LockedProgram xor_only = apply_locking(p, pts, {0, 1, 0}, xor_key);

    // Under every 2-bit key, each output word of the combined lock matches the
    // corresponding single lock driven by its own bit.
    for (uint32_t w = 0; w < 4; ++w) {
        Key k2 = Key::zeros(2);
        k2.set_bit(0, w & 1);
        k2.set_bit(1, (w >> 1) & 1);
        Key kp = Key::zeros(1);
        kp.set_bit(0, w & 1);
        Key kx = Key::zeros(1);
        kx.set_bit(0, (w >> 1) & 1);
        for (uint32_t a : {0u, 5u, 200u}) {
            for (uint32_t b : {0u, 3u, 91u}) {
                auto combined = sim::run(both.ast, scalar_inputs({a, b}), k2);
                auto lhs = sim::run(plus_only.ast, scalar_inputs({a, b}), kp);
                auto rhs = sim::run(xor_only.ast, scalar_inputs({a, b}), kx);
                CHECK(decode_word(combined.bits, 0, 32) == decode_word(lhs.bits, 0, 32));
                CHECK(decode_word(combined.bits, 32, 32) == decode_word(rhs.bits, 32, 32));
            }
        }
    }
}

TEST_CASE("nested points lock both mux arms") {
    // The '+' inside '*' must stay locked in the fake arm too: under a wrong
    // outer bit with a correct inner bit, the inner op must still be real.
    Program p = minic::parse_or_throw("int top(int a, int b, int c) { return (a + b) * c; }");
    auto pts = find_points(p);
    REQUIRE(pts.size() == 2);  // '*' (root), '+' (operand)
    Key key = Key::zeros(2);
    LockedProgram locked = apply_locking(p, pts, {1, 1}, key);  // fakes: '+', '-'

    // Wrong key flipping only the '*' bit: expect fake(a + b) + c, with the
    // inner addition still real.
    Key wrong = key;
    wrong.flip_bit(0);  // point 0 is '*', allocated first
    auto out = sim::run(locked.ast, scalar_inputs({7, 3, 5}), wrong);
    CHECK(decode_word(out.bits, 0, 32) == (7 + 3) + 5);
}

TEST_CASE("locking errors") {
    Program p = minic::parse_or_throw("int top(int a) { return a + 5; }");
    auto pts = find_points(p);
    CHECK_THROWS_AS(apply_locking(p, pts, {1, 1}, Key::zeros(8)), Error);   // needs 33 bits
    CHECK_THROWS_AS(apply_locking(p, pts, {3, 0}, Key::zeros(64)), Error);  // variant range
    CHECK_THROWS_AS(apply_locking(p, pts, {1}, Key::zeros(64)), Error);     // length mismatch
}

TEST_CASE("helper functions receive the key through call plumbing") {
    Program p = minic::parse_or_throw(
        "int scale(int x) { return x * 3; }\n"
        "int top(int a) { return scale(a) + scale(a + 1); }");
    auto pts = find_points(p);
    // Lock the constant 3 inside the helper.
    SolutionVector s(pts.size(), 0);
    for (const auto& pt : pts) {
        if (pt.kind == PointKind::Constant && pt.function_index == 0) s[size_t(pt.point_id)] = 1;
    }
    Rng rng(3);
    Key key = Key::random(32, rng);
    LockedProgram locked = apply_locking(p, pts, s, key);
    std::string emitted = minic::emit_source(locked.ast);
    CHECK(emitted.find("scale(a, KEY)") != std::string::npos);
    auto original = sim::run(p, scalar_inputs({9}));
    auto relocked = sim::run(locked.ast, scalar_inputs({9}), key);
    CHECK(relocked.bits == original.bits);
    // Locked source with key plumbing re-parses and still runs correctly.
    minic::Program reparsed = minic::parse_or_throw(emitted);
    auto rerun = sim::run(reparsed, scalar_inputs({9}), key);
    CHECK(rerun.bits == original.bits);
}
