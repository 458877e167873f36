#include "lockopt/sim.hpp"

#include <algorithm>
#include <map>

#include "lockopt/common.hpp"

namespace lockopt::sim {

using minic::BinOp;
using minic::Expr;
using minic::ExprId;
using minic::ExprKind;
using minic::Function;
using minic::kNone;
using minic::Program;
using minic::Stmt;
using minic::StmtId;
using minic::StmtKind;
using minic::Symbol;
using minic::Type;
using minic::UnOp;

const char* spelling(RunStatus s) {
    switch (s) {
        case RunStatus::Normal: return "normal";
        case RunStatus::StepBudgetExceeded: return "step_budget_exceeded";
        case RunStatus::DivByZero: return "div_by_zero";
    }
    return "?";
}

namespace {

struct BudgetExceeded {};

std::vector<const Symbol*> in_params(const Function& f) {
    std::vector<const Symbol*> out;
    for (int i = 0; i < f.param_count; ++i) {
        const Symbol& s = f.symbols[static_cast<size_t>(i)];
        if (s.is_in_param() && s.name != "KEY") out.push_back(&s);
    }
    return out;
}

/// Tree-walking evaluator with wrap-around fixed-width semantics. Values are
/// 32-bit patterns extended from their storage type; every visited node costs
/// one step against the budget.
class Machine {
  public:
    Machine(const Program& p, long budget, const Key* key)
        : p_(p), budget_(budget), key_(key) {}

    bool div_by_zero() const { return div_by_zero_; }

    uint32_t run_top(const InputVector& input) {
        const Function& top = p_.top();
        Frame frame = make_frame(top);
        size_t next_group = 0;
        for (int i = 0; i < top.param_count; ++i) {
            const Symbol& s = top.symbols[static_cast<size_t>(i)];
            if (s.name == "KEY") {
                auto& storage = frame.arrays[static_cast<size_t>(i)];
                storage.assign(key_->bits().begin(), key_->bits().end());
                continue;
            }
            if (!s.is_in_param()) continue;
            if (next_group >= input.values.size())
                throw Error("input vector has too few values for the top signature");
            const auto& group = input.values[next_group++];
            if (s.is_array()) {
                if (static_cast<int>(group.size()) != s.array_len)
                    throw Error("input for array '" + s.name + "' has wrong length");
                auto& storage = frame.arrays[static_cast<size_t>(i)];
                for (size_t j = 0; j < group.size(); ++j)
                    storage[j] = minic::truncate_to(group[j], s.type);
            } else {
                if (group.size() != 1)
                    throw Error("input for scalar '" + s.name + "' must hold one value");
                frame.scalars[static_cast<size_t>(i)] = minic::truncate_to(group[0], s.type);
            }
        }
        if (next_group != input.values.size())
            throw Error("input vector has too many values for the top signature");
        return call(p_.top_index, frame);
    }

    void collect_outputs(std::vector<uint8_t>& bits, uint32_t return_value) {
        const Function& top = p_.top();
        for (int i = 0; i < top.param_count; ++i) {
            const Symbol& s = top.symbols[static_cast<size_t>(i)];
            if (!s.is_out_param()) continue;
            const auto& storage = top_out_storage_.at(static_cast<size_t>(i));
            for (uint32_t word : storage) {
                for (int j = 0; j < s.type.width; ++j)
                    bits.push_back(static_cast<uint8_t>((word >> j) & 1u));
            }
        }
        uint32_t ret = minic::truncate_to(return_value, top.return_type);
        for (int j = 0; j < top.return_type.width; ++j)
            bits.push_back(static_cast<uint8_t>((ret >> j) & 1u));
    }

  private:
    struct Frame {
        std::vector<uint32_t> scalars;
        std::vector<std::vector<uint32_t>> arrays;
        uint32_t return_value = 0;
        bool returned = false;
    };

    const Program& p_;
    long budget_;
    long steps_ = 0;
    bool div_by_zero_ = false;
    const Key* key_;
    std::map<size_t, std::vector<uint32_t>> top_out_storage_;

    void step() {
        if (++steps_ > budget_) throw BudgetExceeded{};
    }

    Frame make_frame(const Function& f) {
        Frame frame;
        frame.scalars.assign(f.symbols.size(), 0);
        frame.arrays.resize(f.symbols.size());
        for (size_t i = 0; i < f.symbols.size(); ++i) {
            const Symbol& s = f.symbols[i];
            if (s.is_array() && s.array_len > 0)
                frame.arrays[i].assign(static_cast<size_t>(s.array_len), 0);
        }
        return frame;
    }

    uint32_t call(int fn_index, Frame& frame) {
        const Function& f = p_.functions[static_cast<size_t>(fn_index)];
        for (StmtId s : f.body) {
            exec(f, frame, s);
            if (frame.returned) break;
        }
        if (fn_index == p_.top_index) {
            for (int i = 0; i < f.param_count; ++i) {
                if (f.symbols[static_cast<size_t>(i)].is_out_param())
                    top_out_storage_[static_cast<size_t>(i)] =
                        std::move(frame.arrays[static_cast<size_t>(i)]);
            }
        }
        return minic::extend_from(minic::truncate_to(frame.return_value, f.return_type),
                                  f.return_type);
    }

    void exec(const Function& f, Frame& frame, StmtId id) {
        step();
        const Stmt& s = p_.stmt(id);
        switch (s.kind) {
            case StmtKind::Decl:
                if (s.expr != kNone) {
                    uint32_t v = eval(f, frame, s.expr);
                    frame.scalars[static_cast<size_t>(s.sym)] =
                        minic::truncate_to(v, f.symbols[static_cast<size_t>(s.sym)].type);
                }
                break;
            case StmtKind::Assign: {
                const Symbol& target = f.symbols[static_cast<size_t>(s.sym)];
                uint32_t v = minic::truncate_to(eval(f, frame, s.expr), target.type);
                if (s.index != kNone) {
                    uint32_t idx = eval(f, frame, s.index);
                    auto& storage = frame.arrays[static_cast<size_t>(s.sym)];
                    storage[idx % storage.size()] = v;
                } else {
                    frame.scalars[static_cast<size_t>(s.sym)] = v;
                }
                break;
            }
            case StmtKind::ExprStmt:
                eval(f, frame, s.expr);
                break;
            case StmtKind::Return:
                frame.return_value = eval(f, frame, s.expr);
                frame.returned = true;
                break;
            case StmtKind::If:
                if (eval(f, frame, s.expr) != 0) {
                    exec(f, frame, s.s0);
                } else if (s.s1 != kNone) {
                    exec(f, frame, s.s1);
                }
                break;
            case StmtKind::While:
                while (!frame.returned && eval(f, frame, s.expr) != 0) {
                    exec(f, frame, s.s0);
                    step();  // loop back-edge
                }
                break;
            case StmtKind::For:
                if (s.s0 != kNone) exec(f, frame, s.s0);
                for (;;) {
                    if (frame.returned) break;
                    if (s.expr != kNone && eval(f, frame, s.expr) == 0) break;
                    exec(f, frame, s.s2);
                    if (frame.returned) break;
                    if (s.s1 != kNone) exec(f, frame, s.s1);
                    step();  // loop back-edge
                }
                break;
            case StmtKind::Block:
                for (StmtId b : s.body) {
                    exec(f, frame, b);
                    if (frame.returned) break;
                }
                break;
            case StmtKind::Empty:
                break;
        }
    }

    uint32_t eval(const Function& f, Frame& frame, ExprId id) {
        step();
        const Expr& e = p_.expr(id);
        switch (e.kind) {
            case ExprKind::IntLit:
                return e.value;
            case ExprKind::Var: {
                const Symbol& s = f.symbols[static_cast<size_t>(e.sym)];
                return minic::extend_from(frame.scalars[static_cast<size_t>(e.sym)], s.type);
            }
            case ExprKind::Index: {
                const Symbol& s = f.symbols[static_cast<size_t>(e.sym)];
                uint32_t idx = eval(f, frame, e.a);
                const auto& storage = frame.arrays[static_cast<size_t>(e.sym)];
                return minic::extend_from(storage[idx % storage.size()], s.type);
            }
            case ExprKind::Unary: {
                if (e.un == UnOp::Cast) {
                    uint32_t v = eval(f, frame, e.a);
                    return minic::extend_from(minic::truncate_to(v, e.cast_type), e.cast_type);
                }
                uint32_t v = eval(f, frame, e.a);
                switch (e.un) {
                    case UnOp::Neg: return 0u - v;
                    case UnOp::Plus: return v;
                    case UnOp::BitNot: return ~v;
                    case UnOp::LogicalNot: return v == 0 ? 1u : 0u;
                    default: return v;
                }
            }
            case ExprKind::Binary:
                return eval_binary(f, frame, e);
            case ExprKind::Ternary: {
                uint32_t cond = eval(f, frame, e.a);
                return eval(f, frame, cond != 0 ? e.b : e.c);
            }
            case ExprKind::Call: {
                const Function& callee = p_.functions[static_cast<size_t>(e.sym)];
                Frame inner = make_frame(callee);
                for (size_t i = 0; i < e.args.size(); ++i) {
                    const Symbol& param = callee.symbols[i];
                    const Expr& arg = p_.expr(e.args[i]);
                    if (param.is_array()) {
                        // Const array argument, passed by copy (read-only).
                        step();
                        inner.arrays[i] = frame.arrays[static_cast<size_t>(arg.sym)];
                    } else {
                        uint32_t v = eval(f, frame, e.args[i]);
                        inner.scalars[i] = minic::truncate_to(v, param.type);
                    }
                }
                return call(e.sym, inner);
            }
        }
        return 0;
    }

    uint32_t eval_binary(const Function& f, Frame& frame, const Expr& e) {
        // Short-circuit forms first.
        if (e.bin == BinOp::LogicalAnd) {
            if (eval(f, frame, e.a) == 0) return 0;
            return eval(f, frame, e.b) != 0 ? 1u : 0u;
        }
        if (e.bin == BinOp::LogicalOr) {
            if (eval(f, frame, e.a) != 0) return 1;
            return eval(f, frame, e.b) != 0 ? 1u : 0u;
        }
        uint32_t a = eval(f, frame, e.a);
        uint32_t b = eval(f, frame, e.b);
        bool sgn = minic::common_type(p_.expr(e.a).type, p_.expr(e.b).type).is_signed;
        switch (e.bin) {
            case BinOp::Add: return a + b;
            case BinOp::Sub: return a - b;
            case BinOp::Mul: return a * b;
            case BinOp::Div: {
                if (b == 0) {
                    div_by_zero_ = true;
                    return 0;
                }
                if (sgn) {
                    int32_t sa = static_cast<int32_t>(a), sb = static_cast<int32_t>(b);
                    if (sa == INT32_MIN && sb == -1) return a;  // wraps to itself
                    return static_cast<uint32_t>(sa / sb);
                }
                return a / b;
            }
            case BinOp::Mod: {
                if (b == 0) {
                    div_by_zero_ = true;
                    return 0;
                }
                if (sgn) {
                    int32_t sa = static_cast<int32_t>(a), sb = static_cast<int32_t>(b);
                    if (sa == INT32_MIN && sb == -1) return 0;
                    return static_cast<uint32_t>(sa % sb);
                }
                return a % b;
            }
            case BinOp::BitAnd: return a & b;
            case BinOp::BitOr: return a | b;
            case BinOp::BitXor: return a ^ b;
            case BinOp::Shl: return a << (b & 31u);
            case BinOp::Shr:
                if (p_.expr(e.a).type.is_signed || p_.expr(e.a).type.width < 32)
                    return static_cast<uint32_t>(static_cast<int32_t>(a) >> (b & 31u));
                return a >> (b & 31u);
            case BinOp::Lt:
                return sgn ? (static_cast<int32_t>(a) < static_cast<int32_t>(b)) : (a < b);
            case BinOp::Le:
                return sgn ? (static_cast<int32_t>(a) <= static_cast<int32_t>(b)) : (a <= b);
            case BinOp::Gt:
                return sgn ? (static_cast<int32_t>(a) > static_cast<int32_t>(b)) : (a > b);
            case BinOp::Ge:
                return sgn ? (static_cast<int32_t>(a) >= static_cast<int32_t>(b)) : (a >= b);
            case BinOp::Eq: return a == b;
            case BinOp::Ne: return a != b;
            default: return 0;
        }
    }
};

}  // namespace

OutputBits run(const minic::Program& program, const InputVector& input,
               const std::optional<Key>& key, long step_budget) {
    bool locked = program.is_locked();
    if (locked && !key.has_value()) throw Error("locked program requires a key");
    if (!locked && key.has_value()) throw Error("unlocked program takes no key");

    OutputBits out;
    out.bits.reserve(static_cast<size_t>(program.output_bit_count()));
    Machine machine(program, step_budget, key ? &*key : nullptr);
    try {
        uint32_t ret = machine.run_top(input);
        machine.collect_outputs(out.bits, ret);
        out.status = machine.div_by_zero() ? RunStatus::DivByZero : RunStatus::Normal;
    } catch (const BudgetExceeded&) {
        out.bits.assign(static_cast<size_t>(program.output_bit_count()), 0);
        out.status = RunStatus::StepBudgetExceeded;
    }
    return out;
}

std::vector<OutputBits> golden(const minic::Program& program,
                               const std::vector<InputVector>& tests, long step_budget) {
    std::vector<OutputBits> out;
    out.reserve(tests.size());
    for (size_t i = 0; i < tests.size(); ++i) {
        OutputBits bits = run(program, tests[i], std::nullopt, step_budget);
        if (bits.status != RunStatus::Normal)
            throw Error("golden run rejected: test " + std::to_string(i) + " finished with status " +
                        spelling(bits.status));
        out.push_back(std::move(bits));
    }
    return out;
}

std::vector<InputVector> random_inputs(const minic::Program& program, int count, uint64_t seed) {
    Rng rng(seed);
    const Function& top = program.top();
    auto params = in_params(top);
    std::vector<InputVector> tests;
    tests.reserve(static_cast<size_t>(count));
    for (int t = 0; t < count; ++t) {
        InputVector iv;
        for (const Symbol* s : params) {
            size_t n = s->is_array() ? static_cast<size_t>(s->array_len) : 1;
            std::vector<uint32_t> group(n);
            for (auto& v : group)
                v = minic::truncate_to(static_cast<uint32_t>(rng.next()), s->type);
            iv.values.push_back(std::move(group));
        }
        tests.push_back(std::move(iv));
    }
    return tests;
}

InputVector bind_inputs(const minic::Program& program,
                        const std::vector<std::pair<std::string, std::vector<int64_t>>>& named) {
    const Function& top = program.top();
    auto params = in_params(top);
    if (named.size() != params.size())
        throw Error("test vector names " + std::to_string(named.size()) +
                    " do not match the " + std::to_string(params.size()) + " input parameter(s)");
    InputVector iv;
    for (const Symbol* s : params) {
        const std::vector<int64_t>* found = nullptr;
        for (const auto& [name, vals] : named) {
            if (name == s->name) found = &vals;
        }
        if (!found) throw Error("test vector is missing input '" + s->name + "'");
        size_t expect = s->is_array() ? static_cast<size_t>(s->array_len) : 1;
        if (found->size() != expect)
            throw Error("input '" + s->name + "' expects " + std::to_string(expect) +
                        " value(s), got " + std::to_string(found->size()));
        int64_t lo = s->type.is_signed ? -(int64_t(1) << (s->type.width - 1)) : 0;
        int64_t hi = s->type.is_signed ? (int64_t(1) << (s->type.width - 1)) - 1
                                       : (int64_t(1) << s->type.width) - 1;
        std::vector<uint32_t> group;
        for (int64_t v : *found) {
            if (v < lo || v > hi)
                throw Error("value " + std::to_string(v) + " out of range for input '" + s->name +
                            "' (" + spelling(s->type) + ")");
            group.push_back(minic::truncate_to(static_cast<uint32_t>(v), s->type));
        }
        iv.values.push_back(std::move(group));
    }
    return iv;
}

}  // namespace lockopt::sim
