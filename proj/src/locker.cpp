#include "lockopt/locker.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lockopt/common.hpp"

namespace lockopt {

using minic::BinOp;
using minic::Expr;
using minic::ExprId;
using minic::ExprKind;
using minic::Function;
using minic::kInt32;
using minic::kNone;
using minic::kUint32;
using minic::kUint8;
using minic::Program;
using minic::StmtId;
using minic::Symbol;
using minic::Type;
using minic::UnOp;

CostCategory cost_category(BinOp op) {
    switch (op) {
        case BinOp::Add:
        case BinOp::Sub: return CostCategory::AddSub;
        case BinOp::Mul: return CostCategory::Mul;
        case BinOp::Div:
        case BinOp::Mod: return CostCategory::Div;
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge:
        case BinOp::Eq:
        case BinOp::Ne: return CostCategory::Compare;
        default: return CostCategory::Bitwise;
    }
}

std::vector<AllocEntry> allocate_bits(std::span<const ObfuscationPoint> points,
                                      const SolutionVector& solution) {
    validate_solution(solution, points);
    std::vector<AllocEntry> alloc;
    int offset = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        if (solution[i] == 0) continue;
        alloc.push_back({points[i].point_id, offset, points[i].key_cost});
        offset += points[i].key_cost;
    }
    return alloc;
}

namespace {

/// AST surgery helpers for one locking run. Rewrites happen in place at the
/// original node's arena slot, innermost nodes first, so nested points stay
/// valid while outer ones are transformed.
class LockBuilder {
  public:
    explicit LockBuilder(Program& p) : p_(p), key_slot_(p.functions.size(), -1) {}

    Program& p() { return p_; }

    ExprId add(Expr e) {
        p_.exprs.push_back(std::move(e));
        return static_cast<ExprId>(p_.exprs.size() - 1);
    }

    ExprId clone(ExprId id) {
        Expr copy = p_.expr(id);
        if (copy.a != kNone) copy.a = clone(copy.a);
        if (copy.b != kNone) copy.b = clone(copy.b);
        if (copy.c != kNone) copy.c = clone(copy.c);
        for (ExprId& arg : copy.args) arg = clone(arg);
        return add(std::move(copy));
    }

    ExprId int_lit(uint32_t value, bool unsigned_literal, Type type) {
        Expr e;
        e.kind = ExprKind::IntLit;
        e.value = value;
        e.unsigned_literal = unsigned_literal;
        e.type = type;
        return add(std::move(e));
    }

    ExprId binary(BinOp op, ExprId a, ExprId b, Type type) {
        Expr e;
        e.kind = ExprKind::Binary;
        e.bin = op;
        e.a = a;
        e.b = b;
        e.type = type;
        return add(std::move(e));
    }

    /// KEY[offset], type unsigned char.
    ExprId key_bit(int fn, int offset) {
        Expr e;
        e.kind = ExprKind::Index;
        e.sym = key_slot_[static_cast<size_t>(fn)];
        e.a = int_lit(static_cast<uint32_t>(offset), false, kInt32);
        e.type = kUint8;
        return add(std::move(e));
    }

    /// (unsigned)KEY[off] | (unsigned)KEY[off+1] << 1 | ... , type unsigned.
    ExprId key_word(int fn, int offset, int length) {
        ExprId acc = kNone;
        for (int j = 0; j < length; ++j) {
            Expr cast;
            cast.kind = ExprKind::Unary;
            cast.un = UnOp::Cast;
            cast.cast_type = kUint32;
            cast.a = key_bit(fn, offset + j);
            cast.type = kUint32;
            ExprId term = add(std::move(cast));
            if (j > 0) {
                term = binary(BinOp::Shl, term,
                              int_lit(static_cast<uint32_t>(j), false, kInt32), kUint32);
            }
            acc = j == 0 ? term : binary(BinOp::BitOr, acc, term, kUint32);
        }
        return acc;
    }

    void set_key_slot(int fn, int slot) { key_slot_[static_cast<size_t>(fn)] = slot; }
    int key_slot(int fn) const { return key_slot_[static_cast<size_t>(fn)]; }

  private:
    Program& p_;
    std::vector<int> key_slot_;
};

/// Adds `const unsigned char KEY[]` after the existing parameters of fns in
/// `needs_key`, shifting local symbol references, and appends KEY to every
/// call into a key-carrying function.
void wire_key_parameter(LockBuilder& b, const std::vector<bool>& needs_key) {
    Program& p = b.p();
    for (size_t fi = 0; fi < p.functions.size(); ++fi) {
        if (!needs_key[fi]) continue;
        Function& f = p.functions[fi];
        int slot = f.param_count;
        Symbol key;
        key.name = "KEY";
        key.type = kUint8;
        key.array_len = 0;
        key.is_param = true;
        key.is_const = true;
        f.symbols.insert(f.symbols.begin() + slot, std::move(key));
        ++f.param_count;
        b.set_key_slot(static_cast<int>(fi), slot);

        // Locals moved up by one slot; patch every symbol reference.
        auto fix = [&](int32_t& sym) {
            if (sym >= slot) ++sym;
        };
        std::set<StmtId> seen;
        auto fix_stmt = [&](auto&& self, StmtId id) -> void {
            if (id == kNone || !seen.insert(id).second) return;
            auto& s = p.stmt(id);
            if (s.kind == minic::StmtKind::Decl || s.kind == minic::StmtKind::Assign) fix(s.sym);
            self(self, s.s0);
            self(self, s.s1);
            self(self, s.s2);
            for (StmtId c : s.body) self(self, c);
        };
        for (StmtId s : f.body) fix_stmt(fix_stmt, s);
        minic::for_each_expr_root(p, f, [&](ExprId root) {
            minic::for_each_expr_preorder(p, root, [&](ExprId id) {
                Expr& e = p.expr(id);
                if (e.kind == ExprKind::Var || e.kind == ExprKind::Index) fix(e.sym);
            });
        });
    }
    // Pass KEY through every call into a function that now carries it.
    for (size_t fi = 0; fi < p.functions.size(); ++fi) {
        if (!needs_key[fi]) continue;
        std::vector<ExprId> calls;
        minic::for_each_expr_root(p, p.functions[fi], [&](ExprId root) {
            minic::for_each_expr_preorder(p, root, [&](ExprId id) {
                const Expr& e = p.expr(id);
                if (e.kind == ExprKind::Call && needs_key[static_cast<size_t>(e.sym)])
                    calls.push_back(id);
            });
        });
        for (ExprId call : calls) {
            Expr arg;
            arg.kind = ExprKind::Var;
            arg.sym = b.key_slot(static_cast<int>(fi));
            arg.type = kUint8;
            ExprId arg_id = b.add(std::move(arg));
            p.expr(call).args.push_back(arg_id);
        }
    }
}

void lock_constant(LockBuilder& b, ExprId slot, int fn, int offset, int length, const Key& key) {
    Program& p = b.p();
    Expr original = p.expr(slot);
    uint32_t segment = key.segment(static_cast<size_t>(offset), length);
    uint32_t stored = original.value ^ segment;
    ExprId lit = b.int_lit(stored, true, kUint32);
    ExprId restored = b.binary(BinOp::BitXor, lit, b.key_word(fn, offset, length), kUint32);
    if (original.type.is_signed) {
        Expr cast;
        cast.kind = ExprKind::Unary;
        cast.un = UnOp::Cast;
        cast.cast_type = original.type;
        cast.a = restored;
        cast.type = original.type;
        restored = b.add(std::move(cast));
    }
    p.exprs[static_cast<size_t>(slot)] = p.expr(restored);
}

void lock_operation(LockBuilder& b, ExprId slot, int fn, int offset, BinOp fake_op, const Key& key) {
    Program& p = b.p();
    ExprId real = b.add(p.expr(slot));  // keeps the original children
    ExprId lhs = p.expr(real).a;
    ExprId rhs = p.expr(real).b;
    Type type = p.expr(real).type;
    ExprId fake = b.binary(fake_op, b.clone(lhs), b.clone(rhs), type);

    uint8_t bit = key.bit(static_cast<size_t>(offset));
    Expr mux;
    mux.kind = ExprKind::Ternary;
    mux.a = b.key_bit(fn, offset);
    mux.b = bit ? real : fake;  // real result sits at the correct bit's index
    mux.c = bit ? fake : real;
    mux.type = type;
    ExprId mux_id = b.add(std::move(mux));
    p.exprs[static_cast<size_t>(slot)] = p.expr(mux_id);
}

void lock_branch(LockBuilder& b, ExprId slot, int fn, int offset, const Key& key) {
    Program& p = b.p();
    ExprId cond = b.add(p.expr(slot));  // original condition, moved aside
    uint8_t bit = key.bit(static_cast<size_t>(offset));
    ExprId stored;
    if (bit) {
        Expr neg;
        neg.kind = ExprKind::Unary;
        neg.un = UnOp::LogicalNot;
        neg.a = cond;
        neg.type = kInt32;
        stored = b.add(std::move(neg));
    } else if (minic::is_boolean_expr(p, cond)) {
        stored = cond;
    } else {
        stored = b.binary(BinOp::Ne, cond, b.int_lit(0, false, kInt32), kInt32);
    }
    ExprId locked = b.binary(BinOp::BitXor, stored, b.key_bit(fn, offset), kInt32);
    p.exprs[static_cast<size_t>(slot)] = p.expr(locked);
}

std::array<long, kCostCategoryCount> count_base_ops(const Program& p) {
    std::array<long, kCostCategoryCount> counts{};
    auto bump = [&](CostCategory c) { ++counts[static_cast<size_t>(c)]; };
    for (const Function& f : p.functions) {
        minic::for_each_expr_root(p, f, [&](ExprId root) {
            minic::for_each_expr_preorder(p, root, [&](ExprId id) {
                const Expr& e = p.expr(id);
                if (e.kind == ExprKind::Binary) {
                    bump(cost_category(e.bin));
                } else if (e.kind == ExprKind::Ternary) {
                    bump(CostCategory::Select);
                } else if (e.kind == ExprKind::Unary) {
                    if (e.un == UnOp::Neg) bump(CostCategory::AddSub);
                    if (e.un == UnOp::BitNot || e.un == UnOp::LogicalNot)
                        bump(CostCategory::Bitwise);
                }
            });
        });
    }
    return counts;
}

}  // namespace

LockedProgram apply_locking(const Program& program, std::span<const ObfuscationPoint> points,
                            const SolutionVector& solution, const Key& key) {
    validate_solution(solution, points);
    int used = key_bits(solution, points);
    if (static_cast<size_t>(used) > key.size())
        throw Error("infeasible solution: needs " + std::to_string(used) +
                    " key bits but the key has " + std::to_string(key.size()));

    LockedProgram locked;
    locked.ast = program;
    locked.correct_key = key;
    locked.used_bits = used;
    locked.alloc = allocate_bits(points, solution);
    locked.base_ops = count_base_ops(program);

    Program& p = locked.ast;
    LockBuilder builder(p);

    // Which functions must carry KEY: those with an activated point, the top,
    // and transitively every caller of a key-carrying function.
    std::vector<bool> needs_key(p.functions.size(), false);
    needs_key[static_cast<size_t>(p.top_index)] = true;
    for (size_t i = 0; i < points.size(); ++i) {
        if (solution[i] != 0) needs_key[static_cast<size_t>(points[i].function_index)] = true;
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t fi = 0; fi < p.functions.size(); ++fi) {
            if (needs_key[fi]) continue;
            minic::for_each_expr_root(p, p.functions[fi], [&](ExprId root) {
                minic::for_each_expr_preorder(p, root, [&](ExprId id) {
                    const Expr& e = p.expr(id);
                    if (e.kind == ExprKind::Call && needs_key[static_cast<size_t>(e.sym)] &&
                        !needs_key[fi]) {
                        needs_key[fi] = true;
                        changed = true;
                    }
                });
            });
        }
    }
    wire_key_parameter(builder, needs_key);

    // Node ids are stable until the final renumber; map them to arena slots.
    std::map<int32_t, ExprId> slot_of;
    for (const Function& f : p.functions) {
        minic::for_each_expr_root(p, f, [&](ExprId root) {
            minic::for_each_expr_preorder(p, root, [&](ExprId id) {
                slot_of[p.expr(id).node_id] = id;
            });
        });
    }

    std::map<int, std::pair<int, int>> span_of;  // point_id -> (offset, length)
    for (const AllocEntry& a : locked.alloc) span_of[a.point_id] = {a.offset, a.length};

    // Innermost nodes first: preorder gives parents smaller ids than children,
    // so descending node_id rewrites operands before the expressions using them.
    std::vector<const ObfuscationPoint*> active;
    for (size_t i = 0; i < points.size(); ++i) {
        if (solution[i] != 0) active.push_back(&points[i]);
    }
    std::sort(active.begin(), active.end(),
              [](const ObfuscationPoint* a, const ObfuscationPoint* b) {
                  return a->node_id > b->node_id;
              });

    for (const ObfuscationPoint* pt : active) {
        auto [offset, length] = span_of.at(pt->point_id);
        ExprId slot = slot_of.at(pt->node_id);
        int variant = solution[static_cast<size_t>(pt->point_id)];
        Activation act;
        act.point_id = pt->point_id;
        act.kind = pt->kind;
        act.variant = variant;
        act.offset = offset;
        act.length = length;
        switch (pt->kind) {
            case PointKind::Constant:
                lock_constant(builder, slot, pt->function_index, offset, length, key);
                break;
            case PointKind::Operation:
                act.fake_op = pt->fake_ops[static_cast<size_t>(variant - 1)];
                lock_operation(builder, slot, pt->function_index, offset, act.fake_op, key);
                break;
            case PointKind::Branch:
                lock_branch(builder, slot, pt->function_index, offset, key);
                break;
        }
        locked.activations.push_back(act);
    }
    std::sort(locked.activations.begin(), locked.activations.end(),
              [](const Activation& a, const Activation& b) { return a.point_id < b.point_id; });

    renumber_nodes(p);
    return locked;
}

}  // namespace lockopt
