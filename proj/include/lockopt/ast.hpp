#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lockopt::minic {

/// Fixed-width integer type. MiniC has exactly six: signed/unsigned 8/16/32.
struct Type {
    uint8_t width = 32;  // 8, 16, or 32
    bool is_signed = true;

    bool operator==(const Type&) const = default;
};

inline constexpr Type kInt32{32, true};
inline constexpr Type kUint32{32, false};
inline constexpr Type kUint8{8, false};

const char* spelling(Type t);

/// Integer promotion: operands narrower than 32 bits promote to int.
inline Type promoted(Type t) { return t.width < 32 ? kInt32 : t; }

/// Usual arithmetic conversions after promotion: unsigned wins.
inline Type common_type(Type a, Type b) {
    Type pa = promoted(a), pb = promoted(b);
    return (!pa.is_signed || !pb.is_signed) ? kUint32 : kInt32;
}

/// Masks a 32-bit pattern down to the storage width of `t`.
inline uint32_t truncate_to(uint32_t pattern, Type t) {
    return t.width >= 32 ? pattern : pattern & ((1u << t.width) - 1u);
}

/// Sign- or zero-extends a stored pattern of type `t` to a 32-bit pattern.
inline uint32_t extend_from(uint32_t stored, Type t) {
    if (t.width >= 32) return stored;
    uint32_t mask = (1u << t.width) - 1u;
    stored &= mask;
    if (t.is_signed && (stored >> (t.width - 1))) stored |= ~mask;
    return stored;
}

enum class BinOp : uint8_t {
    Add, Sub, Mul, Div, Mod,
    BitAnd, BitOr, BitXor, Shl, Shr,
    Lt, Le, Gt, Ge, Eq, Ne,
    LogicalAnd, LogicalOr,
};

enum class UnOp : uint8_t { Neg, Plus, LogicalNot, BitNot, Cast };

const char* spelling(BinOp op);
int precedence(BinOp op);

inline bool is_comparison(BinOp op) {
    return op >= BinOp::Lt && op <= BinOp::Ne;
}
inline bool is_logical(BinOp op) {
    return op == BinOp::LogicalAnd || op == BinOp::LogicalOr;
}

using ExprId = int32_t;
using StmtId = int32_t;
inline constexpr int32_t kNone = -1;

enum class ExprKind : uint8_t { IntLit, Var, Unary, Binary, Ternary, Call, Index };

/// One expression node. Children are ids into Program::exprs.
/// Child slots by kind: Unary {a}; Binary {a, b}; Ternary {a: cond, b: then,
/// c: else}; Index {a: subscript, base in sym}; Call {args, callee in sym}.
struct Expr {
    ExprKind kind{};
    Type type{};          // filled in by the checker
    int32_t node_id = kNone;
    int32_t line = 0, col = 0;

    uint32_t value = 0;             // IntLit: 32-bit pattern
    bool unsigned_literal = false;  // IntLit: had a 'u' suffix
    UnOp un{};                      // Unary
    Type cast_type{};               // Unary with un == Cast
    BinOp bin{};                    // Binary
    int32_t sym = kNone;            // Var/Index: symbol slot; Call: function index
    ExprId a = kNone, b = kNone, c = kNone;
    std::vector<ExprId> args;       // Call
};

enum class StmtKind : uint8_t { Decl, Assign, ExprStmt, If, While, For, Return, Block, Empty };

/// One statement node. Slots by kind:
///   Decl    {sym, expr: init or kNone}
///   Assign  {sym, index: subscript or kNone, expr: value}
///   ExprStmt/Return {expr}
///   If      {expr: cond, s0: then, s1: else or kNone}
///   While   {expr: cond, s0: body}
///   For     {s0: init or kNone, expr: cond or kNone, s1: step or kNone, s2: body}
///   Block   {body}
struct Stmt {
    StmtKind kind{};
    int32_t node_id = kNone;
    int32_t line = 0, col = 0;

    int32_t sym = kNone;
    ExprId index = kNone;
    ExprId expr = kNone;
    StmtId s0 = kNone, s1 = kNone, s2 = kNone;
    std::vector<StmtId> body;
};

/// A declared name. Parameter direction is structural: scalars and const
/// arrays are inputs, non-const arrays are outputs.
struct Symbol {
    std::string name;
    Type type{};
    int32_t array_len = -1;  // -1 scalar, 0 unsized array param, >0 fixed size
    bool is_param = false;
    bool is_const = false;
    int32_t line = 0, col = 0;

    bool is_array() const { return array_len >= 0; }
    bool is_in_param() const { return is_param && (!is_array() || is_const); }
    bool is_out_param() const { return is_param && is_array() && !is_const; }
};

struct Function {
    std::string name;
    Type return_type{};
    std::vector<Symbol> symbols;  // parameters first, then locals
    int32_t param_count = 0;
    std::vector<StmtId> body;
    int32_t line = 0, col = 0;
};

/// A parsed translation unit: functions plus shared node arenas. Node ids are
/// preorder indices over (functions in order, statements, then sub-expressions),
/// so identical source always yields identical ids.
struct Program {
    std::vector<Function> functions;
    int32_t top_index = kNone;
    std::vector<Expr> exprs;
    std::vector<Stmt> stmts;

    Expr& expr(ExprId id) { return exprs[static_cast<size_t>(id)]; }
    const Expr& expr(ExprId id) const { return exprs[static_cast<size_t>(id)]; }
    Stmt& stmt(StmtId id) { return stmts[static_cast<size_t>(id)]; }
    const Stmt& stmt(StmtId id) const { return stmts[static_cast<size_t>(id)]; }

    const Function& top() const { return functions[static_cast<size_t>(top_index)]; }

    /// N: total output bits = out-array bits (declaration order, elementwise)
    /// plus the return-value width of the top function.
    int output_bit_count() const;

    /// True if the top function carries the KEY parameter added by locking.
    bool is_locked() const;
};

/// Reassigns node ids as preorder indices. Called after parsing and after
/// any AST rewrite.
void renumber_nodes(Program& program);

/// Walks all expressions of a function body in preorder.
template <typename F>
void for_each_expr_preorder(const Program& p, ExprId root, F&& fn);

/// True for expressions that always evaluate to 0 or 1.
bool is_boolean_expr(const Program& p, ExprId id);

namespace detail {
template <typename F>
void walk_expr(const Program& p, ExprId id, F& fn) {
    if (id == kNone) return;
    fn(id);
    const Expr& e = p.expr(id);
    walk_expr(p, e.a, fn);
    walk_expr(p, e.b, fn);
    walk_expr(p, e.c, fn);
    for (ExprId arg : e.args) walk_expr(p, arg, fn);
}

template <typename F>
void walk_stmt_roots(const Program& p, StmtId id, F& fn) {
    if (id == kNone) return;
    const Stmt& s = p.stmt(id);
    if (s.kind == StmtKind::Assign && s.index != kNone) fn(s.index);
    if (s.expr != kNone) fn(s.expr);
    walk_stmt_roots(p, s.s0, fn);
    walk_stmt_roots(p, s.s1, fn);
    walk_stmt_roots(p, s.s2, fn);
    for (StmtId b : s.body) walk_stmt_roots(p, b, fn);
}
}  // namespace detail

template <typename F>
void for_each_expr_preorder(const Program& p, ExprId root, F&& fn) {
    detail::walk_expr(p, root, fn);
}

/// Calls fn(ExprId) for every expression root of the function body
/// (conditions, assignment subscripts and values, initializers, returns).
template <typename F>
void for_each_expr_root(const Program& p, const Function& f, F&& fn) {
    for (StmtId s : f.body) detail::walk_stmt_roots(p, s, fn);
}

}  // namespace lockopt::minic
