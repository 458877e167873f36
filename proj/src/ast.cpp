#include "lockopt/ast.hpp"

namespace lockopt::minic {

const char* spelling(Type t) {
    if (t.is_signed) {
        switch (t.width) {
            case 8: return "char";
            case 16: return "short";
            default: return "int";
        }
    }
    switch (t.width) {
        case 8: return "unsigned char";
        case 16: return "unsigned short";
        default: return "unsigned";
    }
}

const char* spelling(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::BitAnd: return "&";
        case BinOp::BitOr: return "|";
        case BinOp::BitXor: return "^";
        case BinOp::Shl: return "<<";
        case BinOp::Shr: return ">>";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::LogicalAnd: return "&&";
        case BinOp::LogicalOr: return "||";
    }
    return "?";
}

int precedence(BinOp op) {
    switch (op) {
        case BinOp::Mul:
        case BinOp::Div:
        case BinOp::Mod: return 10;
        case BinOp::Add:
        case BinOp::Sub: return 9;
        case BinOp::Shl:
        case BinOp::Shr: return 8;
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge: return 7;
        case BinOp::Eq:
        case BinOp::Ne: return 6;
        case BinOp::BitAnd: return 5;
        case BinOp::BitXor: return 4;
        case BinOp::BitOr: return 3;
        case BinOp::LogicalAnd: return 2;
        case BinOp::LogicalOr: return 1;
    }
    return 0;
}

int Program::output_bit_count() const {
    const Function& f = top();
    int n = 0;
    for (int i = 0; i < f.param_count; ++i) {
        const Symbol& s = f.symbols[static_cast<size_t>(i)];
        if (s.is_out_param()) n += s.array_len * s.type.width;
    }
    return n + f.return_type.width;
}

bool Program::is_locked() const {
    const Function& f = top();
    for (int i = 0; i < f.param_count; ++i) {
        if (f.symbols[static_cast<size_t>(i)].name == "KEY") return true;
    }
    return false;
}

namespace {

struct Renumberer {
    Program& p;
    int32_t next = 0;

    void expr(ExprId id) {
        if (id == kNone) return;
        Expr& e = p.expr(id);
        e.node_id = next++;
        expr(e.a);
        expr(e.b);
        expr(e.c);
        for (ExprId arg : e.args) expr(arg);
    }

    void stmt(StmtId id) {
        if (id == kNone) return;
        Stmt& s = p.stmt(id);
        s.node_id = next++;
        switch (s.kind) {
            case StmtKind::Decl:
            case StmtKind::ExprStmt:
            case StmtKind::Return:
                expr(s.expr);
                break;
            case StmtKind::Assign:
                expr(s.index);
                expr(s.expr);
                break;
            case StmtKind::If:
                expr(s.expr);
                stmt(s.s0);
                stmt(s.s1);
                break;
            case StmtKind::While:
                expr(s.expr);
                stmt(s.s0);
                break;
            case StmtKind::For:
                stmt(s.s0);
                expr(s.expr);
                stmt(s.s1);
                stmt(s.s2);
                break;
            case StmtKind::Block:
                for (StmtId b : s.body) stmt(b);
                break;
            case StmtKind::Empty:
                break;
        }
    }
};

}  // namespace

void renumber_nodes(Program& program) {
    Renumberer r{program};
    for (Function& f : program.functions) {
        for (StmtId s : f.body) r.stmt(s);
    }
}

bool is_boolean_expr(const Program& p, ExprId id) {
    const Expr& e = p.expr(id);
    if (e.kind == ExprKind::Binary) return is_comparison(e.bin) || is_logical(e.bin);
    if (e.kind == ExprKind::Unary) return e.un == UnOp::LogicalNot;
    return false;
}

}  // namespace lockopt::minic
