#include "lockopt/printer.hpp"

#include <string>

namespace lockopt::minic {

namespace {

// Precedence levels used for minimal parenthesization. Binary operators use
// precedence() (1..10); ternary sits below them, unary and postfix above.
constexpr int kTernaryPrec = 0;
constexpr int kUnaryPrec = 11;

class Printer {
  public:
    explicit Printer(const Program& p) : p_(p) {}

    std::string run() {
        for (size_t i = 0; i < p_.functions.size(); ++i) {
            if (i) out_ += '\n';
            function(p_.functions[i]);
        }
        return std::move(out_);
    }

  private:
    const Program& p_;
    const Function* fn_ = nullptr;
    std::string out_;
    int indent_ = 0;

    void line_start() { out_.append(static_cast<size_t>(indent_) * 4, ' '); }

    void function(const Function& f) {
        fn_ = &f;
        out_ += spelling(f.return_type);
        out_ += ' ';
        out_ += f.name;
        out_ += '(';
        for (int i = 0; i < f.param_count; ++i) {
            if (i) out_ += ", ";
            const Symbol& s = f.symbols[static_cast<size_t>(i)];
            if (s.is_const) out_ += "const ";
            out_ += spelling(s.type);
            out_ += ' ';
            out_ += s.name;
            if (s.is_array()) {
                out_ += '[';
                if (s.array_len > 0) out_ += std::to_string(s.array_len);
                out_ += ']';
            }
        }
        out_ += ") {\n";
        ++indent_;
        for (StmtId s : f.body) stmt(s);
        --indent_;
        out_ += "}\n";
        fn_ = nullptr;
    }

    const Symbol& sym(int idx) const { return fn_->symbols[static_cast<size_t>(idx)]; }

    void stmt(StmtId id) {
        const Stmt& s = p_.stmt(id);
        switch (s.kind) {
            case StmtKind::Decl: {
                line_start();
                const Symbol& d = sym(s.sym);
                out_ += spelling(d.type);
                out_ += ' ';
                out_ += d.name;
                if (d.is_array()) {
                    out_ += '[';
                    out_ += std::to_string(d.array_len);
                    out_ += ']';
                }
                if (s.expr != kNone) {
                    out_ += " = ";
                    expr(s.expr, kTernaryPrec);
                }
                out_ += ";\n";
                break;
            }
            case StmtKind::Assign: {
                line_start();
                out_ += sym(s.sym).name;
                if (s.index != kNone) {
                    out_ += '[';
                    expr(s.index, kTernaryPrec);
                    out_ += ']';
                }
                out_ += " = ";
                expr(s.expr, kTernaryPrec);
                out_ += ";\n";
                break;
            }
            case StmtKind::ExprStmt:
                line_start();
                expr(s.expr, kTernaryPrec);
                out_ += ";\n";
                break;
            case StmtKind::Return:
                line_start();
                out_ += "return ";
                expr(s.expr, kTernaryPrec);
                out_ += ";\n";
                break;
            case StmtKind::If:
                line_start();
                out_ += "if (";
                expr(s.expr, kTernaryPrec);
                out_ += ')';
                controlled(s.s0);
                if (s.s1 != kNone) {
                    line_start();
                    out_ += "else";
                    controlled(s.s1);
                }
                break;
            case StmtKind::While:
                line_start();
                out_ += "while (";
                expr(s.expr, kTernaryPrec);
                out_ += ')';
                controlled(s.s0);
                break;
            case StmtKind::For:
                line_start();
                out_ += "for (";
                if (s.s0 != kNone) inline_assign(s.s0);
                out_ += "; ";
                if (s.expr != kNone) expr(s.expr, kTernaryPrec);
                out_ += "; ";
                if (s.s1 != kNone) inline_assign(s.s1);
                out_ += ')';
                controlled(s.s2);
                break;
            case StmtKind::Block:
                line_start();
                block_body(s);
                out_ += '\n';
                break;
            case StmtKind::Empty:
                line_start();
                out_ += ";\n";
                break;
        }
    }

    // Prints the controlled statement of if/while/for: blocks inline with
    // braces, anything else indented on the next line. The printed shape
    // mirrors the AST so re-parsing reproduces it.
    void controlled(StmtId id) {
        const Stmt& s = p_.stmt(id);
        if (s.kind == StmtKind::Block) {
            out_ += ' ';
            block_body(s);
            out_ += '\n';
            return;
        }
        out_ += '\n';
        ++indent_;
        stmt(id);
        --indent_;
    }

    void block_body(const Stmt& s) {
        out_ += "{\n";
        ++indent_;
        for (StmtId b : s.body) stmt(b);
        --indent_;
        line_start();
        out_ += '}';
    }

    // Assign statement without indentation or trailing ';', for for-headers.
    void inline_assign(StmtId id) {
        const Stmt& s = p_.stmt(id);
        out_ += sym(s.sym).name;
        if (s.index != kNone) {
            out_ += '[';
            expr(s.index, kTernaryPrec);
            out_ += ']';
        }
        out_ += " = ";
        expr(s.expr, kTernaryPrec);
    }

    void expr(ExprId id, int parent_prec, bool right_operand = false) {
        const Expr& e = p_.expr(id);
        switch (e.kind) {
            case ExprKind::IntLit:
                out_ += std::to_string(e.value);
                if (e.unsigned_literal) out_ += 'u';
                break;
            case ExprKind::Var:
                out_ += sym(e.sym).name;
                break;
            case ExprKind::Index:
                out_ += sym(e.sym).name;
                out_ += '[';
                expr(e.a, kTernaryPrec);
                out_ += ']';
                break;
            case ExprKind::Call: {
                out_ += p_.functions[static_cast<size_t>(e.sym)].name;
                out_ += '(';
                for (size_t i = 0; i < e.args.size(); ++i) {
                    if (i) out_ += ", ";
                    expr(e.args[i], kTernaryPrec);
                }
                out_ += ')';
                break;
            }
            case ExprKind::Unary: {
                if (e.un == UnOp::Cast) {
                    out_ += '(';
                    out_ += spelling(e.cast_type);
                    out_ += ")(";
                    expr(e.a, kTernaryPrec);
                    out_ += ')';
                    break;
                }
                const char* op = e.un == UnOp::Neg         ? "-"
                                 : e.un == UnOp::Plus      ? "+"
                                 : e.un == UnOp::LogicalNot ? "!"
                                                            : "~";
                out_ += op;
                // Parenthesize nested unaries so "-(-x)" never lexes as "--".
                const Expr& inner = p_.expr(e.a);
                bool parens = inner.kind == ExprKind::Unary && inner.un != UnOp::Cast;
                if (parens) out_ += '(';
                expr(e.a, kUnaryPrec);
                if (parens) out_ += ')';
                break;
            }
            case ExprKind::Binary: {
                int prec = precedence(e.bin);
                bool parens = prec < parent_prec || (prec == parent_prec && right_operand);
                if (parens) out_ += '(';
                expr(e.a, prec);
                out_ += ' ';
                out_ += spelling(e.bin);
                out_ += ' ';
                expr(e.b, prec, true);
                if (parens) out_ += ')';
                break;
            }
            case ExprKind::Ternary: {
                bool parens = kTernaryPrec < parent_prec;
                if (parens) out_ += '(';
                // The condition must bind tighter than '?', so a nested
                // ternary condition keeps its parentheses.
                expr(e.a, kTernaryPrec + 1);
                out_ += " ? ";
                expr(e.b, kTernaryPrec);
                out_ += " : ";
                expr(e.c, kTernaryPrec);
                if (parens) out_ += ')';
                break;
            }
        }
    }
};

}  // namespace

std::string emit_source(const Program& program) { return Printer(program).run(); }

}  // namespace lockopt::minic
