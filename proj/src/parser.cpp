#include "lockopt/parser.hpp"

#include <cctype>
#include <map>
#include <set>
#include <utility>

namespace lockopt::minic {

namespace {

struct ParseAbort {
    Diagnostic diag;
};

[[noreturn]] void fail(int line, int col, std::string message) {
    throw ParseAbort{{line, col, std::move(message)}};
}

enum class Tok : uint8_t {
    End, Ident, IntLit,
    // keywords
    KwConst, KwIf, KwElse, KwFor, KwWhile, KwReturn,
    KwChar, KwShort, KwInt, KwSigned, KwUnsigned,
    // punctuation
    LParen, RParen, LBrace, RBrace, LBracket, RBracket, Semi, Comma, Question, Colon,
    Assign, PlusAssign, MinusAssign, StarAssign, SlashAssign, PercentAssign,
    AmpAssign, PipeAssign, CaretAssign, ShlAssign, ShrAssign,
    PlusPlus, MinusMinus,
    Plus, Minus, Star, Slash, Percent, Amp, Pipe, Caret, Shl, Shr,
    Lt, Le, Gt, Ge, EqEq, Ne, AmpAmp, PipePipe, Bang, Tilde,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1, col = 1;
    uint32_t value = 0;
    bool unsigned_suffix = false;
};

// Constructs the tool rejects up front, with a dedicated message.
const std::set<std::string>& unsupported_keywords() {
    static const std::set<std::string> kws = {
        "float", "double", "long", "struct", "union", "enum", "goto", "switch",
        "case", "default", "break", "continue", "do", "void", "static",
        "extern", "typedef", "sizeof", "volatile",
    };
    return kws;
}

// stdint-style aliases accepted as type names.
bool stdint_type(const std::string& name, Type& out) {
    static const std::map<std::string, Type> table = {
        {"int8_t", Type{8, true}},   {"uint8_t", Type{8, false}},
        {"int16_t", Type{16, true}}, {"uint16_t", Type{16, false}},
        {"int32_t", Type{32, true}}, {"uint32_t", Type{32, false}},
    };
    auto it = table.find(name);
    if (it == table.end()) return false;
    out = it->second;
    return true;
}

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            Token t = next_token();
            bool end = t.kind == Tok::End;
            out.push_back(std::move(t));
            if (end) return out;
        }
    }

  private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;

    char peek(size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space_and_comments() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(peek()))) advance();
            if (peek() == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && peek() != '\n') advance();
                continue;
            }
            if (peek() == '/' && peek(1) == '*') {
                int line = line_, col = col_;
                advance();
                advance();
                while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
                if (pos_ >= src_.size()) fail(line, col, "unterminated comment");
                advance();
                advance();
                continue;
            }
            return;
        }
    }

    Token next_token() {
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) return t;
        char c = peek();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier(t);
        if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
        return punctuation(t);
    }

    Token identifier(Token t) {
        std::string name;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') name += advance();
        static const std::map<std::string, Tok> kws = {
            {"const", Tok::KwConst},   {"if", Tok::KwIf},         {"else", Tok::KwElse},
            {"for", Tok::KwFor},       {"while", Tok::KwWhile},   {"return", Tok::KwReturn},
            {"char", Tok::KwChar},     {"short", Tok::KwShort},   {"int", Tok::KwInt},
            {"signed", Tok::KwSigned}, {"unsigned", Tok::KwUnsigned},
        };
        if (auto it = kws.find(name); it != kws.end()) {
            t.kind = it->second;
            t.text = std::move(name);
            return t;
        }
        if (unsupported_keywords().count(name)) {
            fail(t.line, t.col, "unsupported construct: '" + name + "'");
        }
        t.kind = Tok::Ident;
        t.text = std::move(name);
        return t;
    }

    Token number(Token t) {
        t.kind = Tok::IntLit;
        uint64_t value = 0;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            advance();
            advance();
            bool any = false;
            while (std::isxdigit(static_cast<unsigned char>(peek()))) {
                char c = advance();
                int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                        : (std::tolower(c) - 'a' + 10);
                value = value * 16 + static_cast<uint64_t>(d);
                any = true;
                if (value > 0xFFFFFFFFull) fail(t.line, t.col, "integer literal does not fit in 32 bits");
            }
            if (!any) fail(t.line, t.col, "malformed hex literal");
        } else {
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                value = value * 10 + static_cast<uint64_t>(advance() - '0');
                if (value > 0xFFFFFFFFull) fail(t.line, t.col, "integer literal does not fit in 32 bits");
            }
        }
        if (peek() == 'u' || peek() == 'U') {
            advance();
            t.unsigned_suffix = true;
        }
        if (peek() == '.' || peek() == 'f' || peek() == 'e' || peek() == 'E') {
            fail(t.line, t.col, "unsupported construct: floating-point literal");
        }
        if (std::isalnum(static_cast<unsigned char>(peek()))) {
            fail(t.line, t.col, "malformed integer literal");
        }
        t.value = static_cast<uint32_t>(value);
        return t;
    }

    Token punctuation(Token t) {
        char c = advance();
        auto two = [&](char second, Tok with, Tok without) {
            if (peek() == second) {
                advance();
                t.kind = with;
            } else {
                t.kind = without;
            }
        };
        switch (c) {
            case '(': t.kind = Tok::LParen; return t;
            case ')': t.kind = Tok::RParen; return t;
            case '{': t.kind = Tok::LBrace; return t;
            case '}': t.kind = Tok::RBrace; return t;
            case '[': t.kind = Tok::LBracket; return t;
            case ']': t.kind = Tok::RBracket; return t;
            case ';': t.kind = Tok::Semi; return t;
            case ',': t.kind = Tok::Comma; return t;
            case '?': t.kind = Tok::Question; return t;
            case ':': t.kind = Tok::Colon; return t;
            case '~': t.kind = Tok::Tilde; return t;
            case '+':
                if (peek() == '+') { advance(); t.kind = Tok::PlusPlus; return t; }
                two('=', Tok::PlusAssign, Tok::Plus);
                return t;
            case '-':
                if (peek() == '-') { advance(); t.kind = Tok::MinusMinus; return t; }
                two('=', Tok::MinusAssign, Tok::Minus);
                return t;
            case '*': two('=', Tok::StarAssign, Tok::Star); return t;
            case '/': two('=', Tok::SlashAssign, Tok::Slash); return t;
            case '%': two('=', Tok::PercentAssign, Tok::Percent); return t;
            case '&':
                if (peek() == '&') { advance(); t.kind = Tok::AmpAmp; return t; }
                two('=', Tok::AmpAssign, Tok::Amp);
                return t;
            case '|':
                if (peek() == '|') { advance(); t.kind = Tok::PipePipe; return t; }
                two('=', Tok::PipeAssign, Tok::Pipe);
                return t;
            case '^': two('=', Tok::CaretAssign, Tok::Caret); return t;
            case '!': two('=', Tok::Ne, Tok::Bang); return t;
            case '=': two('=', Tok::EqEq, Tok::Assign); return t;
            case '<':
                if (peek() == '<') {
                    advance();
                    two('=', Tok::ShlAssign, Tok::Shl);
                    return t;
                }
                two('=', Tok::Le, Tok::Lt);
                return t;
            case '>':
                if (peek() == '>') {
                    advance();
                    two('=', Tok::ShrAssign, Tok::Shr);
                    return t;
                }
                two('=', Tok::Ge, Tok::Gt);
                return t;
            default:
                fail(t.line, t.col, std::string("unexpected character '") + c + "'");
        }
    }
};

struct BinInfo {
    BinOp op;
    int prec;
};

bool binary_token(Tok k, BinInfo& info) {
    switch (k) {
        case Tok::Star: info = {BinOp::Mul, 10}; return true;
        case Tok::Slash: info = {BinOp::Div, 10}; return true;
        case Tok::Percent: info = {BinOp::Mod, 10}; return true;
        case Tok::Plus: info = {BinOp::Add, 9}; return true;
        case Tok::Minus: info = {BinOp::Sub, 9}; return true;
        case Tok::Shl: info = {BinOp::Shl, 8}; return true;
        case Tok::Shr: info = {BinOp::Shr, 8}; return true;
        case Tok::Lt: info = {BinOp::Lt, 7}; return true;
        case Tok::Le: info = {BinOp::Le, 7}; return true;
        case Tok::Gt: info = {BinOp::Gt, 7}; return true;
        case Tok::Ge: info = {BinOp::Ge, 7}; return true;
        case Tok::EqEq: info = {BinOp::Eq, 6}; return true;
        case Tok::Ne: info = {BinOp::Ne, 6}; return true;
        case Tok::Amp: info = {BinOp::BitAnd, 5}; return true;
        case Tok::Caret: info = {BinOp::BitXor, 4}; return true;
        case Tok::Pipe: info = {BinOp::BitOr, 3}; return true;
        case Tok::AmpAmp: info = {BinOp::LogicalAnd, 2}; return true;
        case Tok::PipePipe: info = {BinOp::LogicalOr, 1}; return true;
        default: return false;
    }
}

std::optional<BinOp> compound_assign_op(Tok k) {
    switch (k) {
        case Tok::PlusAssign: return BinOp::Add;
        case Tok::MinusAssign: return BinOp::Sub;
        case Tok::StarAssign: return BinOp::Mul;
        case Tok::SlashAssign: return BinOp::Div;
        case Tok::PercentAssign: return BinOp::Mod;
        case Tok::AmpAssign: return BinOp::BitAnd;
        case Tok::PipeAssign: return BinOp::BitOr;
        case Tok::CaretAssign: return BinOp::BitXor;
        case Tok::ShlAssign: return BinOp::Shl;
        case Tok::ShrAssign: return BinOp::Shr;
        default: return std::nullopt;
    }
}

class Parser {
  public:
    explicit Parser(std::string_view src) : tokens_(Lexer(src).run()) {}

    Program run() {
        while (!at(Tok::End)) parse_function();
        resolve_calls();
        return std::move(prog_);
    }

  private:
    std::vector<Token> tokens_;
    size_t pos_ = 0;
    Program prog_;
    Function* fn_ = nullptr;
    std::map<std::string, int> local_names_;
    std::vector<std::pair<ExprId, Token>> pending_calls_;

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    bool at(Tok k) const { return peek().kind == k; }
    const Token& advance() { return tokens_[pos_++]; }

    const Token& expect(Tok k, const char* what) {
        if (!at(k)) fail(peek().line, peek().col, std::string("expected ") + what);
        return advance();
    }

    bool type_start(size_t ahead = 0) const {
        switch (peek(ahead).kind) {
            case Tok::KwChar:
            case Tok::KwShort:
            case Tok::KwInt:
            case Tok::KwSigned:
            case Tok::KwUnsigned:
                return true;
            case Tok::Ident: {
                Type t;
                return stdint_type(peek(ahead).text, t);
            }
            default:
                return false;
        }
    }

    Type parse_type() {
        const Token& t = peek();
        Type out;
        if (t.kind == Tok::Ident && stdint_type(t.text, out)) {
            advance();
            return out;
        }
        bool is_signed = true;
        bool saw_sign = false;
        if (at(Tok::KwSigned) || at(Tok::KwUnsigned)) {
            is_signed = at(Tok::KwSigned);
            saw_sign = true;
            advance();
        }
        uint8_t width = 32;
        if (at(Tok::KwChar)) {
            width = 8;
            advance();
        } else if (at(Tok::KwShort)) {
            width = 16;
            advance();
            if (at(Tok::KwInt)) advance();  // "short int"
        } else if (at(Tok::KwInt)) {
            advance();
        } else if (!saw_sign) {
            fail(t.line, t.col, "expected type name");
        }
        if (at(Tok::Star)) fail(peek().line, peek().col, "unsupported construct: pointer type");
        return Type{width, is_signed};
    }

    // --- node builders ---

    ExprId new_expr(ExprKind kind, const Token& tok) {
        Expr e;
        e.kind = kind;
        e.line = tok.line;
        e.col = tok.col;
        prog_.exprs.push_back(std::move(e));
        return static_cast<ExprId>(prog_.exprs.size() - 1);
    }

    StmtId new_stmt(StmtKind kind, const Token& tok) {
        Stmt s;
        s.kind = kind;
        s.line = tok.line;
        s.col = tok.col;
        prog_.stmts.push_back(std::move(s));
        return static_cast<StmtId>(prog_.stmts.size() - 1);
    }

    ExprId clone_expr(ExprId id) {
        Expr copy = prog_.expr(id);
        if (copy.a != kNone) copy.a = clone_expr(copy.a);
        if (copy.b != kNone) copy.b = clone_expr(copy.b);
        if (copy.c != kNone) copy.c = clone_expr(copy.c);
        for (ExprId& arg : copy.args) arg = clone_expr(arg);
        prog_.exprs.push_back(std::move(copy));
        return static_cast<ExprId>(prog_.exprs.size() - 1);
    }

    // --- declarations ---

    void parse_function() {
        Type ret = parse_type();
        const Token& name = expect(Tok::Ident, "function name");
        for (const Function& f : prog_.functions) {
            if (f.name == name.text)
                fail(name.line, name.col, "duplicate function '" + name.text + "'");
        }
        prog_.functions.emplace_back();
        fn_ = &prog_.functions.back();
        fn_->name = name.text;
        fn_->return_type = ret;
        fn_->line = name.line;
        fn_->col = name.col;
        local_names_.clear();

        expect(Tok::LParen, "'('");
        if (!at(Tok::RParen)) {
            parse_param();
            while (at(Tok::Comma)) {
                advance();
                parse_param();
            }
        }
        expect(Tok::RParen, "')'");
        fn_->param_count = static_cast<int>(fn_->symbols.size());

        expect(Tok::LBrace, "'{'");
        while (!at(Tok::RBrace)) parse_block_item(fn_->body);
        expect(Tok::RBrace, "'}'");
        fn_ = nullptr;
    }

    void parse_param() {
        Symbol sym;
        sym.is_param = true;
        if (at(Tok::KwConst)) {
            sym.is_const = true;
            advance();
        }
        sym.type = parse_type();
        const Token& name = expect(Tok::Ident, "parameter name");
        sym.name = name.text;
        sym.line = name.line;
        sym.col = name.col;
        if (at(Tok::LBracket)) {
            advance();
            if (at(Tok::IntLit)) {
                const Token& len = advance();
                if (len.value == 0) fail(len.line, len.col, "array size must be positive");
                sym.array_len = static_cast<int32_t>(len.value);
            } else {
                sym.array_len = 0;  // unsized; validated by the checker
            }
            expect(Tok::RBracket, "']'");
        }
        add_symbol(std::move(sym), name);
    }

    int add_symbol(Symbol sym, const Token& at_tok) {
        if (local_names_.count(sym.name))
            fail(at_tok.line, at_tok.col, "redeclaration of '" + sym.name + "'");
        fn_->symbols.push_back(std::move(sym));
        int idx = static_cast<int>(fn_->symbols.size() - 1);
        local_names_[fn_->symbols.back().name] = idx;
        return idx;
    }

    // --- statements ---

    void parse_block_item(std::vector<StmtId>& into) {
        if (type_start()) {
            parse_decl(into);
            return;
        }
        into.push_back(parse_stmt());
    }

    void parse_decl(std::vector<StmtId>& into) {
        Type type = parse_type();
        for (;;) {
            const Token& name = expect(Tok::Ident, "variable name");
            Symbol sym;
            sym.name = name.text;
            sym.type = type;
            sym.line = name.line;
            sym.col = name.col;
            if (at(Tok::LBracket)) {
                advance();
                const Token& len = expect(Tok::IntLit, "array size");
                if (len.value == 0) fail(len.line, len.col, "array size must be positive");
                sym.array_len = static_cast<int32_t>(len.value);
                expect(Tok::RBracket, "']'");
            }
            bool is_array = sym.is_array();
            int idx = add_symbol(std::move(sym), name);
            StmtId s = new_stmt(StmtKind::Decl, name);
            prog_.stmt(s).sym = idx;
            if (at(Tok::Assign)) {
                if (is_array) fail(peek().line, peek().col, "array initializers are not supported");
                advance();
                prog_.stmt(s).expr = parse_expr();
            }
            into.push_back(s);
            if (!at(Tok::Comma)) break;
            advance();
        }
        expect(Tok::Semi, "';'");
    }

    StmtId parse_stmt() {
        const Token& t = peek();
        if (type_start())
            fail(t.line, t.col, "declarations must appear directly in a block");
        switch (t.kind) {
            case Tok::LBrace: {
                advance();
                StmtId s = new_stmt(StmtKind::Block, t);
                std::vector<StmtId> body;
                while (!at(Tok::RBrace)) parse_block_item(body);
                expect(Tok::RBrace, "'}'");
                prog_.stmt(s).body = std::move(body);
                return s;
            }
            case Tok::Semi:
                advance();
                return new_stmt(StmtKind::Empty, t);
            case Tok::KwIf: {
                advance();
                expect(Tok::LParen, "'('");
                ExprId cond = parse_expr();
                expect(Tok::RParen, "')'");
                StmtId then_s = parse_stmt();
                StmtId else_s = kNone;
                if (at(Tok::KwElse)) {
                    advance();
                    else_s = parse_stmt();
                }
                StmtId s = new_stmt(StmtKind::If, t);
                Stmt& st = prog_.stmt(s);
                st.expr = cond;
                st.s0 = then_s;
                st.s1 = else_s;
                return s;
            }
            case Tok::KwWhile: {
                advance();
                expect(Tok::LParen, "'('");
                ExprId cond = parse_expr();
                expect(Tok::RParen, "')'");
                StmtId body = parse_stmt();
                StmtId s = new_stmt(StmtKind::While, t);
                Stmt& st = prog_.stmt(s);
                st.expr = cond;
                st.s0 = body;
                return s;
            }
            case Tok::KwFor: {
                advance();
                expect(Tok::LParen, "'('");
                if (type_start())
                    fail(peek().line, peek().col,
                         "declarations are not allowed in for-init; declare in the enclosing block");
                StmtId init = at(Tok::Semi) ? kNone : parse_assignment(false);
                expect(Tok::Semi, "';'");
                ExprId cond = at(Tok::Semi) ? kNone : parse_expr();
                expect(Tok::Semi, "';'");
                StmtId step = at(Tok::RParen) ? kNone : parse_assignment(false);
                expect(Tok::RParen, "')'");
                StmtId body = parse_stmt();
                StmtId s = new_stmt(StmtKind::For, t);
                Stmt& st = prog_.stmt(s);
                st.s0 = init;
                st.expr = cond;
                st.s1 = step;
                st.s2 = body;
                return s;
            }
            case Tok::KwReturn: {
                advance();
                if (at(Tok::Semi))
                    fail(t.line, t.col, "return must carry a value");
                ExprId v = parse_expr();
                expect(Tok::Semi, "';'");
                StmtId s = new_stmt(StmtKind::Return, t);
                prog_.stmt(s).expr = v;
                return s;
            }
            default: {
                StmtId s = parse_assignment(true);
                expect(Tok::Semi, "';'");
                return s;
            }
        }
    }

    // Parses an assignment (including compound and ++/--), or, when
    // `allow_bare` is set, a bare expression statement.
    StmtId parse_assignment(bool allow_bare) {
        const Token& t = peek();
        if (at(Tok::PlusPlus) || at(Tok::MinusMinus)) {
            BinOp op = at(Tok::PlusPlus) ? BinOp::Add : BinOp::Sub;
            advance();
            ExprId target = parse_unary();
            return desugar_increment(target, op, t);
        }
        ExprId e = parse_expr();
        if (at(Tok::PlusPlus) || at(Tok::MinusMinus)) {
            BinOp op = at(Tok::PlusPlus) ? BinOp::Add : BinOp::Sub;
            advance();
            return desugar_increment(e, op, t);
        }
        if (at(Tok::Assign)) {
            advance();
            ExprId value = parse_expr();
            return make_assign(e, value, t);
        }
        if (auto op = compound_assign_op(peek().kind)) {
            advance();
            ExprId rhs = parse_expr();
            // x op= e  desugars to  x = x op (e)
            ExprId read = clone_expr(e);
            ExprId value = new_expr(ExprKind::Binary, t);
            Expr& bin = prog_.expr(value);
            bin.bin = *op;
            bin.a = read;
            bin.b = rhs;
            return make_assign(e, value, t);
        }
        if (!allow_bare)
            fail(t.line, t.col, "expected an assignment");
        StmtId s = new_stmt(StmtKind::ExprStmt, t);
        prog_.stmt(s).expr = e;
        return s;
    }

    StmtId desugar_increment(ExprId target, BinOp op, const Token& t) {
        ExprId read = clone_expr(target);
        ExprId one = new_expr(ExprKind::IntLit, t);
        prog_.expr(one).value = 1;
        ExprId value = new_expr(ExprKind::Binary, t);
        Expr& bin = prog_.expr(value);
        bin.bin = op;
        bin.a = read;
        bin.b = one;
        return make_assign(target, value, t);
    }

    StmtId make_assign(ExprId target, ExprId value, const Token& t) {
        const Expr& te = prog_.expr(target);
        if (te.kind != ExprKind::Var && te.kind != ExprKind::Index)
            fail(te.line, te.col, "assignment target must be a variable or array element");
        StmtId s = new_stmt(StmtKind::Assign, t);
        Stmt& st = prog_.stmt(s);
        st.sym = te.sym;
        st.index = te.kind == ExprKind::Index ? te.a : kNone;
        st.expr = value;
        return s;
    }

    // --- expressions ---

    ExprId parse_expr() { return parse_ternary(); }

    ExprId parse_ternary() {
        ExprId cond = parse_binary(1);
        if (!at(Tok::Question)) return cond;
        const Token& t = advance();
        ExprId then_e = parse_expr();
        expect(Tok::Colon, "':'");
        ExprId else_e = parse_ternary();
        ExprId e = new_expr(ExprKind::Ternary, t);
        Expr& ex = prog_.expr(e);
        ex.a = cond;
        ex.b = then_e;
        ex.c = else_e;
        return e;
    }

    ExprId parse_binary(int min_prec) {
        ExprId lhs = parse_unary();
        for (;;) {
            BinInfo info;
            if (!binary_token(peek().kind, info) || info.prec < min_prec) return lhs;
            const Token& t = advance();
            ExprId rhs = parse_binary(info.prec + 1);
            ExprId e = new_expr(ExprKind::Binary, t);
            Expr& ex = prog_.expr(e);
            ex.bin = info.op;
            ex.a = lhs;
            ex.b = rhs;
            lhs = e;
        }
    }

    ExprId parse_unary() {
        const Token& t = peek();
        UnOp op;
        switch (t.kind) {
            case Tok::Minus: op = UnOp::Neg; break;
            case Tok::Plus: op = UnOp::Plus; break;
            case Tok::Bang: op = UnOp::LogicalNot; break;
            case Tok::Tilde: op = UnOp::BitNot; break;
            case Tok::Star:
            case Tok::Amp:
                fail(t.line, t.col, "unsupported construct: pointer operator");
            case Tok::LParen:
                if (type_start(1)) {
                    advance();
                    Type ct = parse_type();
                    expect(Tok::RParen, "')'");
                    ExprId inner = parse_unary();
                    ExprId e = new_expr(ExprKind::Unary, t);
                    Expr& ex = prog_.expr(e);
                    ex.un = UnOp::Cast;
                    ex.cast_type = ct;
                    ex.a = inner;
                    return e;
                }
                return parse_primary();
            default:
                return parse_primary();
        }
        advance();
        ExprId inner = parse_unary();
        ExprId e = new_expr(ExprKind::Unary, t);
        Expr& ex = prog_.expr(e);
        ex.un = op;
        ex.a = inner;
        return e;
    }

    ExprId parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::IntLit: {
                advance();
                ExprId e = new_expr(ExprKind::IntLit, t);
                Expr& ex = prog_.expr(e);
                ex.value = t.value;
                ex.unsigned_literal = t.unsigned_suffix;
                return e;
            }
            case Tok::LParen: {
                advance();
                ExprId e = parse_expr();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Ident: {
                advance();
                if (at(Tok::LParen)) {
                    advance();
                    ExprId e = new_expr(ExprKind::Call, t);
                    std::vector<ExprId> args;
                    if (!at(Tok::RParen)) {
                        args.push_back(parse_expr());
                        while (at(Tok::Comma)) {
                            advance();
                            args.push_back(parse_expr());
                        }
                    }
                    expect(Tok::RParen, "')'");
                    prog_.expr(e).args = std::move(args);
                    pending_calls_.emplace_back(e, t);
                    return e;
                }
                auto it = local_names_.find(t.text);
                if (it == local_names_.end())
                    fail(t.line, t.col, "use of undeclared identifier '" + t.text + "'");
                if (at(Tok::LBracket)) {
                    advance();
                    ExprId sub = parse_expr();
                    expect(Tok::RBracket, "']'");
                    if (at(Tok::LBracket))
                        fail(peek().line, peek().col, "unsupported construct: multidimensional access");
                    ExprId e = new_expr(ExprKind::Index, t);
                    Expr& ex = prog_.expr(e);
                    ex.sym = it->second;
                    ex.a = sub;
                    return e;
                }
                ExprId e = new_expr(ExprKind::Var, t);
                prog_.expr(e).sym = it->second;
                return e;
            }
            default:
                fail(t.line, t.col, "expected an expression");
        }
    }

    void resolve_calls() {
        for (auto& [expr_id, tok] : pending_calls_) {
            int idx = -1;
            for (size_t i = 0; i < prog_.functions.size(); ++i) {
                if (prog_.functions[i].name == tok.text) {
                    idx = static_cast<int>(i);
                    break;
                }
            }
            if (idx < 0) fail(tok.line, tok.col, "call to unknown function '" + tok.text + "'");
            prog_.expr(expr_id).sym = idx;
        }
    }
};

// ---------------------------------------------------------------------------
// Semantic checking and typing.

class Checker {
  public:
    Checker(Program& p, std::string_view top_name) : p_(p), top_name_(top_name) {}

    void run() {
        select_top();
        for (size_t i = 0; i < p_.functions.size(); ++i) check_function(static_cast<int>(i));
        check_recursion();
        check_top_signature();
    }

  private:
    Program& p_;
    std::string_view top_name_;
    Function* fn_ = nullptr;
    std::vector<std::set<int>> callees_;  // per function

    void select_top() {
        std::string want(top_name_.empty() ? "top" : top_name_);
        int found = -1;
        for (size_t i = 0; i < p_.functions.size(); ++i) {
            if (p_.functions[i].name == want) found = static_cast<int>(i);
        }
        if (found < 0) {
            if (top_name_.empty() && p_.functions.size() == 1) {
                found = 0;
            } else if (p_.functions.empty()) {
                fail(1, 1, "no functions in translation unit");
            } else {
                fail(1, 1, "missing top function '" + want + "'");
            }
        }
        p_.top_index = found;
    }

    const Symbol& sym(int idx) const { return fn_->symbols[static_cast<size_t>(idx)]; }

    void check_function(int index) {
        fn_ = &p_.functions[static_cast<size_t>(index)];
        callees_.emplace_back();
        for (const Symbol& s : fn_->symbols) {
            if (s.name == "KEY") {
                bool locked_shape = s.is_param && s.is_const && s.array_len == 0 &&
                                    s.type == kUint8;
                if (!locked_shape)
                    fail(s.line, s.col, "'KEY' is reserved for the locking key parameter");
            } else if (s.is_param && s.array_len == 0) {
                fail(s.line, s.col, "array parameters must have a fixed size");
            }
            if (!s.is_param && s.is_const) fail(s.line, s.col, "const locals are not supported");
        }
        declared_.assign(fn_->symbols.size(), false);
        for (int i = 0; i < fn_->param_count; ++i) declared_[static_cast<size_t>(i)] = true;
        for (StmtId s : fn_->body) check_stmt(s, index);
        fn_ = nullptr;
    }

    std::vector<bool> declared_;

    void require_declared(const Expr& e) {
        if (!declared_[static_cast<size_t>(e.sym)])
            fail(e.line, e.col, "use of '" + sym(e.sym).name + "' before its declaration");
    }

    void check_stmt(StmtId id, int fn_index) {
        Stmt& s = p_.stmt(id);
        switch (s.kind) {
            case StmtKind::Decl: {
                if (s.expr != kNone) {
                    Type t = check_expr(s.expr, fn_index);
                    (void)t;  // any integer type converts on store
                }
                declared_[static_cast<size_t>(s.sym)] = true;
                break;
            }
            case StmtKind::Assign: {
                const Symbol& target = sym(s.sym);
                if (!declared_[static_cast<size_t>(s.sym)])
                    fail(s.line, s.col, "use of '" + target.name + "' before its declaration");
                if (target.is_const) fail(s.line, s.col, "cannot assign to const '" + target.name + "'");
                if (target.is_array() && s.index == kNone)
                    fail(s.line, s.col, "array '" + target.name + "' needs a subscript");
                if (!target.is_array() && s.index != kNone)
                    fail(s.line, s.col, "'" + target.name + "' is not an array");
                if (s.index != kNone) check_expr(s.index, fn_index);
                check_expr(s.expr, fn_index);
                break;
            }
            case StmtKind::ExprStmt:
            case StmtKind::Return:
                check_expr(s.expr, fn_index);
                break;
            case StmtKind::If:
                check_expr(s.expr, fn_index);
                check_stmt(s.s0, fn_index);
                if (s.s1 != kNone) check_stmt(s.s1, fn_index);
                break;
            case StmtKind::While:
                check_expr(s.expr, fn_index);
                check_stmt(s.s0, fn_index);
                break;
            case StmtKind::For:
                if (s.s0 != kNone) check_stmt(s.s0, fn_index);
                if (s.expr != kNone) check_expr(s.expr, fn_index);
                if (s.s1 != kNone) check_stmt(s.s1, fn_index);
                check_stmt(s.s2, fn_index);
                break;
            case StmtKind::Block:
                for (StmtId b : s.body) check_stmt(b, fn_index);
                break;
            case StmtKind::Empty:
                break;
        }
    }

    Type check_expr(ExprId id, int fn_index) {
        Expr& e = p_.expr(id);
        switch (e.kind) {
            case ExprKind::IntLit:
                e.type = e.unsigned_literal ? kUint32 : kInt32;
                return e.type;
            case ExprKind::Var: {
                require_declared(e);
                const Symbol& s = sym(e.sym);
                if (s.is_array())
                    fail(e.line, e.col, "array '" + s.name + "' used without a subscript");
                e.type = s.type;
                return e.type;
            }
            case ExprKind::Index: {
                require_declared(e);
                const Symbol& s = sym(e.sym);
                if (!s.is_array()) fail(e.line, e.col, "'" + s.name + "' is not an array");
                check_expr(e.a, fn_index);
                e.type = s.type;
                return e.type;
            }
            case ExprKind::Unary: {
                Type inner = check_expr(e.a, fn_index);
                switch (e.un) {
                    case UnOp::Neg:
                    case UnOp::Plus:
                    case UnOp::BitNot:
                        e.type = promoted(inner);
                        break;
                    case UnOp::LogicalNot:
                        e.type = kInt32;
                        break;
                    case UnOp::Cast:
                        e.type = e.cast_type;
                        break;
                }
                return e.type;
            }
            case ExprKind::Binary: {
                Type lt = check_expr(e.a, fn_index);
                Type rt = check_expr(e.b, fn_index);
                if (e.bin == BinOp::Shl || e.bin == BinOp::Shr) {
                    e.type = promoted(lt);
                } else if (is_comparison(e.bin) || is_logical(e.bin)) {
                    e.type = kInt32;
                } else {
                    e.type = common_type(lt, rt);
                }
                return e.type;
            }
            case ExprKind::Ternary: {
                check_expr(e.a, fn_index);
                Type tt = check_expr(e.b, fn_index);
                Type ft = check_expr(e.c, fn_index);
                e.type = common_type(tt, ft);
                return e.type;
            }
            case ExprKind::Call: {
                const Function& callee = p_.functions[static_cast<size_t>(e.sym)];
                callees_[static_cast<size_t>(fn_index)].insert(e.sym);
                if (e.args.size() != static_cast<size_t>(callee.param_count))
                    fail(e.line, e.col, "call to '" + callee.name + "' expects " +
                                            std::to_string(callee.param_count) + " argument(s)");
                for (size_t i = 0; i < e.args.size(); ++i) {
                    const Symbol& param = callee.symbols[i];
                    Expr& arg = p_.expr(e.args[i]);
                    if (param.is_array()) {
                        // Arrays pass by name, read-only: only const parameters.
                        if (!param.is_const)
                            fail(arg.line, arg.col,
                                 "cannot pass an array to non-const parameter '" + param.name +
                                     "' of '" + callee.name + "'");
                        if (arg.kind != ExprKind::Var || !sym(arg.sym).is_array())
                            fail(arg.line, arg.col, "parameter '" + param.name + "' of '" +
                                                        callee.name + "' takes an array");
                        require_declared(arg);
                        const Symbol& given = sym(arg.sym);
                        if (!(given.type == param.type))
                            fail(arg.line, arg.col, "array argument for '" + param.name +
                                                        "' has a different element type");
                        if (param.array_len > 0 && given.array_len != param.array_len)
                            fail(arg.line, arg.col, "array argument for '" + param.name +
                                                        "' must have " +
                                                        std::to_string(param.array_len) +
                                                        " elements");
                        arg.type = given.type;
                        continue;
                    }
                    Type at = check_expr(e.args[i], fn_index);
                    (void)at;  // scalar arguments convert on the call boundary
                }
                e.type = callee.return_type;
                return e.type;
            }
        }
        fail(e.line, e.col, "internal: unknown expression kind");
    }

    void check_recursion() {
        size_t n = p_.functions.size();
        std::vector<int> state(n, 0);  // 0 new, 1 visiting, 2 done
        auto dfs = [&](auto&& self, int f) -> void {
            state[static_cast<size_t>(f)] = 1;
            for (int callee : callees_[static_cast<size_t>(f)]) {
                if (state[static_cast<size_t>(callee)] == 1) {
                    const Function& fun = p_.functions[static_cast<size_t>(f)];
                    fail(fun.line, fun.col, "unsupported construct: recursion involving '" +
                                                p_.functions[static_cast<size_t>(callee)].name + "'");
                }
                if (state[static_cast<size_t>(callee)] == 0) self(self, callee);
            }
            state[static_cast<size_t>(f)] = 2;
        };
        for (size_t i = 0; i < n; ++i) {
            if (state[i] == 0) dfs(dfs, static_cast<int>(i));
        }
    }

    void check_top_signature() {
        const Function& top = p_.top();
        for (int i = 0; i < top.param_count; ++i) {
            const Symbol& s = top.symbols[static_cast<size_t>(i)];
            if (s.is_array() && s.array_len == 0 && s.name != "KEY")
                fail(s.line, s.col, "top function array parameters must have a fixed size");
        }
    }
};

}  // namespace

ParseResult parse(std::string_view source, std::string_view top_name) {
    ParseResult result;
    try {
        Program prog = Parser(source).run();
        Checker(prog, top_name).run();
        renumber_nodes(prog);
        result.program = std::move(prog);
    } catch (const ParseAbort& abort) {
        result.diagnostics.push_back(abort.diag);
    }
    return result;
}

Program parse_or_throw(std::string_view source, std::string_view top_name) {
    ParseResult r = parse(source, top_name);
    if (!r.ok()) throw Error("parse failed:\n" + format_diagnostics(r.diagnostics));
    return std::move(*r.program);
}

}  // namespace lockopt::minic
