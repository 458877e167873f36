#include "lockopt/points.hpp"

#include <algorithm>
#include <set>

#include "lockopt/common.hpp"

namespace lockopt {

using minic::BinOp;
using minic::Expr;
using minic::ExprId;
using minic::ExprKind;
using minic::kNone;
using minic::Program;
using minic::Stmt;
using minic::StmtId;
using minic::StmtKind;

const char* spelling(PointKind k) {
    switch (k) {
        case PointKind::Constant: return "const";
        case PointKind::Operation: return "op";
        case PointKind::Branch: return "ctrl";
    }
    return "?";
}

std::span<const BinOp> fake_ops_for(BinOp op) {
    // Mirrors the add -> {sub, mul} style of alternatives; complementary
    // comparisons; shifts swap direction. Division and modulo stay unlocked
    // and never appear as fakes, so wrong keys cannot introduce traps.
    static const std::vector<BinOp> kAdd = {BinOp::Sub, BinOp::Mul};
    static const std::vector<BinOp> kSub = {BinOp::Add, BinOp::Mul};
    static const std::vector<BinOp> kMul = {BinOp::Add, BinOp::Sub};
    static const std::vector<BinOp> kXor = {BinOp::BitAnd, BinOp::BitOr};
    static const std::vector<BinOp> kAnd = {BinOp::BitOr, BinOp::BitXor};
    static const std::vector<BinOp> kOr = {BinOp::BitAnd, BinOp::BitXor};
    static const std::vector<BinOp> kShl = {BinOp::Shr};
    static const std::vector<BinOp> kShr = {BinOp::Shl};
    static const std::vector<BinOp> kLt = {BinOp::Ge};
    static const std::vector<BinOp> kLe = {BinOp::Gt};
    static const std::vector<BinOp> kGt = {BinOp::Le};
    static const std::vector<BinOp> kGe = {BinOp::Lt};
    static const std::vector<BinOp> kEq = {BinOp::Ne};
    static const std::vector<BinOp> kNe = {BinOp::Eq};
    static const std::vector<BinOp> kEmpty = {};
    switch (op) {
        case BinOp::Add: return kAdd;
        case BinOp::Sub: return kSub;
        case BinOp::Mul: return kMul;
        case BinOp::BitXor: return kXor;
        case BinOp::BitAnd: return kAnd;
        case BinOp::BitOr: return kOr;
        case BinOp::Shl: return kShl;
        case BinOp::Shr: return kShr;
        case BinOp::Lt: return kLt;
        case BinOp::Le: return kLe;
        case BinOp::Gt: return kGt;
        case BinOp::Ge: return kGe;
        case BinOp::Eq: return kEq;
        case BinOp::Ne: return kNe;
        default: return kEmpty;
    }
}

namespace {

/// Preorder walk collecting points. Subscript expressions are address
/// computation and never yield points; an if/ternary condition root yields a
/// Branch point and nothing else for that node.
class PointFinder {
  public:
    PointFinder(const Program& p, const AnalysisOptions& options) : p_(p), options_(options) {}

    std::vector<ObfuscationPoint> collect(const std::set<std::string>& excluded) {
        for (size_t i = 0; i < p_.functions.size(); ++i) {
            if (excluded.count(p_.functions[i].name)) continue;
            fn_index_ = static_cast<int>(i);
            for (StmtId s : p_.functions[i].body) walk_stmt(s);
        }
        for (size_t i = 0; i < points_.size(); ++i) points_[i].point_id = static_cast<int>(i);
        return std::move(points_);
    }

  private:
    const Program& p_;
    AnalysisOptions options_;
    int fn_index_ = 0;
    std::vector<ObfuscationPoint> points_;

    void add(PointKind kind, const Expr& e, int alternatives, int cost,
             std::vector<BinOp> fakes = {}) {
        ObfuscationPoint pt;
        pt.kind = kind;
        pt.node_id = e.node_id;
        pt.function_index = fn_index_;
        pt.alternatives = alternatives;
        pt.key_cost = cost;
        pt.fake_ops = std::move(fakes);
        points_.push_back(std::move(pt));
    }

    void walk_condition(ExprId cond) {
        const Expr& e = p_.expr(cond);
        add(PointKind::Branch, e, 1, 1);
        // The condition root is consumed by the Branch point; its operands
        // are analyzed normally.
        walk_children(e);
    }

    void walk_children(const Expr& e) {
        if (e.a != kNone) walk_expr(e.a);
        if (e.b != kNone) walk_expr(e.b);
        if (e.c != kNone) walk_expr(e.c);
        for (ExprId arg : e.args) walk_expr(arg);
    }

    void walk_expr(ExprId id) {
        const Expr& e = p_.expr(id);
        switch (e.kind) {
            case ExprKind::IntLit:
                add(PointKind::Constant, e, 1, options_.constant_bits);
                return;
            case ExprKind::Index:
                return;  // subscript subtree skipped entirely
            case ExprKind::Binary: {
                auto fakes = fake_ops_for(e.bin);
                if (!fakes.empty()) {
                    add(PointKind::Operation, e, static_cast<int>(fakes.size()), 1,
                        std::vector<BinOp>(fakes.begin(), fakes.end()));
                }
                walk_children(e);
                return;
            }
            case ExprKind::Ternary:
                walk_condition(e.a);
                walk_expr(e.b);
                walk_expr(e.c);
                return;
            default:
                walk_children(e);
                return;
        }
    }

    void walk_stmt(StmtId id) {
        const Stmt& s = p_.stmt(id);
        switch (s.kind) {
            case StmtKind::Decl:
            case StmtKind::ExprStmt:
            case StmtKind::Return:
                if (s.expr != kNone) walk_expr(s.expr);
                break;
            case StmtKind::Assign:
                // The target subscript is address computation; skip it.
                walk_expr(s.expr);
                break;
            case StmtKind::If:
                walk_condition(s.expr);
                walk_stmt(s.s0);
                if (s.s1 != kNone) walk_stmt(s.s1);
                break;
            case StmtKind::While:
                if (s.expr != kNone) walk_expr(s.expr);
                walk_stmt(s.s0);
                break;
            case StmtKind::For:
                if (s.s0 != kNone) walk_stmt(s.s0);
                if (s.expr != kNone) walk_expr(s.expr);
                if (s.s1 != kNone) walk_stmt(s.s1);
                walk_stmt(s.s2);
                break;
            case StmtKind::Block:
                for (StmtId b : s.body) walk_stmt(b);
                break;
            case StmtKind::Empty:
                break;
        }
    }
};

}  // namespace

std::vector<ObfuscationPoint> find_points(const Program& program, const Constraints& constraints,
                                          const AnalysisOptions& options) {
    if (options.constant_bits < 1 || options.constant_bits > 32)
        throw Error("constant key width must be in [1, 32]");
    std::set<std::string> excluded(constraints.excluded_functions.begin(),
                                   constraints.excluded_functions.end());
    for (const std::string& name : excluded) {
        bool known = false;
        for (const auto& f : program.functions) known = known || f.name == name;
        if (!known) throw Error("excluded function '" + name + "' does not exist");
    }
    auto points = PointFinder(program, options).collect(excluded);
    for (int id : constraints.forced_points) {
        if (id < 0 || id >= static_cast<int>(points.size()))
            throw Error("forced point id " + std::to_string(id) + " is out of range (have " +
                        std::to_string(points.size()) + " points)");
        points[static_cast<size_t>(id)].forced = true;
    }
    return points;
}

int key_bits(const SolutionVector& solution, std::span<const ObfuscationPoint> points) {
    if (solution.size() != points.size())
        throw Error("solution length " + std::to_string(solution.size()) +
                    " does not match point count " + std::to_string(points.size()));
    int bits = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        if (solution[i] != 0) bits += points[i].key_cost;
    }
    return bits;
}

BigUint space_size(std::span<const ObfuscationPoint> points) {
    BigUint size(1);
    for (const auto& pt : points) {
        size.multiply(static_cast<uint32_t>(pt.forced ? pt.alternatives : pt.alternatives + 1));
    }
    return size;
}

bool is_feasible(const SolutionVector& solution, std::span<const ObfuscationPoint> points,
                 int key_length) {
    return key_bits(solution, points) <= key_length;
}

void validate_solution(const SolutionVector& solution, std::span<const ObfuscationPoint> points) {
    if (solution.size() != points.size())
        throw Error("solution length " + std::to_string(solution.size()) +
                    " does not match point count " + std::to_string(points.size()));
    for (size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        if (solution[i] < 0 || solution[i] > pt.alternatives)
            throw Error("solution entry " + std::to_string(i) + " = " +
                        std::to_string(solution[i]) + " outside [0, " +
                        std::to_string(pt.alternatives) + "]");
        if (pt.forced && solution[i] == 0)
            throw Error("forced point " + std::to_string(i) + " is deactivated");
    }
}

PointSummary summarize_points(std::span<const ObfuscationPoint> points) {
    PointSummary s;
    for (const auto& pt : points) {
        switch (pt.kind) {
            case PointKind::Branch: ++s.branches; break;
            case PointKind::Operation: ++s.operations; break;
            case PointKind::Constant: ++s.constants; break;
        }
        s.full_bits += pt.key_cost;
    }
    return s;
}

}  // namespace lockopt
