#include "lockopt/cost.hpp"

#include <algorithm>

#include "lockopt/common.hpp"

namespace lockopt {

double CostModel::unit_for(CostCategory c) const {
    switch (c) {
        case CostCategory::AddSub: return add_sub;
        case CostCategory::Mul: return mul;
        case CostCategory::Div: return div;
        case CostCategory::Bitwise: return bitwise;
        case CostCategory::Compare: return compare;
        case CostCategory::Select: return select;
        default: return 0.0;
    }
}

static const char* category_name(CostCategory c) {
    switch (c) {
        case CostCategory::AddSub: return "add_sub";
        case CostCategory::Mul: return "mul";
        case CostCategory::Div: return "div";
        case CostCategory::Bitwise: return "bitwise";
        case CostCategory::Compare: return "compare";
        case CostCategory::Select: return "select";
        default: return "?";
    }
}

CostEstimate estimate_cost(const LockedProgram& locked, const CostModel& model) {
    CostEstimate est;
    auto charge = [&](const std::string& name, double units) {
        if (units == 0.0) return;
        est.breakdown[name] += units;
        est.total += units;
    };

    for (size_t c = 0; c < kCostCategoryCount; ++c) {
        long count = locked.base_ops[c];
        if (count == 0) continue;
        charge(category_name(static_cast<CostCategory>(c)),
               static_cast<double>(count) * model.unit_for(static_cast<CostCategory>(c)));
    }

    for (const Activation& act : locked.activations) {
        est.key_bits += act.length;
        switch (act.kind) {
            case PointKind::Operation:
                charge(category_name(cost_category(act.fake_op)),
                       model.unit_for(cost_category(act.fake_op)));
                charge("select", model.select);
                charge("key_registers", model.register_per_key_bit);
                break;
            case PointKind::Constant:
                charge("key_xor", model.xor_per_key_bit * act.length);
                charge("key_registers", model.register_per_key_bit * act.length);
                break;
            case PointKind::Branch:
                charge("key_xor", model.xor_per_key_bit);
                charge("key_registers", model.register_per_key_bit);
                break;
        }
    }
    return est;
}

size_t select_best(std::span<const Candidate> candidates, double epsilon) {
    if (candidates.empty()) throw Error("selection needs at least one candidate");
    double best_h = 0.0;
    for (const Candidate& c : candidates) best_h = std::max(best_h, c.h);
    double floor = (1.0 - epsilon) * best_h;

    size_t pick = candidates.size();
    auto better = [&](const Candidate& a, const Candidate& b) {
        if (a.cost.total != b.cost.total) return a.cost.total < b.cost.total;
        if (a.cost.key_bits != b.cost.key_bits) return a.cost.key_bits < b.cost.key_bits;
        int an = 0, bn = 0;
        for (int v : a.solution) an += v != 0;
        for (int v : b.solution) bn += v != 0;
        if (an != bn) return an < bn;
        return a.solution < b.solution;
    };
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].h < floor) continue;
        if (pick == candidates.size() || better(candidates[i], candidates[pick])) pick = i;
    }
    return pick;
}

}  // namespace lockopt
