#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lockopt/entropy.hpp"
#include "lockopt/explore.hpp"
#include "lockopt/cost.hpp"
#include "lockopt/parser.hpp"
#include "lockopt/pipeline.hpp"
#include "lockopt/printer.hpp"

namespace py = pybind11;
using namespace lockopt;

namespace {

using PyTests = std::vector<std::vector<std::vector<uint32_t>>>;

std::vector<sim::InputVector> to_inputs(const PyTests& tests) {
    std::vector<sim::InputVector> out;
    out.reserve(tests.size());
    for (const auto& t : tests) out.push_back(sim::InputVector{t});
    return out;
}

/// Owning wrapper so Python callers never manage C++ lifetimes: the context
/// copies the program, points, tests, and keys it scores against.
struct OwningContext {
    minic::Program program;
    std::vector<ObfuscationPoint> points;
    EvalContext ctx;

    OwningContext(const minic::Program& prog, std::vector<ObfuscationPoint> pts, const Key& key,
              const PyTests& tests, const std::vector<Key>& wrong_keys, long step_budget, int jobs)
        : program(prog),
          points(std::move(pts)),
          ctx(program, points, key, to_inputs(tests), wrong_keys, step_budget, jobs) {}
};

}  // namespace

PYBIND11_MODULE(_lockopt, m) {
    m.doc() = "Behavioral logic locking optimizer: MiniC frontend, locking transforms, "
              "entropy metric, and design-space exploration.";

    py::register_exception<Error>(m, "LockoptError");

    py::class_<minic::Program>(m, "Program")
        .def_property_readonly("top_name",
                               [](const minic::Program& p) { return p.top().name; })
        .def_property_readonly("output_bit_count", &minic::Program::output_bit_count)
        .def_property_readonly("is_locked", &minic::Program::is_locked)
        .def("emit_source", [](const minic::Program& p) { return minic::emit_source(p); });

    m.def("parse", [](const std::string& source, const std::string& top) {
              return minic::parse_or_throw(source, top);
          },
          py::arg("source"), py::arg("top") = std::string(),
          "Parse MiniC source into a Program; raises LockoptError with diagnostics.");
    m.def("emit_source", [](const minic::Program& p) { return minic::emit_source(p); });

    py::class_<Key>(m, "Key")
        .def_static("zeros", &Key::zeros, py::arg("nbits"))
        .def_static("random",
                    [](size_t nbits, uint64_t seed) {
                        Rng rng(seed);
                        return Key::random(nbits, rng);
                    },
                    py::arg("nbits"), py::arg("seed"))
        .def_static("from_hex", &Key::from_hex, py::arg("hex"), py::arg("nbits"))
        .def("__len__", &Key::size)
        .def("bit", &Key::bit, py::arg("i"))
        .def("to_hex", &Key::to_hex)
        .def("__eq__", [](const Key& a, const Key& b) { return a == b; });

    py::enum_<PointKind>(m, "PointKind")
        .value("CONSTANT", PointKind::Constant)
        .value("OPERATION", PointKind::Operation)
        .value("BRANCH", PointKind::Branch);

    py::class_<ObfuscationPoint>(m, "ObfuscationPoint")
        .def_readonly("point_id", &ObfuscationPoint::point_id)
        .def_readonly("kind", &ObfuscationPoint::kind)
        .def_readonly("node_id", &ObfuscationPoint::node_id)
        .def_readonly("alternatives", &ObfuscationPoint::alternatives)
        .def_readonly("key_cost", &ObfuscationPoint::key_cost)
        .def_readonly("forced", &ObfuscationPoint::forced)
        .def("__repr__", [](const ObfuscationPoint& p) {
            return "<point #" + std::to_string(p.point_id) + " " + spelling(p.kind) + " O=" +
                   std::to_string(p.alternatives) + " bits=" + std::to_string(p.key_cost) + ">";
        });

    m.def("find_points",
          [](const minic::Program& p, const std::vector<std::string>& excluded,
             const std::vector<int>& forced, int constant_bits) {
              Constraints c{excluded, forced};
              return find_points(p, c, AnalysisOptions{constant_bits});
          },
          py::arg("program"), py::arg("excluded_functions") = std::vector<std::string>{},
          py::arg("forced_points") = std::vector<int>{}, py::arg("constant_bits") = 32);
    m.def("key_bits", [](const SolutionVector& s, const std::vector<ObfuscationPoint>& pts) {
        return key_bits(s, pts);
    });
    m.def("space_size", [](const std::vector<ObfuscationPoint>& pts) {
        return py::module_::import("builtins").attr("int")(space_size(pts).str());
    });
    m.def("is_feasible", [](const SolutionVector& s, const std::vector<ObfuscationPoint>& pts,
                            int key_length) { return is_feasible(s, pts, key_length); });

    py::class_<LockedProgram>(m, "LockedProgram")
        .def_property_readonly("ast", [](const LockedProgram& l) { return l.ast; })
        .def_readonly("used_bits", &LockedProgram::used_bits)
        .def_property_readonly("alloc", [](const LockedProgram& l) {
            std::vector<std::tuple<int, int, int>> out;
            for (const auto& a : l.alloc) out.emplace_back(a.point_id, a.offset, a.length);
            return out;
        })
        .def("emit_source", [](const LockedProgram& l) { return minic::emit_source(l.ast); });

    m.def("apply_locking",
          [](const minic::Program& p, const std::vector<ObfuscationPoint>& pts,
             const SolutionVector& s, const Key& key) { return apply_locking(p, pts, s, key); },
          py::arg("program"), py::arg("points"), py::arg("solution"), py::arg("key"));

    m.def("run",
          [](const minic::Program& p, const std::vector<std::vector<uint32_t>>& input,
             const std::optional<Key>& key, long step_budget) {
              sim::OutputBits out = sim::run(p, sim::InputVector{input}, key, step_budget);
              return py::make_tuple(out.bits, sim::spelling(out.status));
          },
          py::arg("program"), py::arg("input"), py::arg("key") = std::nullopt,
          py::arg("step_budget") = sim::kDefaultStepBudget,
          "Returns (bits, status): output bits and one of normal/div_by_zero/"
          "step_budget_exceeded.");
    m.def("random_inputs",
          [](const minic::Program& p, int count, uint64_t seed) {
              PyTests out;
              for (auto& iv : sim::random_inputs(p, count, seed)) out.push_back(iv.values);
              return out;
          },
          py::arg("program"), py::arg("count"), py::arg("seed"));

    py::class_<EntropyReport>(m, "EntropyReport")
        .def_readonly("p", &EntropyReport::p)
        .def_readonly("h", &EntropyReport::h)
        .def_readonly("runs", &EntropyReport::runs)
        .def_readonly("div_by_zero_runs", &EntropyReport::div_by_zero_runs)
        .def_readonly("budget_exceeded_runs", &EntropyReport::budget_exceeded_runs);

    m.def("binary_entropy", &binary_entropy, py::arg("p"));
    m.def("differential_entropy", &differential_entropy, py::arg("p"));
    m.def("make_wrong_keys", &make_wrong_keys, py::arg("correct"), py::arg("count"),
          py::arg("seed"));
    m.def("exhaustive_wrong_keys", &exhaustive_wrong_keys, py::arg("correct"));
    m.def("flip_probabilities",
          [](const minic::Program& original, const LockedProgram& locked, const PyTests& tests,
             const std::vector<Key>& wrong_keys, long step_budget, int jobs) {
              auto inputs = to_inputs(tests);
              auto gold = sim::golden(original, inputs, step_budget);
              return flip_probabilities(locked, inputs, gold, wrong_keys, step_budget, jobs);
          },
          py::arg("original"), py::arg("locked"), py::arg("tests"), py::arg("wrong_keys"),
          py::arg("step_budget") = sim::kDefaultStepBudget, py::arg("jobs") = 1,
          "Golden outputs come from `original` on the same tests.");

    py::class_<DseConfig>(m, "DseConfig")
        .def(py::init<>())
        .def_readwrite("population", &DseConfig::population)
        .def_readwrite("max_generations", &DseConfig::max_generations)
        .def_readwrite("stagnation_limit", &DseConfig::stagnation_limit)
        .def_readwrite("crossover_prob", &DseConfig::crossover_prob)
        .def_readwrite("mutation_prob", &DseConfig::mutation_prob)
        .def_readwrite("element_mutation_prob", &DseConfig::element_mutation_prob)
        .def_readwrite("elite_count", &DseConfig::elite_count)
        .def_readwrite("tournament_size", &DseConfig::tournament_size)
        .def_readwrite("seed", &DseConfig::seed)
        .def_readwrite("jobs", &DseConfig::jobs)
        .def_readwrite("epsilon", &DseConfig::epsilon);

    py::class_<GenerationStats>(m, "GenerationStats")
        .def_readonly("generation", &GenerationStats::generation)
        .def_readonly("best_h", &GenerationStats::best_h)
        .def_readonly("mean_h", &GenerationStats::mean_h)
        .def_readonly("std_h", &GenerationStats::std_h)
        .def_readonly("evaluations", &GenerationStats::evaluations)
        .def_readonly("best_key_bits", &GenerationStats::best_key_bits);

    py::class_<ScoredSolution>(m, "ScoredSolution")
        .def_readonly("solution", &ScoredSolution::solution)
        .def_readonly("h", &ScoredSolution::h)
        .def_readonly("key_bits", &ScoredSolution::key_bits);

    py::class_<ExploreResult>(m, "ExploreResult")
        .def_readonly("best", &ExploreResult::best)
        .def_readonly("best_h", &ExploreResult::best_h)
        .def_readonly("band", &ExploreResult::band)
        .def_readonly("trace", &ExploreResult::trace)
        .def_readonly("evaluations", &ExploreResult::evaluations);

    py::class_<OwningContext>(m, "Context")
        .def(py::init<const minic::Program&, std::vector<ObfuscationPoint>, const Key&,
                      const PyTests&, const std::vector<Key>&, long, int>(),
             py::arg("program"), py::arg("points"), py::arg("key"), py::arg("tests"),
             py::arg("wrong_keys"), py::arg("step_budget") = sim::kDefaultStepBudget,
             py::arg("jobs") = 1)
        .def("evaluate", [](OwningContext& c, const SolutionVector& s) { return c.ctx.evaluate(s); })
        .def("evaluate_full",
             [](OwningContext& c, const SolutionVector& s) { return c.ctx.evaluate_full(s); })
        .def("ga_explore",
             [](OwningContext& c, const DseConfig& cfg) { return ga_explore(c.ctx, cfg); },
             py::arg("config") = DseConfig{})
        .def("random_search",
             [](OwningContext& c, long budget, uint64_t seed, double epsilon) {
                 return random_search(c.ctx, budget, seed, epsilon);
             },
             py::arg("budget_evals"), py::arg("seed"), py::arg("epsilon") = 0.02)
        .def("evaluate_single", [](OwningContext& c, const SolutionVector& s, double epsilon) {
                 return evaluate_single(c.ctx, s, epsilon);
             },
             py::arg("solution"), py::arg("epsilon") = 0.02);

    m.def("tao_baseline",
          [](const std::vector<ObfuscationPoint>& pts, int key_length) {
              return tao_baseline(pts, key_length);
          },
          py::arg("points"), py::arg("key_length"));

    py::class_<CostModel>(m, "CostModel")
        .def(py::init<>())
        .def_readwrite("add_sub", &CostModel::add_sub)
        .def_readwrite("mul", &CostModel::mul)
        .def_readwrite("div", &CostModel::div)
        .def_readwrite("bitwise", &CostModel::bitwise)
        .def_readwrite("compare", &CostModel::compare)
        .def_readwrite("select", &CostModel::select)
        .def_readwrite("xor_per_key_bit", &CostModel::xor_per_key_bit)
        .def_readwrite("register_per_key_bit", &CostModel::register_per_key_bit);

    py::class_<CostEstimate>(m, "CostEstimate")
        .def_readonly("total", &CostEstimate::total)
        .def_readonly("breakdown", &CostEstimate::breakdown)
        .def_readonly("key_bits", &CostEstimate::key_bits);

    m.def("estimate_cost",
          [](const LockedProgram& locked, const CostModel& model) {
              return estimate_cost(locked, model);
          },
          py::arg("locked"), py::arg("model") = CostModel{});

    m.attr("__version__") = "0.1.0";
}
