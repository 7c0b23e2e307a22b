#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "decimaxsum/decimation.hpp"
#include "decimaxsum/harness.hpp"
#include "decimaxsum/ising.hpp"
#include "decimaxsum/problem_io.hpp"
#include "decimaxsum/variants.hpp"

namespace py = pybind11;

namespace {

dms::Assignment to_assignment(const std::vector<std::size_t>& values) {
    dms::Assignment a(values.size());
    for (std::size_t v = 0; v < values.size(); ++v) a.set(v, values[v]);
    return a;
}

py::dict result_dict(const dms::SolveResult& r) {
    py::dict d;
    d["assignment"] = r.assignment.values();
    d["utility"] = r.utility;
    d["final_cost"] = r.cost();
    d["msgs_sent"] = r.stats.msgs_sent;
    d["iterations"] = r.stats.iterations;
    d["decimations"] = r.stats.decimations;
    return d;
}

py::dict metrics_dict(const dms::RunMetrics& m) {
    py::dict d;
    d["algorithm"] = m.algorithm;
    d["side"] = m.side;
    d["problem"] = m.problem;
    d["run"] = m.run;
    d["instance_id"] = m.instance_id;
    d["instance_seed"] = m.instance_seed;
    d["seed"] = m.seed;
    d["final_cost"] = m.final_cost;
    d["msgs_sent"] = m.msgs_sent;
    d["iterations"] = m.iterations;
    d["decimations"] = m.decimations;
    d["wall_ms"] = m.wall_ms;
    return d;
}

dms::EngineConfig engine_config(std::size_t limit, double eps, bool suppression) {
    dms::EngineConfig cfg;
    cfg.limit = limit;
    cfg.eps = eps;
    cfg.suppression = suppression;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Max-Sum and decimation solvers for DCOPs";

    py::register_exception<dms::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<dms::ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<dms::Dcop>(m, "Dcop")
        .def_property_readonly("num_variables", &dms::Dcop::num_variables)
        .def_property_readonly("num_factors", [](const dms::Dcop& d) { return d.factors.size(); })
        .def_property_readonly("minimize", [](const dms::Dcop& d) { return d.sense == dms::Sense::MinimizeCost; })
        .def_property_readonly("domain_sizes", &dms::Dcop::domain_sizes)
        .def("scopes", [](const dms::Dcop& d) {
            std::vector<std::vector<std::size_t>> out;
            for (const auto& f : d.factors) out.push_back(f.scope);
            return out;
        })
        .def("__repr__", [](const dms::Dcop& d) {
            return "<Dcop variables=" + std::to_string(d.num_variables()) +
                   " factors=" + std::to_string(d.factors.size()) + ">";
        });

    m.def("parse_dcop", [](const std::string& text) { return dms::parse_dcop(text); }, py::arg("text"));
    m.def("serialize_dcop", &dms::serialize_dcop, py::arg("dcop"));
    m.def("load_dcop", &dms::load_dcop, py::arg("path"));
    m.def("save_dcop", &dms::save_dcop, py::arg("dcop"), py::arg("path"));

    m.def(
        "generate_ising",
        [](std::size_t side, double beta, double unary_bound, std::uint64_t seed) {
            return dms::generate_ising({side, beta, unary_bound, seed});
        },
        py::arg("side"), py::arg("beta") = 1.6, py::arg("unary_bound") = 0.05, py::arg("seed") = 0);

    m.def(
        "total_utility",
        [](const dms::Dcop& d, const std::vector<std::size_t>& values) {
            return dms::total_utility(d, to_assignment(values));
        },
        py::arg("dcop"), py::arg("assignment"));

    m.def(
        "brute_force_optimum",
        [](const dms::Dcop& d) {
            const auto best = dms::brute_force_optimum(d);
            return py::make_tuple(best.assignment.values(), best.utility);
        },
        py::arg("dcop"));

    m.def(
        "solve",
        [](const dms::Dcop& d, const std::string& algorithm, std::uint64_t seed, std::size_t limit, double eps,
           bool suppression) {
            const auto spec = dms::parse_algorithm(algorithm);
            dms::SolveResult r;
            {
                py::gil_scoped_release release;
                r = dms::run_algorithm(spec, d, engine_config(limit, eps, suppression), seed);
            }
            return result_dict(r);
        },
        py::arg("dcop"), py::arg("algorithm"), py::arg("seed") = 0, py::arg("limit") = 1000,
        py::arg("eps") = 1e-6, py::arg("suppression") = true,
        "Run a selector: maxsum | maxsum_ad | maxsum_ad_vp | montanari | mooij | decimaxsum:<policy>");

    m.def(
        "canonical_policy", [](const std::string& text) { return dms::format_policy(dms::parse_policy(text)); },
        py::arg("policy"));

    m.def("entropy_of_marginal", [](const std::vector<double>& z) { return dms::entropy_of_marginal(z); },
          py::arg("marginal"));

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const auto cfg = dms::ExperimentConfig::from_json(config_json);
            std::vector<dms::RunMetrics> rows;
            {
                py::gil_scoped_release release;
                rows = dms::run_experiment(cfg);
            }
            py::list out;
            for (const auto& r : rows) out.append(metrics_dict(r));
            return out;
        },
        py::arg("config_json"));

    m.def(
        "bench_csv",
        [](const std::string& config_json, bool include_timing) {
            const auto cfg = dms::ExperimentConfig::from_json(config_json);
            py::gil_scoped_release release;
            return dms::emit_results(dms::run_experiment(cfg), dms::OutputFormat::Csv, include_timing);
        },
        py::arg("config_json"), py::arg("include_timing") = false);

    m.def(
        "aggregate_csv",
        [](const std::string& csv) {
            return dms::emit_aggregate(dms::aggregate(dms::parse_results_csv(csv)), dms::OutputFormat::Csv);
        },
        py::arg("csv"));

    m.def("reference_algorithms", &dms::reference_algorithms);
}
