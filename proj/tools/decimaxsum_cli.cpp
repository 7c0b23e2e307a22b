// decimaxsum: instance generation, single solves, sweeps and aggregation.
//
//   decimaxsum gen --side 10 --seed 7 --out grid.json
//   decimaxsum solve --algo maxsum --problem grid.json --seed 1
//   decimaxsum bench --config sweep.json --out csv > runs.csv
//   decimaxsum aggregate --in runs.csv --out summary.csv

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "decimaxsum/harness.hpp"
#include "decimaxsum/ising.hpp"
#include "decimaxsum/numeric_text.hpp"
#include "decimaxsum/problem_io.hpp"
#include "decimaxsum/variants.hpp"
#include "json.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DCOP solving with Max-Sum and decimation"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a toroidal Ising instance");
    dms::IsingParams ising;
    std::string gen_out;
    gen->add_option("--side", ising.side, "grid side length")->default_val(10);
    gen->add_option("--beta", ising.beta, "coupling bound")->default_val(1.6);
    gen->add_option("--unary-bound", ising.unary_bound, "unary bias bound")->default_val(0.05);
    gen->add_option("--seed", ising.seed, "generator seed")->default_val(0);
    gen->add_option("--out", gen_out, "output file (stdout if omitted)");

    auto* solve = app.add_subcommand("solve", "solve one problem file");
    std::string algo, problem_path, trace_path;
    std::uint64_t seed = 0;
    dms::EngineConfig engine;
    bool no_suppression = false;
    solve->add_option("--algo", algo, "maxsum | maxsum_ad | maxsum_ad_vp | montanari | mooij | decimaxsum:<policy>")
        ->required();
    solve->add_option("--problem", problem_path, "problem file")->required();
    solve->add_option("--seed", seed, "run seed")->default_val(0);
    solve->add_option("--limit", engine.limit, "iteration limit")->default_val(1000);
    solve->add_option("--eps", engine.eps, "convergence tolerance")->default_val(1e-6);
    solve->add_option("--trace", trace_path, "write per-iteration JSON lines to this file ('-' for stderr)");
    solve->add_flag("--no-suppression", no_suppression, "count every computed message");

    auto* bench = app.add_subcommand("bench", "run an experiment sweep");
    std::string config_path, bench_format = "csv", bench_output, aggregate_output;
    bool no_timing = false;
    bench->add_option("--config", config_path, "experiment config (JSON)")->required();
    bench->add_option("--out", bench_format, "output format")->check(CLI::IsMember({"csv", "json"}));
    bench->add_option("--output", bench_output, "output file (stdout if omitted)");
    bench->add_option("--aggregate", aggregate_output, "also write per-setting means to this file");
    bench->add_flag("--no-timing", no_timing, "omit wall time so output is reproducible byte for byte");

    auto* agg = app.add_subcommand("aggregate", "average a run table per algorithm and side");
    std::string agg_in, agg_out;
    agg->add_option("--in", agg_in, "run table CSV")->required();
    agg->add_option("--out", agg_out, "aggregate CSV (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            write_output(gen_out, dms::serialize_dcop(dms::generate_ising(ising)));
        } else if (*solve) {
            const auto spec = dms::parse_algorithm(algo);
            const auto dcop = dms::load_dcop(problem_path);
            engine.suppression = !no_suppression;
            std::ofstream trace_file;
            if (trace_path == "-") {
                engine.trace = &std::cerr;
            } else if (!trace_path.empty()) {
                trace_file.open(trace_path);
                if (!trace_file) throw std::runtime_error("cannot write " + trace_path);
                engine.trace = &trace_file;
            }
            const auto result = dms::run_algorithm(spec, dcop, engine, seed);
            nlohmann::ordered_json out;
            out["algorithm"] = spec.selector();
            out["final_cost"] = result.cost();
            out["utility"] = result.utility;
            out["msgs_sent"] = result.stats.msgs_sent;
            out["iterations"] = result.stats.iterations;
            out["decimations"] = result.stats.decimations;
            out["assignment"] = result.assignment.values();
            std::cout << out.dump() << '\n';
        } else if (*bench) {
            const auto cfg = dms::ExperimentConfig::from_json(read_file(config_path));
            const auto rows = dms::run_experiment(cfg);
            const auto format = dms::parse_format(bench_format);
            write_output(bench_output, dms::emit_results(rows, format, !no_timing));
            if (!aggregate_output.empty()) {
                write_output(aggregate_output, dms::emit_aggregate(dms::aggregate(rows), format));
            }
        } else if (*agg) {
            const auto rows = dms::parse_results_csv(read_file(agg_in));
            write_output(agg_out, dms::emit_aggregate(dms::aggregate(rows), dms::OutputFormat::Csv));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
