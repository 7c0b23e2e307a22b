#pragma once

// Experiment sweeps over algorithms x grid sides x problems x runs on Ising
// instances, with CSV/JSON output and the two-level averaging (runs within a
// problem, then problems within a setting).
//
// Seeds are pure functions of the coordinates, so any cell can be rerun alone:
//   instance seed = derive_seed(base, side, problem)
//   run seed      = derive_seed(base, side, problem, run)
// Every algorithm sees the same instance and run seed within a cell.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "decimaxsum/engine.hpp"
#include "decimaxsum/variants.hpp"

namespace dms {

struct ExperimentConfig {
    std::vector<std::string> algorithms;
    std::vector<std::size_t> sides;
    std::size_t problems_per_setting = 10;
    std::size_t runs_per_problem = 3;
    std::uint64_t base_seed = 0;
    double beta = 1.6;
    double unary_bound = 0.05;
    EngineConfig engine;
    std::size_t threads = 1;

    void validate() const;
    std::size_t cell_count() const;

    /// Strict: unknown keys are errors.
    static ExperimentConfig from_json(std::string_view text);
};

struct RunMetrics {
    std::string algorithm;
    std::size_t side = 0;
    std::size_t problem = 0;
    std::size_t run = 0;
    std::string instance_id;
    std::uint64_t instance_seed = 0;
    std::uint64_t seed = 0;
    double final_cost = 0.0;
    std::uint64_t msgs_sent = 0;
    std::size_t iterations = 0;
    std::size_t decimations = 0;
    double wall_ms = 0.0;
};

std::uint64_t instance_seed(std::uint64_t base, std::size_t side, std::size_t problem);
std::uint64_t run_seed(std::uint64_t base, std::size_t side, std::size_t problem, std::size_t run);

/// One cell of the sweep.
RunMetrics run_cell(const ExperimentConfig& cfg, const std::string& algorithm, std::size_t side,
                    std::size_t problem, std::size_t run);

/// Rows ordered by (side, problem, run, algorithm position), whatever the thread count.
std::vector<RunMetrics> run_experiment(const ExperimentConfig& cfg);

enum class OutputFormat { Csv, Json };
OutputFormat parse_format(std::string_view name);

/// One row per run. Without timing the output is a pure function of the config.
std::string emit_results(const std::vector<RunMetrics>& rows, OutputFormat format, bool include_timing = true);

std::vector<RunMetrics> parse_results_csv(std::string_view text);

struct AggregateRow {
    std::string algorithm;
    std::size_t side = 0;
    std::size_t problems = 0;
    double mean_final_cost = 0.0;
    double mean_msgs_sent = 0.0;
    double mean_iterations = 0.0;
    double mean_decimations = 0.0;
};

/// Mean over runs of each problem, then over problems; one row per
/// (algorithm, side) in order of first appearance.
std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& rows);

std::string emit_aggregate(const std::vector<AggregateRow>& rows, OutputFormat format);

/// 11 DeciMaxSum configurations plus the five baselines. The DeciMaxSum
/// entries are a reconstruction over the trigger x perform x assign axes.
std::vector<std::string> reference_algorithms();

}  // namespace dms
