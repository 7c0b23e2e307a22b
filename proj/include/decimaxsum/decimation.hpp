#pragma once

// Decimation policies and the decimation loop.
//
// A policy picks when to decimate (trigger), which variables are candidates
// (filter), which candidates are decimated (perform) and what value each one is
// fixed to (assign). Every trigger x filter x perform x assign combination is
// runnable.
//
// Max-Sum marginals are utilities. Wherever a distribution is needed (entropy,
// normalized marginal, sampling) the marginal goes through a temperature-1
// softmax.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "decimaxsum/dcop.hpp"
#include "decimaxsum/engine.hpp"
#include "decimaxsum/rng.hpp"

namespace dms {

inline constexpr std::size_t kDefaultFallback = 100;

/// Fires on quiescence, or once `fallback` rounds passed since the last decimation.
struct ConvergeTrigger {
    std::optional<double> eps;  // overrides the engine eps for the run when set
    std::size_t fallback = kDefaultFallback;

    friend bool operator==(const ConvergeTrigger&, const ConvergeTrigger&) = default;
};

/// Fires LIMIT rounds after the last decimation.
struct TimeLimitTrigger {
    std::size_t limit = 1000;

    friend bool operator==(const TimeLimitTrigger&, const TimeLimitTrigger&) = default;
};

struct FrequencySpec {
    enum class Kind { Rate, Budget, Decreasing };

    Kind kind = Kind::Rate;
    std::size_t rate = 1;    // Rate: period
    std::size_t budget = 0;  // Budget: period is floor(budget / |X|), at least 1
    std::size_t cap = 0;     // Decreasing: period ceiling, 0 = uncapped

    static FrequencySpec every(std::size_t rate) { return {Kind::Rate, rate, 0, 0}; }
    static FrequencySpec with_budget(std::size_t budget) { return {Kind::Budget, 1, budget, 0}; }
    static FrequencySpec decreasing(std::size_t cap = 0) { return {Kind::Decreasing, 1, 0, cap}; }

    friend bool operator==(const FrequencySpec&, const FrequencySpec&) = default;
};

using TriggerPolicy = std::variant<ConvergeTrigger, TimeLimitTrigger, FrequencySpec>;

enum class FilterPolicy { All, Neighbors };

struct MaxRand {
    friend bool operator==(const MaxRand&, const MaxRand&) = default;
};
struct MaxEntropy {
    friend bool operator==(const MaxEntropy&, const MaxEntropy&) = default;
};
struct MaxMarginal {
    friend bool operator==(const MaxMarginal&, const MaxMarginal&) = default;
};
struct ThresholdEntropy {
    double threshold = 0.0;
    friend bool operator==(const ThresholdEntropy&, const ThresholdEntropy&) = default;
};

using PerformPolicy = std::variant<MaxRand, MaxEntropy, MaxMarginal, ThresholdEntropy>;

enum class AssignPolicy { MaxMarginal, Sample };

/// Which end of the entropy order max_entropy picks. `Max` is the literal rule.
enum class EntropyOrder { Max, Min };

struct DecimationPolicy {
    TriggerPolicy trigger = ConvergeTrigger{};
    FilterPolicy filter = FilterPolicy::All;
    PerformPolicy perform = MaxEntropy{};
    AssignPolicy assign = AssignPolicy::MaxMarginal;
    EntropyOrder entropy_order = EntropyOrder::Max;

    void validate(std::size_t num_variables = 0) const;

    friend bool operator==(const DecimationPolicy&, const DecimationPolicy&) = default;
};

/// Parses `trigger=...; filter=...; perform=...; assign=...[; entropy-order=max|min]`.
/// Case-insensitive; unknown keys, missing slots and malformed values throw
/// std::invalid_argument.
DecimationPolicy parse_policy(std::string_view text);

/// Canonical policy string; parse_policy(format_policy(p)) == p.
std::string format_policy(const DecimationPolicy& policy);

// Triggers --------------------------------------------------------------------

bool trigger_converge(const EngineState& state, const ConvergeTrigger& spec);
bool trigger_time_limit(const EngineState& state, const TimeLimitTrigger& spec);

/// Period of a frequency trigger in the current state.
std::size_t frequency_period(const EngineState& state, const FrequencySpec& spec);
bool trigger_frequency(const EngineState& state, const FrequencySpec& spec);

bool should_trigger(const EngineState& state, const TriggerPolicy& trigger);

// Filters ---------------------------------------------------------------------

std::vector<VarIndex> filter_all(const EngineState& state);

/// Non-decimated variables sharing a factor of `fg` with a decimated one. Falls
/// back to filter_all when that set is empty.
std::vector<VarIndex> filter_neighbors(const EngineState& state, const FactorGraph& fg);

// Perform ---------------------------------------------------------------------

std::vector<double> softmax(std::span<const double> z);

/// Shannon entropy (nats) of softmax(z), with 0 ln 0 = 0.
double entropy_of_marginal(std::span<const double> z);

VarIndex perform_max_rand(std::span<const VarIndex> candidates, RngStream& rng);
VarIndex perform_max_entropy(std::span<const VarIndex> candidates, const EngineState& state,
                             EntropyOrder order = EntropyOrder::Max);
VarIndex perform_max_marginal(std::span<const VarIndex> candidates, const EngineState& state);

/// Candidates whose entropy exceeds `threshold`, before any fallback.
std::vector<VarIndex> threshold_entropy_selection(std::span<const VarIndex> candidates,
                                                  const EngineState& state, double threshold);
/// As above; an empty selection falls back to the max-entropy candidate.
std::vector<VarIndex> perform_threshold_entropy(std::span<const VarIndex> candidates,
                                                const EngineState& state, double threshold);

/// Dispatches on the perform slot; result is sorted ascending.
std::vector<VarIndex> perform(const DecimationPolicy& policy, std::span<const VarIndex> candidates,
                              const EngineState& state, RngStream& rng);

// Assign ----------------------------------------------------------------------

std::size_t assign_max_marginal(VarIndex var, const EngineState& state);
std::size_t assign_sample_marginal(VarIndex var, const EngineState& state, RngStream& rng);

// Graph simplification ----------------------------------------------------------

/// Fixes `var = value`: slices every factor touching it, drops its edges and
/// their messages. Sliced-empty factors stay as scalars.
void apply_decimation(EngineState& state, VarIndex var, std::size_t value);

/// Utility of the fixed part: scalar factors of the working graph.
double scalar_utility(const EngineState& state);

// Loop ------------------------------------------------------------------------

SolveResult run_decimaxsum(const Dcop& dcop, const DecimationPolicy& policy, const EngineConfig& cfg,
                           std::uint64_t seed);

}  // namespace dms
