#include "decimaxsum/decimation.hpp"

#include "decimaxsum/numeric_text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dms {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

[[noreturn]] void bad_policy(const std::string& what) { throw std::invalid_argument("policy: " + what); }

std::size_t parse_count(std::string_view s, const char* what) {
    s = trim(s);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        bad_policy(std::string("expected an integer for ") + what + ", got \"" + std::string(s) + "\"");
    }
    return value;
}

double parse_real(std::string_view s, const char* what) {
    s = trim(s);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        bad_policy(std::string("expected a finite number for ") + what + ", got \"" + std::string(s) + "\"");
    }
    return value;
}

TriggerPolicy parse_trigger(std::string_view value) {
    // Separators inside converge's parameter list may be ':' or ','.
    std::string v = lower(value);
    const auto parts = split(v, ':');
    const auto head = trim(parts[0]);
    if (head == "converge" || head.starts_with("converge,")) {
        std::string rest(v.substr(std::string_view("converge").size()));
        std::replace(rest.begin(), rest.end(), ',', ':');
        ConvergeTrigger trig;
        auto args = split(rest, ':');
        if (!args.empty() && trim(args.front()).empty()) args.erase(args.begin());
        if (args.size() > 2) bad_policy("converge takes at most eps and fallback");
        if (!args.empty() && !trim(args[0]).empty()) {
            trig.eps = parse_real(args[0], "converge eps");
            if (!(*trig.eps > 0.0)) bad_policy("converge eps must be > 0");
        }
        if (args.size() == 2) trig.fallback = parse_count(args[1], "converge fallback");
        if (trig.fallback < 1) bad_policy("converge fallback must be >= 1");
        return trig;
    }
    if (head == "time") {
        if (parts.size() != 2) bad_policy("expected time:LIMIT");
        return TimeLimitTrigger{parse_count(parts[1], "time limit")};
    }
    if (head == "freq") {
        if (parts.size() < 2) bad_policy("expected freq:rate:R, freq:budget:B or freq:decreasing");
        const auto kind = trim(parts[1]);
        if (kind == "rate" && parts.size() == 3) return FrequencySpec::every(parse_count(parts[2], "rate"));
        if (kind == "budget" && parts.size() == 3) {
            return FrequencySpec::with_budget(parse_count(parts[2], "budget"));
        }
        if (kind == "decreasing" && parts.size() <= 3) {
            return FrequencySpec::decreasing(parts.size() == 3 ? parse_count(parts[2], "cap") : 0);
        }
        bad_policy("malformed frequency trigger \"" + std::string(value) + "\"");
    }
    bad_policy("unknown trigger \"" + std::string(value) + "\"");
}

PerformPolicy parse_perform(std::string_view value) {
    const std::string v = lower(trim(value));
    if (v == "max_rand") return MaxRand{};
    if (v == "max_entropy") return MaxEntropy{};
    if (v == "max_marginal") return MaxMarginal{};
    if (v.starts_with("threshold_entropy:")) {
        const double t = parse_real(std::string_view(v).substr(18), "threshold");
        return ThresholdEntropy{t};
    }
    bad_policy("unknown perform \"" + std::string(value) + "\"");
}

}  // namespace

void DecimationPolicy::validate(std::size_t num_variables) const {
    std::visit(
        [&](const auto& trig) {
            using T = std::decay_t<decltype(trig)>;
            if constexpr (std::is_same_v<T, ConvergeTrigger>) {
                if (trig.eps && !(*trig.eps > 0.0 && std::isfinite(*trig.eps))) {
                    throw std::invalid_argument("converge eps must be finite and > 0");
                }
                if (trig.fallback < 1) throw std::invalid_argument("converge fallback must be >= 1");
            } else if constexpr (std::is_same_v<T, TimeLimitTrigger>) {
                if (trig.limit < 1) throw std::invalid_argument("time limit must be >= 1");
            } else {
                if (trig.kind == FrequencySpec::Kind::Rate && trig.rate < 1) {
                    throw std::invalid_argument("RATE must be >= 1");
                }
                if (trig.kind == FrequencySpec::Kind::Budget && num_variables > 0 &&
                    trig.budget < num_variables) {
                    throw std::invalid_argument("BUDGET must be >= the number of variables");
                }
            }
        },
        trigger);
    if (const auto* th = std::get_if<ThresholdEntropy>(&perform)) {
        if (!(th->threshold >= 0.0) || !std::isfinite(th->threshold)) {
            throw std::invalid_argument("THRESHOLD must be finite and >= 0");
        }
    }
}

DecimationPolicy parse_policy(std::string_view text) {
    DecimationPolicy policy;
    bool has_trigger = false, has_filter = false, has_perform = false, has_assign = false, has_order = false;
    for (auto item : split(text, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) bad_policy("expected key=value, got \"" + std::string(item) + "\"");
        const std::string key = lower(trim(item.substr(0, eq)));
        const auto value = trim(item.substr(eq + 1));
        const std::string lv = lower(value);
        const auto once = [&](bool& seen) {
            if (seen) bad_policy("duplicate key \"" + key + "\"");
            seen = true;
        };
        if (key == "trigger") {
            once(has_trigger);
            policy.trigger = parse_trigger(value);
        } else if (key == "filter") {
            once(has_filter);
            if (lv == "all") {
                policy.filter = FilterPolicy::All;
            } else if (lv == "neighbors") {
                policy.filter = FilterPolicy::Neighbors;
            } else {
                bad_policy("unknown filter \"" + std::string(value) + "\"");
            }
        } else if (key == "perform") {
            once(has_perform);
            policy.perform = parse_perform(value);
        } else if (key == "assign") {
            once(has_assign);
            if (lv == "max_marginal") {
                policy.assign = AssignPolicy::MaxMarginal;
            } else if (lv == "sample") {
                policy.assign = AssignPolicy::Sample;
            } else {
                bad_policy("unknown assign \"" + std::string(value) + "\"");
            }
        } else if (key == "entropy-order") {
            once(has_order);
            if (lv == "max") {
                policy.entropy_order = EntropyOrder::Max;
            } else if (lv == "min") {
                policy.entropy_order = EntropyOrder::Min;
            } else {
                bad_policy("entropy-order must be max or min");
            }
        } else {
            bad_policy("unknown key \"" + key + "\"");
        }
    }
    if (!has_trigger || !has_filter || !has_perform || !has_assign) {
        bad_policy("trigger, filter, perform and assign are all required");
    }
    policy.validate();
    return policy;
}

std::string format_policy(const DecimationPolicy& policy) {
    std::string out = "trigger=";
    std::visit(
        [&](const auto& trig) {
            using T = std::decay_t<decltype(trig)>;
            if constexpr (std::is_same_v<T, ConvergeTrigger>) {
                out += "converge";
                if (trig.eps || trig.fallback != kDefaultFallback) {
                    out += ":" + (trig.eps ? format_real(*trig.eps) : std::string{}) + ":" +
                           std::to_string(trig.fallback);
                }
            } else if constexpr (std::is_same_v<T, TimeLimitTrigger>) {
                out += "time:" + std::to_string(trig.limit);
            } else {
                switch (trig.kind) {
                    case FrequencySpec::Kind::Rate: out += "freq:rate:" + std::to_string(trig.rate); break;
                    case FrequencySpec::Kind::Budget: out += "freq:budget:" + std::to_string(trig.budget); break;
                    case FrequencySpec::Kind::Decreasing:
                        out += "freq:decreasing";
                        if (trig.cap) out += ":" + std::to_string(trig.cap);
                        break;
                }
            }
        },
        policy.trigger);
    out += policy.filter == FilterPolicy::All ? ";filter=all" : ";filter=neighbors";
    out += ";perform=";
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MaxRand>) out += "max_rand";
            if constexpr (std::is_same_v<T, MaxEntropy>) out += "max_entropy";
            if constexpr (std::is_same_v<T, MaxMarginal>) out += "max_marginal";
            if constexpr (std::is_same_v<T, ThresholdEntropy>) out += "threshold_entropy:" + format_real(p.threshold);
        },
        policy.perform);
    out += policy.assign == AssignPolicy::MaxMarginal ? ";assign=max_marginal" : ";assign=sample";
    if (policy.entropy_order == EntropyOrder::Min) out += ";entropy-order=min";
    return out;
}

bool trigger_converge(const EngineState& state, const ConvergeTrigger& spec) {
    return has_converged(state) || state.t - state.t_last_decimation >= spec.fallback;
}

bool trigger_time_limit(const EngineState& state, const TimeLimitTrigger& spec) {
    return state.t - state.t_last_decimation >= spec.limit;
}

std::size_t frequency_period(const EngineState& state, const FrequencySpec& spec) {
    switch (spec.kind) {
        case FrequencySpec::Kind::Rate: return std::max<std::size_t>(1, spec.rate);
        case FrequencySpec::Kind::Budget:
            return std::max<std::size_t>(1, spec.budget / std::max<std::size_t>(1, state.num_variables()));
        case FrequencySpec::Kind::Decreasing: {
            std::size_t period = 2 * std::max<std::size_t>(1, state.t_last_decimation);
            if (spec.cap > 0) period = std::min(period, spec.cap);
            return period;
        }
    }
    return 1;
}

bool trigger_frequency(const EngineState& state, const FrequencySpec& spec) {
    return state.t >= 1 && state.t % frequency_period(state, spec) == 0;
}

bool should_trigger(const EngineState& state, const TriggerPolicy& trigger) {
    return std::visit(
        [&](const auto& trig) {
            using T = std::decay_t<decltype(trig)>;
            if constexpr (std::is_same_v<T, ConvergeTrigger>) return trigger_converge(state, trig);
            if constexpr (std::is_same_v<T, TimeLimitTrigger>) return trigger_time_limit(state, trig);
            if constexpr (std::is_same_v<T, FrequencySpec>) return trigger_frequency(state, trig);
        },
        trigger);
}

std::vector<VarIndex> filter_all(const EngineState& state) {
    std::vector<VarIndex> out;
    for (VarIndex v = 0; v < state.num_variables(); ++v) {
        if (!state.is_decimated(v)) out.push_back(v);
    }
    return out;
}

std::vector<VarIndex> filter_neighbors(const EngineState& state, const FactorGraph& fg) {
    std::vector<VarIndex> out;
    for (VarIndex v = 0; v < state.num_variables(); ++v) {
        if (state.is_decimated(v)) continue;
        bool adjacent = false;
        for (FactorIndex f : fg.var_neighbors.at(v)) {
            for (VarIndex w : fg.factor_neighbors[f]) {
                if (w != v && state.is_decimated(w)) {
                    adjacent = true;
                    break;
                }
            }
            if (adjacent) break;
        }
        if (adjacent) out.push_back(v);
    }
    return out.empty() ? filter_all(state) : out;
}

std::vector<double> softmax(std::span<const double> z) {
    std::vector<double> p(z.size(), 0.0);
    if (z.empty()) return p;
    const double top = *std::max_element(z.begin(), z.end());
    if (top == -std::numeric_limits<double>::infinity()) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(z.size()));
        return p;
    }
    double total = 0.0;
    for (std::size_t d = 0; d < z.size(); ++d) {
        p[d] = std::exp(z[d] - top);
        total += p[d];
    }
    for (double& x : p) x /= total;
    return p;
}

double entropy_of_marginal(std::span<const double> z) {
    double h = 0.0;
    for (double p : softmax(z)) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

VarIndex perform_max_rand(std::span<const VarIndex> candidates, RngStream& rng) {
    if (candidates.empty()) throw std::invalid_argument("perform: no candidates");
    VarIndex best = candidates[0];
    double best_draw = -1.0;
    for (VarIndex v : candidates) {
        const double draw = rng.uniform();
        if (draw > best_draw || (draw == best_draw && v < best)) {
            best = v;
            best_draw = draw;
        }
    }
    return best;
}

namespace {

/// Candidate with the best score; exact ties go to the lowest id.
template <typename Score, typename Better>
VarIndex select_best(std::span<const VarIndex> candidates, Score score, Better better) {
    if (candidates.empty()) throw std::invalid_argument("perform: no candidates");
    VarIndex best = candidates[0];
    double best_score = score(best);
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const VarIndex v = candidates[k];
        const double s = score(v);
        if (better(s, best_score) || (s == best_score && v < best)) {
            best = v;
            best_score = s;
        }
    }
    return best;
}

double marginal_entropy(const EngineState& state, VarIndex v) {
    return entropy_of_marginal(marginal(state, v));
}

}  // namespace

VarIndex perform_max_entropy(std::span<const VarIndex> candidates, const EngineState& state, EntropyOrder order) {
    const auto score = [&](VarIndex v) { return marginal_entropy(state, v); };
    if (order == EntropyOrder::Max) return select_best(candidates, score, std::greater<double>{});
    return select_best(candidates, score, std::less<double>{});
}

VarIndex perform_max_marginal(std::span<const VarIndex> candidates, const EngineState& state) {
    const auto score = [&](VarIndex v) {
        const auto p = softmax(marginal(state, v));
        return *std::max_element(p.begin(), p.end());
    };
    return select_best(candidates, score, std::greater<double>{});
}

std::vector<VarIndex> threshold_entropy_selection(std::span<const VarIndex> candidates,
                                                  const EngineState& state, double threshold) {
    std::vector<VarIndex> out;
    for (VarIndex v : candidates) {
        if (marginal_entropy(state, v) > threshold) out.push_back(v);
    }
    return out;
}

std::vector<VarIndex> perform_threshold_entropy(std::span<const VarIndex> candidates,
                                                const EngineState& state, double threshold) {
    if (candidates.empty()) throw std::invalid_argument("perform: no candidates");
    auto out = threshold_entropy_selection(candidates, state, threshold);
    if (out.empty()) out.push_back(perform_max_entropy(candidates, state));
    return out;
}

std::vector<VarIndex> perform(const DecimationPolicy& policy, std::span<const VarIndex> candidates,
                              const EngineState& state, RngStream& rng) {
    std::vector<VarIndex> out = std::visit(
        [&](const auto& p) -> std::vector<VarIndex> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MaxRand>) return {perform_max_rand(candidates, rng)};
            if constexpr (std::is_same_v<T, MaxEntropy>) {
                return {perform_max_entropy(candidates, state, policy.entropy_order)};
            }
            if constexpr (std::is_same_v<T, MaxMarginal>) return {perform_max_marginal(candidates, state)};
            if constexpr (std::is_same_v<T, ThresholdEntropy>) {
                return perform_threshold_entropy(candidates, state, p.threshold);
            }
        },
        policy.perform);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t assign_max_marginal(VarIndex var, const EngineState& state) { return argmax(marginal(state, var)); }

std::size_t assign_sample_marginal(VarIndex var, const EngineState& state, RngStream& rng) {
    const auto p = softmax(marginal(state, var));
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t d = 0; d < p.size(); ++d) {
        if (p[d] <= 0.0) continue;
        cumulative += p[d];
        last_positive = d;
        if (u < cumulative) return d;
    }
    return last_positive;
}

void apply_decimation(EngineState& state, VarIndex var, std::size_t value) {
    if (var >= state.num_variables()) throw std::out_of_range("unknown variable " + std::to_string(var));
    if (state.is_decimated(var)) throw std::invalid_argument("variable " + std::to_string(var) + " already decimated");
    if (value >= state.domain_sizes[var]) throw std::out_of_range("value outside domain");

    for (const auto& edge : state.var_edges[var]) {
        auto& factor = state.factors[edge.factor];
        factor = slice_factor(factor, state.domain_sizes, var, value);
        const auto at = static_cast<std::ptrdiff_t>(edge.slot);
        state.to_factor[edge.factor].erase(state.to_factor[edge.factor].begin() + at);
        state.to_variable[edge.factor].erase(state.to_variable[edge.factor].begin() + at);
    }
    state.fixed[var] = value;
    state.t_last_decimation = state.t;

    for (auto& edges : state.var_edges) edges.clear();
    for (const auto& f : state.factors) {
        for (std::size_t slot = 0; slot < f.scope.size(); ++slot) state.var_edges[f.scope[slot]].push_back({f.id, slot});
    }
}

double scalar_utility(const EngineState& state) {
    double sum = 0.0;
    for (const auto& f : state.factors) {
        if (f.is_scalar()) sum += f.table.front();
    }
    return sum;
}

SolveResult run_decimaxsum(const Dcop& dcop, const DecimationPolicy& policy, const EngineConfig& cfg,
                           std::uint64_t seed) {
    policy.validate(dcop.num_variables());
    EngineConfig engine_cfg = cfg;
    DecimationPolicy active = policy;
    if (const auto* conv = std::get_if<ConvergeTrigger>(&active.trigger); conv && conv->eps) {
        engine_cfg.eps = *conv->eps;
    }
    if (auto* freq = std::get_if<FrequencySpec>(&active.trigger);
        freq && freq->kind == FrequencySpec::Kind::Decreasing && freq->cap == 0) {
        freq->cap = cfg.limit;
    }

    EngineState state = init_state(dcop, engine_cfg);
    const FactorGraph fg = build_factor_graph(dcop);
    RngStream rng(seed);
    SolveResult result;
    std::vector<std::pair<VarIndex, std::size_t>> batch;

    while (state.num_decimated() < dcop.num_variables()) {
        const StepReport report = step(state, engine_cfg);
        batch.clear();
        if (should_trigger(state, active.trigger)) {
            const auto candidates =
                active.filter == FilterPolicy::All ? filter_all(state) : filter_neighbors(state, fg);
            // Values are chosen from the marginals at trigger time, then applied in id order.
            for (VarIndex v : perform(active, candidates, state, rng)) {
                const std::size_t value = active.assign == AssignPolicy::MaxMarginal
                                              ? assign_max_marginal(v, state)
                                              : assign_sample_marginal(v, state, rng);
                batch.emplace_back(v, value);
            }
            for (const auto& [v, value] : batch) apply_decimation(state, v, value);
            result.stats.decimations += batch.size();
        }
        emit_trace(engine_cfg, state, report, batch);
    }

    result.assignment = decode(state);
    result.utility = total_utility(dcop, result.assignment);
    result.stats.msgs_sent = state.msgs_sent;
    result.stats.iterations = state.t;
    return result;
}

}  // namespace dms
