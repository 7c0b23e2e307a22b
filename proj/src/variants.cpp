#include "decimaxsum/variants.hpp"

#include <algorithm>
#include <stdexcept>

namespace dms {

void AdConfig::validate(const Dcop& dcop) const {
    if (vp_start_phase < 2) throw std::invalid_argument("vp_start_phase must be >= 2");
    if (node_order.empty()) return;
    (void)node_positions(dcop, node_order);
}

std::vector<NodeRef> default_node_order(const Dcop& dcop) {
    std::vector<std::vector<FactorIndex>> before(dcop.num_variables()), after(dcop.num_variables());
    std::vector<NodeRef> order;
    for (const auto& f : dcop.factors) {
        if (f.scope.empty()) {
            order.push_back({NodeKind::Factor, f.id});  // scalars touch nothing; keep them first
            continue;
        }
        const VarIndex low = *std::min_element(f.scope.begin(), f.scope.end());
        (f.scope.size() == 1 ? before : after)[low].push_back(f.id);
    }
    for (VarIndex v = 0; v < dcop.num_variables(); ++v) {
        for (FactorIndex f : before[v]) order.push_back({NodeKind::Factor, f});
        order.push_back({NodeKind::Variable, v});
        for (FactorIndex f : after[v]) order.push_back({NodeKind::Factor, f});
    }
    return order;
}

std::vector<NodeRef> creation_node_order(const Dcop& dcop) {
    std::vector<NodeRef> order;
    for (VarIndex v = 0; v < dcop.num_variables(); ++v) order.push_back({NodeKind::Variable, v});
    for (FactorIndex f = 0; f < dcop.factors.size(); ++f) order.push_back({NodeKind::Factor, f});
    return order;
}

NodePositions node_positions(const Dcop& dcop, const std::vector<NodeRef>& order) {
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    NodePositions pos{std::vector<std::size_t>(dcop.num_variables(), unset),
                      std::vector<std::size_t>(dcop.factors.size(), unset)};
    if (order.size() != pos.variable.size() + pos.factor.size()) {
        throw std::invalid_argument("node_order must list every variable and factor exactly once");
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto& table = order[k].kind == NodeKind::Variable ? pos.variable : pos.factor;
        if (order[k].index >= table.size() || table[order[k].index] != unset) {
            throw std::invalid_argument("node_order is not a permutation of the graph nodes");
        }
        table[order[k].index] = k;
    }
    return pos;
}

bool ad_allows(const NodePositions& pos, FactorIndex factor, VarIndex var, Direction dir, bool forward) {
    const std::size_t pv = pos.variable[var];
    const std::size_t pf = pos.factor[factor];
    const bool low_to_high = dir == Direction::ToFactor ? pv < pf : pf < pv;
    return low_to_high == forward;
}

namespace {

SolveResult finish(const Dcop& dcop, const EngineState& state) {
    SolveResult result;
    result.assignment = decode(state);
    result.utility = total_utility(dcop, result.assignment);
    result.stats.msgs_sent = state.msgs_sent;
    result.stats.iterations = state.t;
    return result;
}

SolveResult run_alternating(const Dcop& dcop, const EngineConfig& cfg, const AdConfig& ad, bool value_propagation) {
    ad.validate(dcop);
    EngineState state = init_state(dcop, cfg);
    const auto order = ad.node_order.empty() ? default_node_order(dcop) : ad.node_order;
    const NodePositions pos = node_positions(dcop, order);
    const std::size_t phase_length = ad.phase_length > 0 ? ad.phase_length : order.size();

    std::size_t phase = 1;
    std::size_t in_phase = 0;
    std::uint64_t phase_propagated = 0;
    StepOptions options;
    while (state.t < cfg.limit) {
        const bool forward = phase % 2 == 1;
        options.allow = [&state, &pos, forward](FactorIndex f, std::size_t slot, Direction dir) {
            return ad_allows(pos, f, state.factors[f].scope[slot], dir, forward);
        };
        options.attach_values = value_propagation && phase >= ad.vp_start_phase;
        const StepReport report = step(state, cfg, options);
        emit_trace(cfg, state, report);
        phase_propagated += report.propagated;
        if (++in_phase < phase_length) continue;
        if (phase_propagated == 0) break;
        ++phase;
        in_phase = 0;
        phase_propagated = 0;
        clear_attachments(state);
    }
    return finish(dcop, state);
}

}  // namespace

SolveResult run_max_sum(const Dcop& dcop, const EngineConfig& cfg) {
    EngineState state = init_state(dcop, cfg);
    while (state.t < cfg.limit) {
        const StepReport report = step(state, cfg);
        emit_trace(cfg, state, report);
        if (has_converged(state)) break;
    }
    return finish(dcop, state);
}

SolveResult run_max_sum_ad(const Dcop& dcop, const EngineConfig& cfg, const AdConfig& ad) {
    return run_alternating(dcop, cfg, ad, false);
}

SolveResult run_max_sum_ad_vp(const Dcop& dcop, const EngineConfig& cfg, const AdConfig& ad) {
    return run_alternating(dcop, cfg, ad, true);
}

DecimationPolicy preset_montanari() {
    DecimationPolicy p;
    p.trigger = ConvergeTrigger{};
    p.filter = FilterPolicy::All;
    p.perform = MaxRand{};
    p.assign = AssignPolicy::Sample;
    return p;
}

DecimationPolicy preset_mooij() {
    DecimationPolicy p;
    p.trigger = ConvergeTrigger{};
    p.filter = FilterPolicy::All;
    p.perform = MaxEntropy{};
    p.assign = AssignPolicy::MaxMarginal;
    return p;
}

std::string AlgorithmSpec::selector() const {
    switch (kind) {
        case AlgorithmKind::MaxSum: return "maxsum";
        case AlgorithmKind::MaxSumAd: return "maxsum_ad";
        case AlgorithmKind::MaxSumAdVp: return "maxsum_ad_vp";
        case AlgorithmKind::Montanari: return "montanari";
        case AlgorithmKind::Mooij: return "mooij";
        case AlgorithmKind::DeciMaxSum: return "decimaxsum:" + format_policy(policy);
    }
    return {};
}

AlgorithmSpec parse_algorithm(std::string_view selector) {
    std::string s(selector);
    const auto colon = s.find(':');
    std::string head = s.substr(0, colon);
    std::transform(head.begin(), head.end(), head.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    head.erase(0, head.find_first_not_of(" \t"));
    head.erase(head.find_last_not_of(" \t") + 1);

    AlgorithmSpec spec;
    if (head == "decimaxsum") {
        if (colon == std::string::npos) throw std::invalid_argument("decimaxsum selector needs a policy string");
        spec.kind = AlgorithmKind::DeciMaxSum;
        spec.policy = parse_policy(std::string_view(s).substr(colon + 1));
        return spec;
    }
    if (colon != std::string::npos) throw std::invalid_argument("unexpected arguments in selector \"" + s + "\"");
    if (head == "maxsum") {
        spec.kind = AlgorithmKind::MaxSum;
    } else if (head == "maxsum_ad") {
        spec.kind = AlgorithmKind::MaxSumAd;
    } else if (head == "maxsum_ad_vp") {
        spec.kind = AlgorithmKind::MaxSumAdVp;
    } else if (head == "montanari") {
        spec.kind = AlgorithmKind::Montanari;
        spec.policy = preset_montanari();
    } else if (head == "mooij") {
        spec.kind = AlgorithmKind::Mooij;
        spec.policy = preset_mooij();
    } else {
        throw std::invalid_argument("unknown algorithm \"" + s + "\"");
    }
    return spec;
}

SolveResult run_algorithm(const AlgorithmSpec& algo, const Dcop& dcop, const EngineConfig& cfg,
                          std::uint64_t seed, const AdConfig& ad) {
    switch (algo.kind) {
        case AlgorithmKind::MaxSum: return run_max_sum(dcop, cfg);
        case AlgorithmKind::MaxSumAd: return run_max_sum_ad(dcop, cfg, ad);
        case AlgorithmKind::MaxSumAdVp: return run_max_sum_ad_vp(dcop, cfg, ad);
        case AlgorithmKind::Montanari: return run_decimaxsum(dcop, preset_montanari(), cfg, seed);
        case AlgorithmKind::Mooij: return run_decimaxsum(dcop, preset_mooij(), cfg, seed);
        case AlgorithmKind::DeciMaxSum: return run_decimaxsum(dcop, algo.policy, cfg, seed);
    }
    throw std::logic_error("unhandled algorithm kind");
}

}  // namespace dms
