#pragma once

// Baselines and literature presets: plain Max-Sum, alternating-direction
// Max-Sum (AD), AD with value propagation (AD_VP), and the Montanari and Mooij
// decimation presets. Algorithms are addressed by selector strings:
//   maxsum | maxsum_ad | maxsum_ad_vp | montanari | mooij | decimaxsum:<policy>

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "decimaxsum/decimation.hpp"
#include "decimaxsum/engine.hpp"

namespace dms {

/// Alternating-direction schedule. Messages flow from lower to higher position
/// in `node_order` during odd phases and the other way during even phases.
struct AdConfig {
    std::size_t phase_length = 0;     // 0: number of graph nodes
    std::vector<NodeRef> node_order;  // empty: default_node_order()
    std::size_t vp_start_phase = 3;

    void validate(const Dcop& dcop) const;
};

/// Variables in id order, each factor placed next to the lowest variable of its
/// scope: unary factors right before it, larger factors right after it.
std::vector<NodeRef> default_node_order(const Dcop& dcop);

/// Variables then factors, both in id order.
std::vector<NodeRef> creation_node_order(const Dcop& dcop);

/// Positions of every node in `order`, split by kind.
struct NodePositions {
    std::vector<std::size_t> variable;
    std::vector<std::size_t> factor;
};
NodePositions node_positions(const Dcop& dcop, const std::vector<NodeRef>& order);

/// Whether the AD schedule lets a message cross edge (factor, var) this phase.
bool ad_allows(const NodePositions& pos, FactorIndex factor, VarIndex var, Direction dir, bool forward);

SolveResult run_max_sum(const Dcop& dcop, const EngineConfig& cfg);
SolveResult run_max_sum_ad(const Dcop& dcop, const EngineConfig& cfg, const AdConfig& ad = {});
SolveResult run_max_sum_ad_vp(const Dcop& dcop, const EngineConfig& cfg, const AdConfig& ad = {});

DecimationPolicy preset_montanari();
DecimationPolicy preset_mooij();

enum class AlgorithmKind { MaxSum, MaxSumAd, MaxSumAdVp, Montanari, Mooij, DeciMaxSum };

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::MaxSum;
    DecimationPolicy policy;  // DeciMaxSum only

    std::string selector() const;
};

/// Case-insensitive; throws std::invalid_argument on unknown selectors.
AlgorithmSpec parse_algorithm(std::string_view selector);

SolveResult run_algorithm(const AlgorithmSpec& algo, const Dcop& dcop, const EngineConfig& cfg,
                          std::uint64_t seed, const AdConfig& ad = {});

}  // namespace dms
