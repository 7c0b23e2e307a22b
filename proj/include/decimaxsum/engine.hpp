#pragma once

// Synchronous Max-Sum kernel.
//
// One round (step) first recomputes every variable->factor message from the
// factor->variable messages of the previous round, then every factor->variable
// message from the fresh variable->factor messages. Messages live per factor
// scope slot, so slicing a factor only has to erase one slot.
//
// Suppression is an accounting rule: a recomputed message within eps of the
// last one counted on that edge is not counted as propagated. Receivers always
// see the recomputed payload, so trajectories are identical with suppression on
// or off and only msgs_sent differs.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "decimaxsum/dcop.hpp"

namespace dms {

enum class Normalization { Mean, Max, None };

struct EngineConfig {
    double eps = 1e-6;
    std::size_t limit = 1000;
    Normalization normalization = Normalization::Mean;
    bool suppression = true;
    std::ostream* trace = nullptr;  // JSON lines, one per round

    void validate() const;
};

enum class NodeKind { Variable, Factor };

struct NodeRef {
    NodeKind kind = NodeKind::Variable;
    std::size_t index = 0;

    friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

struct Message {
    NodeRef sender;
    NodeRef receiver;
    std::vector<double> payload;
};

enum class Direction { ToFactor, ToVariable };

struct EdgeSlot {
    FactorIndex factor = 0;
    std::size_t slot = 0;
};

struct EdgeMessage {
    std::vector<double> current;    // what the receiver uses
    std::vector<double> last_sent;  // last payload counted as propagated
    bool ever_sent = false;
    std::optional<std::size_t> attached;       // value propagation tag
    std::optional<std::size_t> last_attached;  // tag of the last counted message
};

struct EngineState {
    std::vector<std::size_t> domain_sizes;
    std::vector<Factor> factors;                     // working copies, sliced on decimation
    std::vector<std::vector<EdgeSlot>> var_edges;    // active adjacency
    std::vector<std::vector<EdgeMessage>> to_factor;    // [factor][slot]
    std::vector<std::vector<EdgeMessage>> to_variable;  // [factor][slot]
    std::vector<std::optional<std::size_t>> fixed;   // decimated set U and its values
    std::size_t t = 0;
    std::size_t t_last_decimation = 0;
    std::uint64_t msgs_sent = 0;
    std::uint64_t last_propagated = 0;
    double last_max_change = 0.0;

    std::size_t num_variables() const { return domain_sizes.size(); }
    bool is_decimated(VarIndex v) const { return fixed.at(v).has_value(); }
    std::size_t num_decimated() const;
    std::size_t directed_edge_count() const;
    std::size_t slot_of(FactorIndex f, VarIndex v) const;
};

struct StepOptions {
    /// Which directed messages may be recomputed this round; empty means all.
    std::function<bool(FactorIndex, std::size_t, Direction)> allow;
    /// Tag each variable->factor message with the sender's current argmax.
    bool attach_values = false;
};

struct StepReport {
    std::uint64_t computed = 0;
    std::uint64_t propagated = 0;  // changed by >= eps since last counted, or first send
    double max_change = 0.0;
};

struct RunStats {
    std::uint64_t msgs_sent = 0;
    std::size_t iterations = 0;
    std::size_t decimations = 0;
};

struct SolveResult {
    Assignment assignment;
    double utility = 0.0;
    RunStats stats;

    double cost() const { return cost_of(utility); }
};

EngineState init_state(const Dcop& dcop, const EngineConfig& cfg);

void normalize(std::span<double> payload, Normalization mode);

/// Unnormalized variable->factor payload: sum of the other incoming factor messages.
std::vector<double> raw_variable_payload(const EngineState& state, VarIndex var, FactorIndex factor);

/// Unnormalized factor->variable payload for scope slot `target`. `incoming[k]`
/// is the message from the variable in slot k (slot `target` is ignored).
/// Slots with a `restrict_to` value are held at that value and contribute no
/// incoming message, which is the same as slicing them out of the table.
std::vector<double> raw_factor_payload(const Factor& factor, std::span<const std::size_t> dims,
                                       std::span<const std::vector<double>> incoming,
                                       std::size_t target,
                                       std::span<const std::optional<std::size_t>> restrict_to = {});

Message variable_message(const EngineState& state, VarIndex var, FactorIndex factor,
                         Normalization mode = Normalization::Mean);
Message factor_message(const EngineState& state, FactorIndex factor, VarIndex var,
                       Normalization mode = Normalization::Mean);

StepReport step(EngineState& state, const EngineConfig& cfg, const StepOptions& options = {});

/// Sum of incoming factor messages. Throws for decimated variables.
std::vector<double> marginal(const EngineState& state, VarIndex var);

bool has_converged(const EngineState& state);

/// First index of the maximum; ties go low.
std::size_t argmax(std::span<const double> values);

Assignment decode(const EngineState& state);

void clear_attachments(EngineState& state);

/// Writes one JSON trace line if cfg.trace is set.
void emit_trace(const EngineConfig& cfg, const EngineState& state, const StepReport& report,
                std::span<const std::pair<VarIndex, std::size_t>> decimated = {});

}  // namespace dms
