#include "decimaxsum/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dms {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] == b[k]) continue;  // also covers equal infinities
        worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    return worst;
}

void check_var(const EngineState& state, VarIndex var) {
    if (var >= state.num_variables()) throw std::out_of_range("unknown variable " + std::to_string(var));
}

}  // namespace

void EngineConfig::validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    if (limit < 1) throw std::invalid_argument("limit must be >= 1");
}

std::size_t EngineState::num_decimated() const {
    return static_cast<std::size_t>(
        std::count_if(fixed.begin(), fixed.end(), [](const auto& v) { return v.has_value(); }));
}

std::size_t EngineState::directed_edge_count() const {
    std::size_t count = 0;
    for (const auto& slots : to_factor) count += 2 * slots.size();
    return count;
}

std::size_t EngineState::slot_of(FactorIndex f, VarIndex v) const {
    const auto& scope = factors.at(f).scope;
    const auto it = std::find(scope.begin(), scope.end(), v);
    if (it == scope.end()) {
        throw std::invalid_argument("variable " + std::to_string(v) + " not adjacent to factor " +
                                    std::to_string(f));
    }
    return static_cast<std::size_t>(it - scope.begin());
}

EngineState init_state(const Dcop& dcop, const EngineConfig& cfg) {
    cfg.validate();
    require_valid(dcop);
    EngineState state;
    state.domain_sizes = dcop.domain_sizes();
    state.factors = dcop.factors;
    state.fixed.assign(dcop.num_variables(), std::nullopt);
    state.var_edges.resize(dcop.num_variables());
    state.to_factor.resize(dcop.factors.size());
    state.to_variable.resize(dcop.factors.size());
    for (const auto& f : dcop.factors) {
        for (std::size_t slot = 0; slot < f.scope.size(); ++slot) {
            const VarIndex v = f.scope[slot];
            state.var_edges[v].push_back({f.id, slot});
            EdgeMessage zero;
            zero.current.assign(state.domain_sizes[v], 0.0);
            state.to_factor[f.id].push_back(zero);
            state.to_variable[f.id].push_back(std::move(zero));
        }
    }
    return state;
}

void normalize(std::span<double> payload, Normalization mode) {
    if (mode == Normalization::None || payload.empty()) return;
    double shift = 0.0;
    std::size_t finite = 0;
    if (mode == Normalization::Mean) {
        for (double x : payload) {
            if (std::isfinite(x)) {
                shift += x;
                ++finite;
            }
        }
        if (finite == 0) return;
        shift /= static_cast<double>(finite);
    } else {
        shift = kNegInf;
        for (double x : payload) {
            if (std::isfinite(x)) shift = std::max(shift, x);
        }
        if (shift == kNegInf) return;
    }
    for (double& x : payload) x -= shift;
}

std::vector<double> raw_variable_payload(const EngineState& state, VarIndex var, FactorIndex factor) {
    check_var(state, var);
    std::vector<double> out(state.domain_sizes[var], 0.0);
    for (const auto& edge : state.var_edges[var]) {
        if (edge.factor == factor) continue;
        const auto& r = state.to_variable[edge.factor][edge.slot].current;
        for (std::size_t d = 0; d < out.size(); ++d) out[d] += r[d];
    }
    return out;
}

std::vector<double> raw_factor_payload(const Factor& factor, std::span<const std::size_t> dims,
                                       std::span<const std::vector<double>> incoming,
                                       std::size_t target,
                                       std::span<const std::optional<std::size_t>> restrict_to) {
    const std::size_t arity = factor.scope.size();
    if (target >= arity) throw std::out_of_range("target slot outside factor scope");
    std::vector<double> out(dims[target], kNegInf);
    std::vector<std::size_t> idx(arity, 0);
    const bool restricted = !restrict_to.empty();

    for (double u : factor.table) {
        bool admissible = true;
        double value = u;
        for (std::size_t k = 0; k < arity && admissible; ++k) {
            if (k == target) continue;
            if (restricted && restrict_to[k]) {
                admissible = idx[k] == *restrict_to[k];
            } else {
                value += incoming[k][idx[k]];
            }
        }
        if (admissible && value > out[idx[target]]) out[idx[target]] = value;
        for (std::size_t k = arity; k-- > 0;) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
    return out;
}

namespace {

std::vector<double> compute_factor_payload(const EngineState& state, FactorIndex f, std::size_t target) {
    const auto& factor = state.factors[f];
    const auto dims = scope_dims(factor, state.domain_sizes);
    const auto& q = state.to_factor[f];
    std::vector<std::vector<double>> incoming;
    std::vector<std::optional<std::size_t>> restrict_to;
    incoming.reserve(q.size());
    restrict_to.reserve(q.size());
    bool any_restricted = false;
    for (std::size_t k = 0; k < q.size(); ++k) {
        incoming.push_back(q[k].current);
        restrict_to.push_back(k == target ? std::nullopt : q[k].attached);
        any_restricted = any_restricted || restrict_to.back().has_value();
    }
    if (!any_restricted) restrict_to.clear();
    return raw_factor_payload(factor, dims, incoming, target, restrict_to);
}

bool record(EdgeMessage& edge, std::vector<double> payload, std::optional<std::size_t> attached,
            double eps, StepReport& report) {
    report.max_change = std::max(report.max_change, max_abs_diff(payload, edge.current));
    const bool changed = !edge.ever_sent || edge.last_attached != attached ||
                         max_abs_diff(payload, edge.last_sent) >= eps;
    edge.current = std::move(payload);
    edge.attached = attached;
    ++report.computed;
    if (changed) {
        edge.last_sent = edge.current;
        edge.last_attached = attached;
        edge.ever_sent = true;
        ++report.propagated;
    }
    return changed;
}

}  // namespace

Message variable_message(const EngineState& state, VarIndex var, FactorIndex factor, Normalization mode) {
    (void)state.slot_of(factor, var);
    if (state.is_decimated(var)) throw std::invalid_argument("decimated variables send no messages");
    Message msg{{NodeKind::Variable, var}, {NodeKind::Factor, factor}, raw_variable_payload(state, var, factor)};
    normalize(msg.payload, mode);
    return msg;
}

Message factor_message(const EngineState& state, FactorIndex factor, VarIndex var, Normalization mode) {
    const std::size_t slot = state.slot_of(factor, var);
    Message msg{{NodeKind::Factor, factor}, {NodeKind::Variable, var}, compute_factor_payload(state, factor, slot)};
    normalize(msg.payload, mode);
    return msg;
}

StepReport step(EngineState& state, const EngineConfig& cfg, const StepOptions& options) {
    StepReport report;
    const auto allowed = [&](FactorIndex f, std::size_t slot, Direction dir) {
        return !options.allow || options.allow(f, slot, dir);
    };

    for (FactorIndex f = 0; f < state.factors.size(); ++f) {
        const auto& scope = state.factors[f].scope;
        for (std::size_t slot = 0; slot < scope.size(); ++slot) {
            if (!allowed(f, slot, Direction::ToFactor)) continue;
            const VarIndex v = scope[slot];
            auto payload = raw_variable_payload(state, v, f);
            normalize(payload, cfg.normalization);
            std::optional<std::size_t> tag;
            if (options.attach_values) tag = argmax(marginal(state, v));
            record(state.to_factor[f][slot], std::move(payload), tag, cfg.eps, report);
        }
    }

    for (FactorIndex f = 0; f < state.factors.size(); ++f) {
        const auto& scope = state.factors[f].scope;
        for (std::size_t slot = 0; slot < scope.size(); ++slot) {
            if (!allowed(f, slot, Direction::ToVariable)) continue;
            auto payload = compute_factor_payload(state, f, slot);
            normalize(payload, cfg.normalization);
            record(state.to_variable[f][slot], std::move(payload), std::nullopt, cfg.eps, report);
        }
    }

    ++state.t;
    state.msgs_sent += cfg.suppression ? report.propagated : report.computed;
    state.last_propagated = report.propagated;
    state.last_max_change = report.max_change;
    return report;
}

std::vector<double> marginal(const EngineState& state, VarIndex var) {
    check_var(state, var);
    if (state.is_decimated(var)) {
        throw std::invalid_argument("variable " + std::to_string(var) + " is decimated");
    }
    std::vector<double> z(state.domain_sizes[var], 0.0);
    for (const auto& edge : state.var_edges[var]) {
        const auto& r = state.to_variable[edge.factor][edge.slot].current;
        for (std::size_t d = 0; d < z.size(); ++d) z[d] += r[d];
    }
    return z;
}

bool has_converged(const EngineState& state) { return state.t >= 1 && state.last_propagated == 0; }

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] > values[best]) best = k;
    }
    return best;
}

Assignment decode(const EngineState& state) {
    Assignment a(state.num_variables());
    for (VarIndex v = 0; v < state.num_variables(); ++v) {
        a.set(v, state.fixed[v] ? *state.fixed[v] : argmax(marginal(state, v)));
    }
    return a;
}

void clear_attachments(EngineState& state) {
    for (auto& slots : state.to_factor) {
        for (auto& edge : slots) edge.attached.reset();
    }
}

void emit_trace(const EngineConfig& cfg, const EngineState& state, const StepReport& report,
                std::span<const std::pair<VarIndex, std::size_t>> decimated) {
    if (cfg.trace == nullptr) return;
    auto& os = *cfg.trace;
    const std::uint64_t counted = cfg.suppression ? report.propagated : report.computed;
    os << "{\"t\":" << state.t << ",\"msgs\":" << counted << ",\"max_change\":";
    if (std::isfinite(report.max_change)) {
        os << report.max_change;
    } else {
        os << "null";
    }
    os << ",\"decimated\":[";
    for (std::size_t k = 0; k < decimated.size(); ++k) {
        if (k) os << ',';
        os << '[' << decimated[k].first << ',' << decimated[k].second << ']';
    }
    os << "]}\n";
}

}  // namespace dms
