#include "decimaxsum/ising.hpp"

#include <cmath>
#include <stdexcept>

#include "decimaxsum/rng.hpp"

namespace dms {

void IsingParams::validate() const {
    if (side < 2) throw std::invalid_argument("ising: side must be >= 2");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("ising: beta must be > 0");
    if (!(unary_bound >= 0.0) || !std::isfinite(unary_bound)) {
        throw std::invalid_argument("ising: unary bound must be >= 0");
    }
}

Dcop generate_ising(const IsingParams& params) {
    params.validate();
    const std::size_t s = params.side;
    const std::size_t n = s * s;
    RngStream rng(params.seed);

    Dcop dcop;
    dcop.sense = Sense::MinimizeCost;
    dcop.variables.reserve(n);
    dcop.agent_of.reserve(n);
    for (VarIndex v = 0; v < n; ++v) {
        dcop.variables.push_back({v, {"0", "1"}});
        dcop.agent_of.push_back("a" + std::to_string(v));
    }

    // Stored tables are utilities, i.e. negated costs.
    const auto add_link = [&](VarIndex a, VarIndex b) {
        const double kappa = rng.uniform(-params.beta, params.beta);
        dcop.factors.push_back({dcop.factors.size(), {a, b}, {-kappa, kappa, kappa, -kappa}});
    };
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) add_link(r * s + c, r * s + (c + 1) % s);
    }
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) add_link(r * s + c, ((r + 1) % s) * s + c);
    }
    for (VarIndex v = 0; v < n; ++v) {
        const double kappa = rng.uniform(-params.unary_bound, params.unary_bound);
        dcop.factors.push_back({dcop.factors.size(), {v}, {-kappa, kappa}});
    }
    return dcop;
}

}  // namespace dms
