#pragma once

#include <cstdint>

#include "decimaxsum/dcop.hpp"

namespace dms {

struct IsingParams {
    std::size_t side = 10;
    double beta = 1.6;
    double unary_bound = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Toroidal side x side grid of binary variables (variable r*side+c at row r,
/// column c), emitted in cost sense.
///
/// Factors, in id order: the right link of every cell (row-major), then the
/// down link of every cell, then one unary per cell. Couplings are drawn from
/// RngStream(seed) in that same order, one draw per factor:
///   link cost  (x_i, x_j) = kappa if x_i == x_j else -kappa, kappa ~ U[-beta, beta)
///   unary cost (x_i)      = [kappa_i, -kappa_i],          kappa_i ~ U[-bound, bound)
/// With side == 2 the wrap links duplicate the direct ones; they are kept as
/// parallel factors so there are always 2*side^2 links.
Dcop generate_ising(const IsingParams& params);

}  // namespace dms
