#include "decimaxsum/dcop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace dms {

std::vector<std::size_t> Dcop::domain_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(variables.size());
    for (const auto& v : variables) sizes.push_back(v.domain_size());
    return sizes;
}

Assignment::Assignment(std::initializer_list<std::size_t> total) {
    values_.assign(total.begin(), total.end());
}

bool Assignment::is_total() const {
    return std::all_of(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); });
}

std::size_t Assignment::at(VarIndex v) const {
    const auto& slot = values_.at(v);
    if (!slot) throw std::invalid_argument("variable " + std::to_string(v) + " is unassigned");
    return *slot;
}

std::vector<std::size_t> Assignment::values() const {
    std::vector<std::size_t> out;
    out.reserve(values_.size());
    for (std::size_t v = 0; v < values_.size(); ++v) out.push_back(at(v));
    return out;
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::ostringstream os;
    os << "invalid DCOP:";
    for (const auto& issue : issues) os << "\n  " << issue;
    return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::string> validate(const Dcop& dcop) {
    std::vector<std::string> issues;
    const std::size_t n = dcop.variables.size();

    for (std::size_t i = 0; i < n; ++i) {
        const auto& var = dcop.variables[i];
        if (var.id != i) {
            issues.push_back("variable at position " + std::to_string(i) + " has id " +
                             std::to_string(var.id) + " (ids must equal positions)");
        }
        if (var.labels.empty()) issues.push_back("variable " + std::to_string(i) + ": empty domain");
    }

    for (std::size_t m = 0; m < dcop.factors.size(); ++m) {
        const auto& f = dcop.factors[m];
        const std::string tag = "factor " + std::to_string(f.id);
        if (f.id != m) {
            issues.push_back(tag + ": id does not match position " + std::to_string(m));
        }
        std::set<VarIndex> seen;
        bool scope_ok = true;
        std::size_t expected = 1;
        for (VarIndex v : f.scope) {
            if (v >= n) {
                issues.push_back(tag + ": unknown variable " + std::to_string(v));
                scope_ok = false;
                continue;
            }
            if (!seen.insert(v).second) {
                issues.push_back(tag + ": duplicate variable " + std::to_string(v) + " in scope");
                scope_ok = false;
            }
            expected *= dcop.variables[v].domain_size();
        }
        if (scope_ok && f.table.size() != expected) {
            issues.push_back(tag + ": table length mismatch (" + std::to_string(f.table.size()) +
                             " != " + std::to_string(expected) + ")");
        }
        for (std::size_t k = 0; k < f.table.size(); ++k) {
            const double u = f.table[k];
            if (std::isnan(u)) {
                issues.push_back(tag + ": NaN entry at " + std::to_string(k));
                break;
            }
            if (u == std::numeric_limits<double>::infinity()) {
                issues.push_back(tag + ": +inf utility at " + std::to_string(k));
                break;
            }
        }
    }

    if (dcop.agent_of.size() != n) {
        issues.push_back("agent map covers " + std::to_string(dcop.agent_of.size()) + " of " +
                         std::to_string(n) + " variables");
    }
    return issues;
}

void require_valid(const Dcop& dcop) {
    auto issues = validate(dcop);
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::vector<std::size_t> strides_for(std::span<const std::size_t> dims) {
    std::vector<std::size_t> strides(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
    return strides;
}

std::vector<std::size_t> scope_dims(const Factor& f, std::span<const std::size_t> domain_sizes) {
    std::vector<std::size_t> dims;
    dims.reserve(f.scope.size());
    for (VarIndex v : f.scope) dims.push_back(domain_sizes[v]);
    return dims;
}

namespace {

double factor_value(const Factor& f, std::span<const std::size_t> strides,
                    std::span<const std::size_t> values) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < f.scope.size(); ++k) idx += strides[k] * values[f.scope[k]];
    return f.table[idx];
}

struct FactorStrides {
    std::vector<std::vector<std::size_t>> per_factor;

    explicit FactorStrides(const Dcop& dcop) {
        const auto sizes = dcop.domain_sizes();
        per_factor.reserve(dcop.factors.size());
        for (const auto& f : dcop.factors) per_factor.push_back(strides_for(scope_dims(f, sizes)));
    }
};

double utility_of(const Dcop& dcop, const FactorStrides& fs, std::span<const std::size_t> values) {
    double sum = 0.0;
    for (std::size_t m = 0; m < dcop.factors.size(); ++m) {
        sum += factor_value(dcop.factors[m], fs.per_factor[m], values);
    }
    return sum;
}

}  // namespace

double total_utility(const Dcop& dcop, const Assignment& a) {
    if (a.size() != dcop.num_variables() || !a.is_total()) {
        throw std::invalid_argument("total_utility requires a total assignment");
    }
    const auto values = a.values();
    for (std::size_t v = 0; v < values.size(); ++v) {
        if (values[v] >= dcop.variables[v].domain_size()) {
            throw std::out_of_range("value of variable " + std::to_string(v) + " outside its domain");
        }
    }
    return utility_of(dcop, FactorStrides(dcop), values);
}

Factor slice_factor(const Factor& f, std::span<const std::size_t> domain_sizes, VarIndex var,
                    std::size_t value) {
    const auto pos_it = std::find(f.scope.begin(), f.scope.end(), var);
    if (pos_it == f.scope.end()) {
        throw std::invalid_argument("variable " + std::to_string(var) + " not in scope of factor " +
                                    std::to_string(f.id));
    }
    const std::size_t pos = static_cast<std::size_t>(pos_it - f.scope.begin());
    const auto dims = scope_dims(f, domain_sizes);
    if (value >= dims[pos]) throw std::out_of_range("slice value outside domain");

    // Rows before `pos` are "outer", rows after are "inner"; the sliced table
    // keeps one column block per outer index.
    std::size_t inner = 1;
    for (std::size_t k = pos + 1; k < dims.size(); ++k) inner *= dims[k];
    const std::size_t outer = f.table.size() / (inner * dims[pos]);

    Factor out;
    out.id = f.id;
    out.scope = f.scope;
    out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
    out.table.reserve(outer * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = (o * dims[pos] + value) * inner;
        out.table.insert(out.table.end(), f.table.begin() + static_cast<std::ptrdiff_t>(base),
                         f.table.begin() + static_cast<std::ptrdiff_t>(base + inner));
    }
    return out;
}

std::size_t FactorGraph::edge_count() const {
    std::size_t count = 0;
    for (const auto& scope : factor_neighbors) count += scope.size();
    return count;
}

FactorGraph build_factor_graph(const Dcop& dcop) {
    require_valid(dcop);
    FactorGraph fg;
    fg.var_neighbors.resize(dcop.num_variables());
    fg.factor_neighbors.reserve(dcop.factors.size());
    for (const auto& f : dcop.factors) {
        fg.factor_neighbors.push_back(f.scope);
        for (VarIndex v : f.scope) fg.var_neighbors[v].push_back(f.id);
    }
    return fg;
}

void for_each_assignment(const Dcop& dcop,
                         const std::function<void(std::span<const std::size_t>, double)>& visit,
                         std::uint64_t cap) {
    require_valid(dcop);
    std::uint64_t count = 1;
    for (const auto& v : dcop.variables) {
        if (count > cap / v.domain_size()) throw std::length_error("enumeration cap exceeded");
        count *= v.domain_size();
    }
    if (count > cap) throw std::length_error("enumeration cap exceeded");

    const FactorStrides fs(dcop);
    const auto sizes = dcop.domain_sizes();
    std::vector<std::size_t> values(sizes.size(), 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        visit(values, utility_of(dcop, fs, values));
        for (std::size_t k = values.size(); k-- > 0;) {
            if (++values[k] < sizes[k]) break;
            values[k] = 0;
        }
    }
}

namespace {

OptimumResult extreme(const Dcop& dcop, std::uint64_t cap, bool maximize) {
    std::vector<std::size_t> best;
    double best_u = 0.0;
    for_each_assignment(
        dcop,
        [&](std::span<const std::size_t> values, double u) {
            const bool better = best.empty() || (maximize ? u > best_u : u < best_u);
            if (better) {
                best.assign(values.begin(), values.end());
                best_u = u;
            }
        },
        cap);
    OptimumResult result;
    result.assignment = Assignment(best.size());
    for (std::size_t v = 0; v < best.size(); ++v) result.assignment.set(v, best[v]);
    result.utility = best_u;
    return result;
}

}  // namespace

OptimumResult brute_force_optimum(const Dcop& dcop, std::uint64_t cap) {
    return extreme(dcop, cap, true);
}

OptimumResult brute_force_worst(const Dcop& dcop, std::uint64_t cap) {
    return extreme(dcop, cap, false);
}

}  // namespace dms
