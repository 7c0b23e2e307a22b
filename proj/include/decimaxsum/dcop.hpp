#pragma once

// Problem model: variables with finite ordered domains, soft constraints stored
// as dense row-major utility tables, and the factor graph derived from them.
//
// The canonical internal sense is utility maximization. Cost-sense problems keep
// their tables negated in memory and remember the sense so that reports (and the
// file writer) can convert back.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dms {

using VarIndex = std::size_t;
using FactorIndex = std::size_t;

enum class Sense { MaximizeUtility, MinimizeCost };

struct Variable {
    VarIndex id = 0;
    std::vector<std::string> labels;  // ordered domain

    std::size_t domain_size() const { return labels.size(); }
};

/// A soft constraint over an ordered scope. The last scope variable varies
/// fastest in `table`. An empty scope is a scalar contribution.
struct Factor {
    FactorIndex id = 0;
    std::vector<VarIndex> scope;
    std::vector<double> table;  // utilities; -inf allowed, NaN and +inf are not

    bool is_scalar() const { return scope.empty(); }
};

struct Dcop {
    Sense sense = Sense::MaximizeUtility;
    std::vector<Variable> variables;  // variables[i].id == i
    std::vector<Factor> factors;      // factors[m].id == m
    std::vector<std::string> agent_of;

    std::size_t num_variables() const { return variables.size(); }
    std::vector<std::size_t> domain_sizes() const;
};

/// Partial or total assignment of domain indices, indexed by variable.
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::size_t num_variables) : values_(num_variables) {}
    Assignment(std::initializer_list<std::size_t> total);

    std::size_t size() const { return values_.size(); }
    bool is_assigned(VarIndex v) const { return values_.at(v).has_value(); }
    bool is_total() const;
    std::size_t at(VarIndex v) const;
    void set(VarIndex v, std::size_t value) { values_.at(v) = value; }
    void clear(VarIndex v) { values_.at(v).reset(); }

    /// Total assignment as a plain index vector; throws if partial.
    std::vector<std::size_t> values() const;

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<std::optional<std::size_t>> values_;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// Every violated invariant, one message per offending id. Empty when valid.
std::vector<std::string> validate(const Dcop& dcop);

/// Throws ValidationError listing all issues.
void require_valid(const Dcop& dcop);

/// Row-major strides for a scope with the given domain sizes.
std::vector<std::size_t> strides_for(std::span<const std::size_t> dims);

std::vector<std::size_t> scope_dims(const Factor& f, std::span<const std::size_t> domain_sizes);

/// Sum of all factor utilities selected by a total assignment. -inf propagates.
double total_utility(const Dcop& dcop, const Assignment& a);

/// Factor restricted to `var = value`. Slicing the last scope variable yields a
/// scalar factor.
Factor slice_factor(const Factor& f, std::span<const std::size_t> domain_sizes, VarIndex var,
                    std::size_t value);

struct FactorGraph {
    std::vector<std::vector<FactorIndex>> var_neighbors;
    std::vector<std::vector<VarIndex>> factor_neighbors;

    std::size_t edge_count() const;
};

FactorGraph build_factor_graph(const Dcop& dcop);

struct OptimumResult {
    Assignment assignment;
    double utility = 0.0;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

/// Calls `visit` on every total assignment in lexicographic order together with
/// its utility. Throws std::length_error past `cap` assignments.
void for_each_assignment(const Dcop& dcop,
                         const std::function<void(std::span<const std::size_t>, double)>& visit,
                         std::uint64_t cap = kDefaultEnumerationCap);

/// Exhaustive maximizer; ties go to the lexicographically smallest assignment.
OptimumResult brute_force_optimum(const Dcop& dcop, std::uint64_t cap = kDefaultEnumerationCap);

/// Lowest-utility assignment, same tie rule.
OptimumResult brute_force_worst(const Dcop& dcop, std::uint64_t cap = kDefaultEnumerationCap);

/// Reported cost of a utility: lower is better in every sense.
inline double cost_of(double utility) { return -utility; }

}  // namespace dms
