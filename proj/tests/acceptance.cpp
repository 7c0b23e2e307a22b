// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "decimaxsum/decimation.hpp"
#include "decimaxsum/harness.hpp"
#include "decimaxsum/ising.hpp"
#include "decimaxsum/variants.hpp"
#include "test_support.hpp"

using namespace dms;
using namespace dms::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* kDeterministic = "trigger=freq:rate:2;filter=all;perform=max_entropy;assign=max_marginal";

std::vector<Dcop> ising_suite() {
    std::vector<Dcop> out;
    for (std::size_t side : {3u, 4u}) {
        for (std::uint64_t p = 0; p < 10; ++p) out.push_back(generate_ising({side, 1.6, 0.05, 1000 * side + p}));
    }
    return out;
}

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome c1_trees_exact() {
    const auto start = Clock::now();
    RngStream rng(101);
    const auto policy = parse_policy("trigger=converge;filter=all;perform=max_entropy;assign=max_marginal");
    int exact = 0;
    for (int k = 0; k < 50; ++k) {
        const Dcop d = random_tree(rng, 2 + rng.next_u64() % 11, -2.0, 2.0);
        const double best = brute_force_optimum(d).utility;
        const bool ms = std::abs(run_max_sum(d, {}).utility - best) <= 1e-9;
        const bool dm = std::abs(run_decimaxsum(d, policy, {}, k).utility - best) <= 1e-9;
        exact += ms && dm;
    }
    const double secs = seconds_since(start);
    std::ostringstream os;
    os << exact << "/50 trees optimal, " << secs << " s";
    return {exact == 50 && secs < 5.0, os.str()};
}

Outcome c2_ising_gap() {
    const auto start = Clock::now();
    const auto policy = parse_policy(kDeterministic);
    double total = 0;
    const auto suite = ising_suite();
    for (const Dcop& d : suite) {
        const double best = brute_force_optimum(d).utility;
        const double worst = brute_force_worst(d).utility;
        const double got = run_decimaxsum(d, policy, {}, 0).utility;
        total += (best - got) / (best - worst);
    }
    const double mean = total / static_cast<double>(suite.size());
    const double secs = seconds_since(start);
    std::ostringstream os;
    os << "mean normalized gap " << mean << " (bound 0.10), " << secs << " s";
    return {mean <= 0.10 && secs < 60.0, os.str()};
}

Outcome c3_fewer_messages() {
    EngineConfig cfg;
    cfg.limit = 200;
    const auto policy = parse_policy(kDeterministic);
    int fewer = 0;
    std::uint64_t deci_total = 0, plain_total = 0;
    const auto suite = ising_suite();
    for (const Dcop& d : suite) {
        const auto deci = run_decimaxsum(d, policy, cfg, 0).stats.msgs_sent;
        const auto plain = run_max_sum(d, cfg).stats.msgs_sent;
        fewer += deci < plain;
        deci_total += deci;
        plain_total += plain;
    }
    std::ostringstream os;
    os << fewer << "/" << suite.size() << " instances, total " << deci_total << " vs " << plain_total;
    return {fewer == static_cast<int>(suite.size()), os.str()};
}

Outcome c4_deterministic_vs_montanari() {
    // "Most determined variable" is the lowest-entropy one; the literal
    // max-entropy order is reported alongside.
    const auto determined = parse_policy(std::string(kDeterministic) + ";entropy-order=min");
    const auto literal = parse_policy(kDeterministic);
    const auto montanari = parse_algorithm("montanari");
    double det = 0, lit = 0, mont = 0;
    const auto suite = ising_suite();
    for (std::size_t k = 0; k < suite.size(); ++k) {
        det += run_decimaxsum(suite[k], determined, {}, 0).cost();
        lit += run_decimaxsum(suite[k], literal, {}, 0).cost();
        for (std::uint64_t run = 0; run < 3; ++run) {
            mont += run_algorithm(montanari, suite[k], {}, derive_seed(7, k, run)).cost() / 3.0;
        }
    }
    const double n = static_cast<double>(suite.size());
    det /= n;
    lit /= n;
    mont /= n;
    std::ostringstream os;
    os << "mean cost " << det << " vs montanari " << mont << " (max-entropy order: " << lit << ")";
    return {det <= mont, os.str()};
}

Outcome c5_ad_vp_ratio() {
    RngStream rng(505);
    double total = 0;
    for (int k = 0; k < 20; ++k) {
        const Dcop d = random_loopy(rng, 8 + rng.next_u64() % 7, 6, 0.0, 1.0);
        const double best = brute_force_optimum(d).utility;
        const double got = run_max_sum_ad_vp(d, {}).utility;
        total += best / got;
    }
    const double mean = total / 20.0;
    std::ostringstream os;
    os << "mean optimum/achieved " << mean << " (bound 1.3)";
    return {mean <= 1.3, os.str()};
}

Outcome c6_reproducibility() {
    std::vector<std::string> failed;

    ExperimentConfig cfg;
    cfg.algorithms = {"maxsum", "mooij", "montanari",
                      "decimaxsum:trigger=freq:rate:2;filter=all;perform=max_rand;assign=sample"};
    cfg.sides = {3, 4};
    cfg.problems_per_setting = 2;
    cfg.runs_per_problem = 2;
    cfg.base_seed = 2024;
    cfg.engine.limit = 100;
    const std::string first = emit_results(run_experiment(cfg), OutputFormat::Csv, false);
    cfg.threads = 3;
    const std::string second = emit_results(run_experiment(cfg), OutputFormat::Csv, false);
    if (first != second) failed.push_back("tables");

    RngStream rng(606);
    for (int k = 0; k < 200; ++k) {
        const std::vector<std::size_t> sizes{2 + rng.next_u64() % 3, 2 + rng.next_u64() % 3};
        const Factor f{0, {0, 1}, random_table(rng, sizes[0] * sizes[1], -5, 5)};
        const auto var = static_cast<VarIndex>(rng.next_u64() % 2);
        const std::size_t value = rng.next_u64() % sizes[var];
        const Factor s = slice_factor(f, sizes, var, value);
        for (std::size_t other = 0; other < sizes[1 - var]; ++other) {
            const std::size_t x0 = var == 0 ? value : other;
            const std::size_t x1 = var == 1 ? value : other;
            if (s.table[other] != f.table[x0 * sizes[1] + x1]) {
                failed.push_back("slice");
                k = 200;
                break;
            }
        }
    }

    const double c = 0.37;
    if (std::abs(entropy_of_marginal(std::vector<double>{c, c}) - std::log(2.0)) > 1e-12) failed.push_back("entropy");

    RngStream inst(707);
    for (int k = 0; k < 20; ++k) {
        const Dcop d = random_loopy(inst, 10, 6, -1.0, 1.0);
        EngineConfig on, off;
        on.limit = off.limit = 150;
        off.suppression = false;
        if (run_max_sum(d, on).assignment != run_max_sum(d, off).assignment) {
            failed.push_back("suppression");
            break;
        }
    }

    std::string detail = failed.empty() ? "tables, slices, entropy, suppression" : "failed:";
    for (const auto& f : failed) detail += " " + f;
    return {failed.empty(), detail};
}

Outcome c7_termination() {
    const std::vector<std::pair<std::string, std::size_t>> cases{
        {kDeterministic, 2},
        {"trigger=freq:budget:100;filter=all;perform=max_entropy;assign=sample", 100},
        {"trigger=freq:decreasing:64;filter=all;perform=max_marginal;assign=max_marginal", 64},
        {"trigger=freq:rate:10;filter=neighbors;perform=max_rand;assign=sample", 10},
        {"trigger=converge;filter=all;perform=max_marginal;assign=sample", 100},
        {"trigger=time:25;filter=neighbors;perform=max_entropy;assign=sample", 25},
    };
    int ok = 0, total = 0;
    for (const Dcop& d : ising_suite()) {
        const std::size_t n = d.num_variables();
        for (const auto& [text, bound] : cases) {
            const auto r = run_decimaxsum(d, parse_policy(text), {}, static_cast<std::uint64_t>(total));
            ++total;
            ok += r.stats.decimations == n && r.stats.iterations <= n * bound && r.assignment.is_total();
        }
    }
    std::ostringstream os;
    os << ok << "/" << total << " runs decimated every variable within the bound";
    return {ok == total, os.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 exact on trees", c1_trees_exact},
        {"2 near-optimal on small Ising grids", c2_ising_gap},
        {"3 fewer messages than Max-Sum", c3_fewer_messages},
        {"4 deterministic variant beats Montanari", c4_deterministic_vs_montanari},
        {"5 AD_VP quality on loopy graphs", c5_ad_vp_ratio},
        {"6 reproducibility and numerics", c6_reproducibility},
        {"7 termination", c7_termination},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
