#include <algorithm>
#include <cmath>
#include <sstream>

#include "decimaxsum/engine.hpp"
#include "decimaxsum/ising.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dms;
using namespace dms::testing;

namespace {

EngineConfig raw_config() {
    EngineConfig cfg;
    cfg.normalization = Normalization::None;
    return cfg;
}

Dcop chain3() {
    Dcop d = empty_problem({2, 2, 2});
    add_factor(d, {0, 1}, {1, 0, 0, 2});
    add_factor(d, {1, 2}, {0, 1, 3, 0});
    return d;
}

std::size_t run_until_converged(EngineState& state, const EngineConfig& cfg) {
    while (state.t < cfg.limit) {
        step(state, cfg);
        if (has_converged(state)) break;
    }
    return state.t;
}

}  // namespace

TEST_CASE("init_state zeroes every directed edge") {
    SUBCASE("chain of three variables") {
        const Dcop d = chain3();
        const EngineState s = init_state(d, {});
        CHECK(s.directed_edge_count() == 8);
        CHECK(s.t == 0);
        CHECK(s.msgs_sent == 0);
        CHECK(s.num_decimated() == 0);
        for (FactorIndex f = 0; f < 2; ++f) {
            for (const auto& e : s.to_factor[f]) CHECK(e.current == std::vector<double>{0, 0});
            for (const auto& e : s.to_variable[f]) CHECK(e.current == std::vector<double>{0, 0});
        }
    }
    SUBCASE("empty graph") {
        const EngineState s = init_state(empty_problem({}), {});
        CHECK(s.directed_edge_count() == 0);
        CHECK(s.num_variables() == 0);
    }
    SUBCASE("10x10 Ising") {
        const EngineState s = init_state(generate_ising({10, 1.6, 0.05, 1}), {});
        CHECK(s.directed_edge_count() == 1000);
    }
    SUBCASE("config is validated") {
        EngineConfig bad;
        bad.eps = 0;
        CHECK_THROWS_AS(init_state(chain3(), bad), std::invalid_argument);
        bad = {};
        bad.limit = 0;
        CHECK_THROWS_AS(init_state(chain3(), bad), std::invalid_argument);
    }
}

TEST_CASE("variable_message sums the other incoming factor messages") {
    Dcop d = empty_problem({2, 2, 2, 2});
    add_factor(d, {0, 1}, {0, 0, 0, 0});
    add_factor(d, {0, 2}, {0, 0, 0, 0});
    add_factor(d, {0, 3}, {0, 0, 0, 0});

    SUBCASE("leaf variable") {
        const EngineState s = init_state(d, {});
        CHECK(variable_message(s, 1, 0, Normalization::None).payload == std::vector<double>{0, 0});
    }
    SUBCASE("elementwise sum") {
        EngineState s = init_state(d, {});
        s.to_variable[0][0].current = {1, 0};
        s.to_variable[1][0].current = {0, 1};
        const Message m = variable_message(s, 0, 2, Normalization::None);
        CHECK(m.payload == std::vector<double>{1, 1});
        CHECK(m.sender == NodeRef{NodeKind::Variable, 0});
        CHECK(m.receiver == NodeRef{NodeKind::Factor, 2});
        CHECK(variable_message(s, 0, 2).payload == std::vector<double>{0, 0});  // mean-normalized
    }
    SUBCASE("random star against direct recomputation") {
        RngStream rng(17);
        EngineState s = init_state(d, {});
        std::vector<std::vector<double>> r(3);
        for (FactorIndex f = 0; f < 3; ++f) s.to_variable[f][0].current = r[f] = random_table(rng, 2, -5, 5);
        for (FactorIndex target = 0; target < 3; ++target) {
            std::vector<double> expected{0, 0};
            for (FactorIndex f = 0; f < 3; ++f) {
                if (f == target) continue;
                expected[0] += r[f][0];
                expected[1] += r[f][1];
            }
            const auto got = variable_message(s, 0, target, Normalization::None).payload;
            CHECK(got[0] == doctest::Approx(expected[0]));
            CHECK(got[1] == doctest::Approx(expected[1]));
        }
    }
}

TEST_CASE("factor_message maximizes over the other scope variables") {
    SUBCASE("unary factor sends its table") {
        Dcop d = empty_problem({2});
        add_factor(d, {0}, {0.05, -0.05});
        const EngineState s = init_state(d, {});
        CHECK(factor_message(s, 0, 0, Normalization::None).payload == std::vector<double>{0.05, -0.05});
    }
    SUBCASE("Ising coupling with zero incoming messages") {
        const double kappa = 0.7;
        Dcop d = empty_problem({2, 2});
        add_factor(d, {0, 1}, {kappa, -kappa, -kappa, kappa});
        const EngineState s = init_state(d, {});
        CHECK(factor_message(s, 0, 1, Normalization::None).payload == std::vector<double>{kappa, kappa});
    }
    SUBCASE("ternary factor against exhaustive enumeration") {
        RngStream rng(23);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t a = 2 + rng.next_u64() % 2, b = 2 + rng.next_u64() % 3, c = 2;
            Dcop d = empty_problem({a, b, c});
            add_factor(d, {0, 1, 2}, random_table(rng, a * b * c, -2, 2));
            EngineState s = init_state(d, {});
            std::vector<std::vector<double>> q{random_table(rng, a, -1, 1), random_table(rng, b, -1, 1),
                                               random_table(rng, c, -1, 1)};
            for (std::size_t k = 0; k < 3; ++k) s.to_factor[0][k].current = q[k];
            const auto& t = d.factors[0].table;
            const auto u = [&](std::size_t i, std::size_t j, std::size_t k) { return t[(i * b + j) * c + k]; };

            std::vector<double> expect_b(b, -1e300);
            for (std::size_t j = 0; j < b; ++j) {
                for (std::size_t i = 0; i < a; ++i) {
                    for (std::size_t k = 0; k < c; ++k) {
                        expect_b[j] = std::max(expect_b[j], u(i, j, k) + q[0][i] + q[2][k]);
                    }
                }
            }
            const auto got = factor_message(s, 0, 1, Normalization::None).payload;
            REQUIRE(got.size() == b);
            for (std::size_t j = 0; j < b; ++j) CHECK(got[j] == doctest::Approx(expect_b[j]).epsilon(1e-12));
        }
    }
    SUBCASE("-inf entries do not produce NaN") {
        const double ninf = -std::numeric_limits<double>::infinity();
        Dcop d = empty_problem({2, 2});
        add_factor(d, {0, 1}, {ninf, 1, ninf, ninf});
        add_factor(d, {0}, {0, ninf});
        EngineState s = init_state(d, {});
        for (int i = 0; i < 5; ++i) step(s, {});
        for (VarIndex v = 0; v < 2; ++v) {
            for (double x : marginal(s, v)) CHECK_FALSE(std::isnan(x));
        }
        CHECK(decode(s) == Assignment{0, 1});
    }
}

TEST_CASE("step runs one synchronous round") {
    SUBCASE("message count without suppression") {
        EngineConfig cfg;
        cfg.suppression = false;
        EngineState s = init_state(chain3(), cfg);
        const StepReport r = step(s, cfg);
        CHECK(r.computed == 8);
        CHECK(s.msgs_sent == 8);
        CHECK(s.t == 1);
        step(s, cfg);
        CHECK(s.msgs_sent == 16);
    }
    SUBCASE("chain messages settle after one round per variable hop") {
        RngStream rng(3);
        for (std::size_t n : {2u, 4u, 7u}) {
            Dcop d = empty_problem(std::vector<std::size_t>(n, 2));
            for (VarIndex v = 0; v + 1 < n; ++v) add_factor(d, {v, v + 1}, random_table(rng, 4, -1, 1));
            for (VarIndex v = 0; v < n; ++v) add_factor(d, {v}, random_table(rng, 2, -1, 1));
            EngineState s = init_state(d, {});
            // A unary's influence reaches the far end after n rounds and the
            // messages into the far unary one round later.
            for (std::size_t k = 0; k < n + 1; ++k) step(s, {});
            const auto before = s.to_variable;
            const StepReport r = step(s, {});
            CHECK(r.max_change == 0.0);
            CHECK(r.propagated == 0);
            for (FactorIndex f = 0; f < d.factors.size(); ++f) {
                for (std::size_t k = 0; k < before[f].size(); ++k) {
                    CHECK(before[f][k].current == s.to_variable[f][k].current);
                }
            }
        }
    }
    SUBCASE("converged state propagates nothing under suppression") {
        EngineState s = init_state(chain3(), {});
        run_until_converged(s, {});
        REQUIRE(has_converged(s));
        const auto sent = s.msgs_sent;
        const StepReport r = step(s, {});
        CHECK(r.propagated == 0);
        CHECK(s.msgs_sent == sent);
    }
    SUBCASE("msgs_sent never decreases") {
        RngStream rng(8);
        const Dcop d = random_loopy(rng, 8, 5, -1, 1);
        EngineState s = init_state(d, {});
        std::uint64_t last = 0;
        for (int i = 0; i < 50; ++i) {
            step(s, {});
            CHECK(s.msgs_sent >= last);
            last = s.msgs_sent;
        }
    }
    SUBCASE("trace lines") {
        std::ostringstream trace;
        EngineConfig cfg;
        cfg.trace = &trace;
        EngineState s = init_state(chain3(), cfg);
        const StepReport r = step(s, cfg);
        emit_trace(cfg, s, r);
        const std::string line = trace.str();
        CHECK(line.starts_with("{\"t\":1,\"msgs\":8,\"max_change\":"));
        CHECK(line.ends_with(",\"decimated\":[]}\n"));
    }
}

TEST_CASE("marginal sums incoming factor messages") {
    SUBCASE("isolated variable with a unary factor") {
        Dcop d = empty_problem({2});
        add_factor(d, {0}, {0.3, -0.8});
        EngineState s = init_state(d, raw_config());
        CHECK(marginal(s, 0) == std::vector<double>{0, 0});  // zero messages
        step(s, raw_config());
        CHECK(marginal(s, 0) == std::vector<double>{0.3, -0.8});
    }
    SUBCASE("decimated variables have no marginal") {
        Dcop d = empty_problem({2});
        EngineState s = init_state(d, {});
        s.fixed[0] = 1;
        CHECK_THROWS_AS(marginal(s, 0), std::invalid_argument);
    }
    SUBCASE("argmax agrees with the optimum on random trees") {
        RngStream rng(41);
        for (int trial = 0; trial < 30; ++trial) {
            const Dcop d = random_tree(rng, 6);
            EngineState s = init_state(d, {});
            run_until_converged(s, {});
            REQUIRE(has_converged(s));
            const auto best = brute_force_optimum(d);
            for (VarIndex v = 0; v < 6; ++v) CHECK(argmax(marginal(s, v)) == best.assignment.at(v));
        }
    }
}

TEST_CASE("has_converged") {
    SUBCASE("fresh state") { CHECK_FALSE(has_converged(init_state(chain3(), {}))); }
    SUBCASE("stabilized tree") {
        EngineState s = init_state(chain3(), {});
        run_until_converged(s, {});
        CHECK(has_converged(s));
        CHECK(s.t <= 5);
    }
    SUBCASE("frustrated two-variable loop never settles") {
        // One ferromagnetic coupling with a bias on x1, one antiferromagnetic
        // coupling: the belief difference flips sign every lap of the loop.
        Dcop d = empty_problem({2, 2});
        add_factor(d, {0, 1}, {1, -0.5, -1, 1.5});
        add_factor(d, {1, 0}, {-1, 1, 1, -1});
        EngineConfig cfg;
        cfg.eps = 1e-9;
        EngineState s = init_state(d, cfg);
        for (int t = 1; t <= 200; ++t) {
            step(s, cfg);
            CHECK_FALSE(has_converged(s));
        }
    }
}

TEST_CASE("decode") {
    Dcop d = empty_problem({2, 2, 3});
    add_factor(d, {0}, {0.2, 0.7});
    add_factor(d, {1}, {0.5, 0.5});
    add_factor(d, {2}, {0, 4, 1});
    EngineState s = init_state(d, raw_config());
    step(s, raw_config());
    CHECK(decode(s) == Assignment{1, 0, 1});

    s.fixed = {0, 1, 2};
    for (auto& e : s.var_edges) e.clear();
    CHECK(decode(s) == Assignment{0, 1, 2});
}

TEST_CASE("Max-Sum is exact on random hypertrees") {
    RngStream rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const Dcop d = random_hypertree(rng, 3 + rng.next_u64() % 8);
        EngineState s = init_state(d, {});
        run_until_converged(s, {});
        REQUIRE(has_converged(s));
        CHECK(total_utility(d, decode(s)) == doctest::Approx(brute_force_optimum(d).utility).epsilon(1e-9));
    }
}

TEST_CASE("determinism, suppression and normalization") {
    RngStream rng(123);
    for (int trial = 0; trial < 10; ++trial) {
        const Dcop d = random_loopy(rng, 9, 5, -1, 1);

        EngineConfig on;
        EngineConfig off;
        off.suppression = false;
        EngineState a = init_state(d, on), b = init_state(d, on), c = init_state(d, off);
        for (int i = 0; i < 40; ++i) {
            step(a, on);
            step(b, on);
            step(c, off);
        }
        CHECK(a.msgs_sent == b.msgs_sent);
        CHECK(decode(a) == decode(b));
        CHECK(decode(a) == decode(c));
        CHECK(a.msgs_sent <= c.msgs_sent);
        for (FactorIndex f = 0; f < d.factors.size(); ++f) {
            for (std::size_t k = 0; k < a.to_variable[f].size(); ++k) {
                CHECK(a.to_variable[f][k].current == b.to_variable[f][k].current);
                CHECK(a.to_variable[f][k].current == c.to_variable[f][k].current);
            }
        }

        for (Normalization mode : {Normalization::Max, Normalization::None}) {
            EngineConfig other;
            other.normalization = mode;
            EngineState o = init_state(d, other);
            for (int i = 0; i < 40; ++i) step(o, other);
            for (VarIndex v = 0; v < d.num_variables(); ++v) {
                CHECK(argmax(marginal(o, v)) == argmax(marginal(a, v)));
            }
        }
    }
}
