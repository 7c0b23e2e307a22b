import itertools
import json
import math

import pytest

import decimaxsum as dms

POLICY = "trigger=freq:rate:2;filter=all;perform=max_entropy;assign=max_marginal"


def exhaustive_best_cost(dcop):
    # independent of the library's own enumerator
    best = math.inf
    for values in itertools.product(*(range(k) for k in dcop.domain_sizes)):
        best = min(best, -dms.total_utility(dcop, list(values)))
    return best


def test_generate_shape():
    d = dms.generate_ising(3, seed=4)
    assert d.num_variables == 9
    assert d.num_factors == 27
    assert d.minimize
    assert sorted(len(s) for s in d.scopes()) == [1] * 9 + [2] * 18


def test_brute_force_matches_enumeration():
    d = dms.generate_ising(3, seed=11)
    assignment, utility = dms.brute_force_optimum(d)
    assert -utility == pytest.approx(exhaustive_best_cost(d))
    assert dms.total_utility(d, assignment) == pytest.approx(utility)


@pytest.mark.parametrize("algorithm", ["maxsum", "maxsum_ad", "maxsum_ad_vp", "montanari", "mooij", "decimaxsum:" + POLICY])
def test_solve_every_selector(algorithm):
    d = dms.generate_ising(3, seed=2)
    r = dms.solve(d, algorithm, seed=5, limit=200)
    assert len(r["assignment"]) == 9
    assert r["final_cost"] == pytest.approx(-dms.total_utility(d, r["assignment"]))
    assert r["final_cost"] >= exhaustive_best_cost(d) - 1e-9
    assert r == dms.solve(d, algorithm, seed=5, limit=200)


def test_serialize_round_trip(tmp_path):
    d = dms.generate_ising(4, seed=8)
    text = dms.serialize_dcop(d)
    assert dms.serialize_dcop(dms.parse_dcop(text)) == text
    path = tmp_path / "grid.json"
    dms.save_dcop(d, str(path))
    assert dms.serialize_dcop(dms.load_dcop(str(path))) == text
    with pytest.raises(dms.ParseError):
        dms.parse_dcop(text[: len(text) // 2])


def test_bench_and_aggregate():
    cfg = json.dumps({"algorithms": ["maxsum", "mooij"], "sides": [3], "problems_per_setting": 2,
                      "runs_per_problem": 2, "base_seed": 3, "engine": {"limit": 50}})
    csv = dms.bench_csv(cfg)
    assert csv == dms.bench_csv(cfg)
    lines = csv.strip().split("\n")
    assert len(lines) == 1 + 2 * 2 * 2
    rows = dms.run_experiment(cfg)
    assert [r["algorithm"] for r in rows[:2]] == ["maxsum", "mooij"]
    agg = dms.aggregate_csv(csv).strip().split("\n")
    assert agg[0].startswith("algorithm,side,problems,mean_final_cost")
    assert len(agg) == 3


def test_policy_and_entropy():
    assert dms.canonical_policy("TRIGGER=freq:rate:2; filter=ALL; perform=max_entropy; assign=max_marginal") == \
        dms.canonical_policy(POLICY)
    with pytest.raises(ValueError):
        dms.canonical_policy("trigger=converge;filter=all;perform=max_entropy;assign=max_marginal;bogus=1")
    assert dms.entropy_of_marginal([0.3, 0.3]) == pytest.approx(math.log(2), abs=1e-12)
    assert len(dms.reference_algorithms()) == 16
