"""Max-Sum, alternating-direction Max-Sum and decimation solvers for DCOPs."""

from ._core import (
    Dcop,
    ParseError,
    ValidationError,
    aggregate_csv,
    bench_csv,
    brute_force_optimum,
    canonical_policy,
    entropy_of_marginal,
    generate_ising,
    load_dcop,
    parse_dcop,
    reference_algorithms,
    run_experiment,
    save_dcop,
    serialize_dcop,
    solve,
    total_utility,
)

__all__ = [
    "Dcop",
    "ParseError",
    "ValidationError",
    "aggregate_csv",
    "bench_csv",
    "brute_force_optimum",
    "canonical_policy",
    "entropy_of_marginal",
    "generate_ising",
    "load_dcop",
    "parse_dcop",
    "reference_algorithms",
    "run_experiment",
    "save_dcop",
    "serialize_dcop",
    "solve",
    "total_utility",
]
