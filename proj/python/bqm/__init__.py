"""Weakly coupled elliptic systems with two-group competitive coupling.

Thin Python surface over the C++ core: operator construction, structural
checks, monotone discretization, barrier construction, the sandwich
iteration and the pseudo-time oracle, plus the JSON pipeline.
"""

from bqm._core import (  # noqa: F401
    BarrierPair,
    Box,
    BqmError,
    Classification,
    DiscreteSystem,
    Grid,
    OperatorSpec,
    Partition,
    SamplerConfig,
    SolveConfig,
    VectorGridFunction,
    __version__,
    build_barriers,
    build_grid,
    check_balanced_qm,
    check_condition_i,
    check_condition_i_prime,
    check_condition_ii,
    check_ellipticity,
    check_quasi_monotone,
    classify,
    discretize,
    family_inf_sup,
    lattice_combine_sub_super,
    lattice_combine_super_sub,
    make_competitive,
    make_diagonal_linear,
    perron_solve,
    perron_solve_dual,
    pseudo_time_oracle,
    run_pipeline,
)
