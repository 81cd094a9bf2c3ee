"""Python-surface smoke tests for the bqm extension module."""

import json
import math

import pytest

bqm = pytest.importorskip("bqm")


def make_unit_instance(n=41, lam=2.0, alpha=0.5, beta=0.5, f=1.0, g=2.0):
    spec = bqm.make_competitive(lam, alpha, beta, lambda x: f, lambda x: g, dim=1)
    grid = bqm.build_grid(1, [[0.0, 1.0]], [n])
    system = bqm.discretize(spec, grid)
    return spec, grid, system


def test_operator_evaluation():
    spec = bqm.make_competitive(1.0, 2.0, 1.0, lambda x: 0.0, lambda x: 0.0, dim=1)
    assert spec.partition.m1 == 1
    assert spec.partition.m2 == 1
    value = spec.evaluate(0, [0.25], [1.0], [3.0], [0.0], [[0.0]])
    assert value == pytest.approx(7.0)


def test_structure_checks():
    spec, _, _ = make_unit_instance()
    cfg = bqm.SamplerConfig(sample_count=2000, seed=7)
    assert bqm.check_ellipticity(spec, cfg)["passed"]
    mon1, mon2 = bqm.check_balanced_qm(spec, cfg)
    assert mon1["passed"] and mon2["passed"]
    # The competitive coupling genuinely violates the one-group condition.
    assert not bqm.check_quasi_monotone(spec, cfg)["passed"]
    margin = bqm.check_condition_i_prime(spec, cfg)
    assert margin["passed"]
    assert 1.4 <= margin["empirical_constant"] <= 1.6


def test_barriers_solve_and_classify():
    spec, grid, system = make_unit_instance()
    pair = bqm.build_barriers(system)
    assert pair.ordering_verified
    assert pair.z_verdict == "super_sub"
    assert pair.w_verdict == "sub_super"

    cfg = bqm.SolveConfig(tol=1e-9, max_sweeps=50000)
    u, rep = bqm.perron_solve(system, pair, cfg)
    assert rep["converged"]
    assert rep["monotonicity_violations"] == 0
    assert rep["sandwich_violations"] == 0
    assert bqm.classify(system, u, 1e-9).verdict == "solution"

    v, drep = bqm.perron_solve_dual(system, pair, cfg)
    assert drep["converged"]
    assert u.max_distance(v) <= 2e-9

    step = 0.95 / system.max_nodal_slope
    w, orep = bqm.pseudo_time_oracle(system, pair.z, step, tol=1e-9)
    assert orep["converged"]
    assert u.max_distance(w) <= 2e-9


def test_lattice_operations():
    spec, grid, system = make_unit_instance(n=21, lam=1.0, alpha=1.0, beta=1.0,
                                            f=1.0, g=1.0)
    pair = bqm.build_barriers(system)
    combined = bqm.lattice_combine_super_sub(pair.z, pair.z)
    assert combined.max_distance(pair.z) == 0.0
    inf_sup = bqm.family_inf_sup([pair.z, pair.z, pair.z])
    assert inf_sup.max_distance(pair.z) == 0.0


def test_solution_profile_matches_reduction():
    # Symmetric instance: both components equal the scalar Helmholtz
    # solution of -w'' + 2w = 1.
    spec, grid, system = make_unit_instance(n=101, lam=1.0, alpha=1.0, beta=1.0,
                                            f=1.0, g=1.0)
    pair = bqm.build_barriers(system)
    u, rep = bqm.perron_solve(system, pair, bqm.SolveConfig(tol=1e-10,
                                                            max_sweeps=100000))
    assert rep["converged"]
    s2 = math.sqrt(2.0)
    worst = 0.0
    values = u.values(0)
    for node in range(grid.total_nodes):
        x = grid.coord(node)[0]
        exact = 0.5 * (1.0 - math.cosh(s2 * (x - 0.5)) / math.cosh(s2 / 2.0))
        worst = max(worst, abs(values[node] - exact))
    assert worst <= 1e-4  # truncation error at h = 0.01


def test_pipeline_roundtrip():
    config = {
        "operator": {"builtin": "competitive", "lambda": 2.0, "alpha": 0.5,
                     "beta": 0.5, "f": {"kind": "constant", "value": 1.0},
                     "g": {"kind": "constant", "value": 2.0}},
        "grid": {"dim": 1, "nodes": [31]},
        "sampler": {"sample_count": 1000, "seed": 5},
        "solver": {"tol": 1e-8, "max_sweeps": 30000},
    }
    ok, report_text = bqm.run_pipeline(json.dumps(config))
    assert ok
    report = json.loads(report_text)
    assert report["verify"]["solution_classification"]["verdict"] == "solution"
    assert report["checks"]["monorig"]["passed"] is False


def test_error_propagation():
    with pytest.raises(bqm.BqmError):
        bqm.make_competitive(-1.0, 1.0, 1.0, lambda x: 0.0, lambda x: 0.0, dim=1)
