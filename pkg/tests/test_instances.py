import numpy as np
import pytest

from qhdkit.expr import compile_expr, evaluate
from qhdkit.instances import (
    BUILTIN_IDS,
    builtin,
    exp_objective,
    generate_exp_instance,
    generate_qp_instance,
)
from qhdkit.problem import BoxBounds, Problem
from qhdkit.refine import refine

from conftest import grid_polish_minimum

PRINTED = {"nonlinear-1": -3.0, "nonlinear-2": 0.354, "nonlinear-3": -12.650, "nonlinear-4": -0.882,
           "nonlinear-5": -4.196, "exp-2d": -12.650}


@pytest.mark.parametrize("iid", BUILTIN_IDS)
def test_reference_minima_agree_with_grid_oracle(iid):
    spec = builtin(iid)
    f_min, _ = grid_polish_minimum(spec.problem.expr, spec.problem.n,
                                   201 if spec.problem.n == 2 else 41)
    assert f_min == pytest.approx(spec.f_star, abs=1e-8)


@pytest.mark.parametrize("iid", sorted(PRINTED))
def test_reference_minima_match_printed_values(iid):
    spec = builtin(iid)
    assert spec.provenance == "published" and spec.published_value == PRINTED[iid]
    assert round(spec.f_star, 3) == pytest.approx(PRINTED[iid], abs=1e-12)


def test_qp_reference_is_derived():
    spec = builtin("qp-2d")
    assert spec.provenance == "derived" and spec.f_star == -0.75


def test_known_minimizers():
    assert evaluate(builtin("nonlinear-1").problem.expr, [0, 1]) == -3.0
    v = evaluate(builtin("nonlinear-3").problem.expr, [1, 1])
    assert v == pytest.approx(-12.649538, abs=5e-7) and round(v, 3) == -12.650


def test_domain_safe_logs():
    for iid in ("nonlinear-2", "nonlinear-5"):
        f = compile_expr(builtin(iid).problem.expr)
        X = np.random.default_rng(0).random((builtin(iid).problem.n, 1000))
        X[:, :2] = [[0.0, 1.0]] * X.shape[0] if False else X[:, :2]
        corners = np.array(np.meshgrid(*[[0.0, 1.0]] * X.shape[0])).reshape(X.shape[0], -1)
        assert np.all(np.isfinite(f(np.hstack([X, corners]))))


def test_exp_instance_pointwise():
    spec = generate_exp_instance(2, 1.0, 0, starts=0)
    Q, b = np.array(spec.data["Q"]), np.array(spec.data["b"])
    assert np.array_equal(Q, Q.T) and np.count_nonzero(Q[0, 1]) == 1
    X = np.random.default_rng(1).random((2, 200))
    E = np.exp(X)
    direct = 0.5 * np.einsum("is,ij,js->s", E, Q, E) + b @ np.exp(-X)
    np.testing.assert_allclose(compile_expr(spec.problem.expr)(X), direct, rtol=1e-14, atol=1e-14)


def test_exp_zero_coupling_is_separable():
    Q = np.diag([0.5, -0.3, 0.8])
    b = np.array([0.4, -0.2, 0.6])
    p = Problem(exp_objective(Q, b), BoxBounds.unit(3), normalized=True)
    assert p.objective.m == 0
    # closed form per coordinate: minimize 0.5 q e^{2x} + b e^{-x} on [0, 1]
    xs = np.linspace(0, 1, 200_001)
    best = sum(np.min(0.5 * q * np.exp(2 * xs) + c * np.exp(-xs)) for q, c in zip(np.diag(Q), b))
    r_best = min(refine(p, x0).f_star for x0 in np.random.default_rng(0).random((30, 3)))
    assert r_best == pytest.approx(best, abs=1e-9)


def test_generators_are_deterministic():
    a = generate_exp_instance(4, 0.5, 11, starts=200)
    b = generate_exp_instance(4, 0.5, 11, starts=200)
    assert a.data == b.data and a.f_star == b.f_star and a.id == b.id
    assert a.provenance == "derived"
    assert generate_qp_instance(3, 0.5, 2, starts=50).data == generate_qp_instance(3, 0.5, 2, starts=50).data


def test_sparsity_matches_expectation():
    counts = []
    for seed in range(40):
        Q = np.array(generate_exp_instance(10, 0.3, seed, starts=0).data["Q"])
        counts.append(np.count_nonzero(np.triu(Q, 1)) / 45)
    assert np.mean(counts) == pytest.approx(0.3, abs=0.05)


@pytest.mark.parametrize("dim, sparsity", [(1, 0.5), (3, 0.0), (3, 1.5)])
def test_generator_validation(dim, sparsity):
    with pytest.raises(ValueError):
        generate_exp_instance(dim, sparsity, 0, starts=0)


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin("nonlinear-9")
