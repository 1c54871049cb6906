import itertools
import math

import numpy as np
import pytest

from qhdkit.discretize import (
    CapExceeded,
    Grid,
    assemble_discretized,
    dump_matrix,
    kinetic_offdiag,
    load_matrix,
    materialize,
    potential_diag,
)
from qhdkit.expr import compile_expr, parse
from qhdkit.instances import BUILTIN_IDS, builtin
from qhdkit.problem import BoxBounds, from_expr
from qhdkit.schedule import ConstantSchedule, SmoothLog

KINETIC_ONLY = ConstantSchedule(1.0, 0.0)
POTENTIAL_ONLY = ConstantSchedule(0.0, 1.0)


def test_grid_spacing_and_nodes():
    g = Grid(5)
    assert g.h == 0.25
    np.testing.assert_array_equal(g.nodes, [0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        Grid(2)


def test_offdiag_n3():
    L = kinetic_offdiag(Grid(3))
    np.testing.assert_array_equal(L, [[0, 4, 0], [4, 0, 4], [0, 4, 0]])


@pytest.mark.parametrize("N", range(3, 13))
def test_offdiag_structure(N):
    L = kinetic_offdiag(Grid(N))
    assert np.array_equal(L, L.T) and not np.diag(L).any()
    assert np.count_nonzero(L) == 2 * (N - 1)
    assert np.count_nonzero(np.triu(L, 2)) == 0


def test_offdiag_eigenvalues_n3():
    h = 0.5
    w = np.linalg.eigvalsh(kinetic_offdiag(Grid(3)))
    np.testing.assert_allclose(w, [-math.sqrt(2) / h**2, 0, math.sqrt(2) / h**2], atol=1e-12)


@pytest.mark.parametrize("text, N, expected", [
    ("x", 3, [0, 0.5, 1]),
    ("x^2", 5, [0, 1 / 16, 1 / 4, 9 / 16, 1]),
    ("exp(4*x)", 3, [1, math.e**2, math.e**4]),
])
def test_potential_diag(text, N, expected):
    np.testing.assert_allclose(potential_diag(parse(text, ["x"]), Grid(N)), expected, rtol=1e-15)


def _f_on_grid(spec, N):
    f = compile_expr(spec.problem.expr)
    n = spec.problem.n
    pts = np.array(list(itertools.product(range(N), repeat=n))).T / (N - 1)
    return f(pts)


def test_qp_n3_diagonal_is_f_on_grid():
    spec = builtin("qp-2d")
    H = materialize(assemble_discretized(spec.problem, 3), POTENTIAL_ONLY, 0.0)
    assert H.shape == (9, 9)
    np.testing.assert_allclose(np.diag(H), _f_on_grid(spec, 3), atol=1e-12)
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


@pytest.mark.parametrize("iid", BUILTIN_IDS)
@pytest.mark.parametrize("N", [3, 6])
def test_diagonal_identity_on_builtins(iid, N):
    spec = builtin(iid)
    dh = assemble_discretized(spec.problem, N)
    np.testing.assert_allclose(dh.potential_tensor.ravel(), _f_on_grid(spec, N), atol=1e-12)
    assert len(dh.univariate) <= dh.n and len(dh.bivariate) == spec.problem.objective.m


def test_zero_objective_is_pure_kinetic():
    p = from_expr(parse("0", ["x"]), BoxBounds.unit(1))
    dh = assemble_discretized(p, 6)
    for t in (0.0, 2.0):
        a, _ = SmoothLog().coefficients(t)
        np.testing.assert_allclose(materialize(dh, SmoothLog(), t), -0.5 * a * dh.kinetic)


def test_kinetic_only_is_kron_sum():
    dh = assemble_discretized(builtin("qp-2d").problem, 4)
    L, I = dh.kinetic, np.eye(4)
    expected = -0.5 * (np.kron(L, I) + np.kron(I, L))
    np.testing.assert_array_equal(materialize(dh, KINETIC_ONLY, 0.0), expected)


def test_instance_four_small_is_symmetric():
    H = materialize(assemble_discretized(builtin("nonlinear-4").problem, 3), SmoothLog(), 1.3)
    assert H.shape == (27, 27)
    np.testing.assert_array_equal(H, H.T)


@pytest.mark.parametrize("iid", BUILTIN_IDS)
def test_hermitian_at_random_times(iid, rng):
    dh = assemble_discretized(builtin(iid).problem, 4)
    for t in rng.uniform(0, 10, 3):
        H = materialize(dh, SmoothLog(), t)
        assert np.abs(H - H.T).max() <= 1e-14


def test_qp_ground_state_leans_toward_minimizer():
    # At N = 5 the kinetic scale 1/h^2 = 16 dwarfs the potential range, so the
    # ground state is broad; its mass is still biased toward the corner (0, 1).
    dh = assemble_discretized(builtin("qp-2d").problem, 5)
    w, V = np.linalg.eigh(materialize(dh, ConstantSchedule(1.0, 1.0), 0.0))
    prob = (V[:, 0] ** 2).reshape(5, 5)  # prob[ix, iy]
    assert prob[:2].sum() > prob[3:].sum()  # x < 1/2 beats x > 1/2
    assert prob[:, 3:].sum() > prob[:, :2].sum()  # y > 1/2 beats y < 1/2
    quadrants = [prob[:3, 2:].sum(), prob[:3, :3].sum(), prob[2:, :3].sum(), prob[2:, 2:].sum()]
    assert np.argmax(quadrants) == 0


@pytest.mark.parametrize("iid", ["nonlinear-1", "nonlinear-3", "nonlinear-4", "qp-2d"])
def test_grid_refinement_approaches_minimum(iid):
    spec = builtin(iid)
    errors = [dh.potential_tensor.min() - spec.f_star
              for dh in (assemble_discretized(spec.problem, N) for N in (3, 5, 9, 17))]
    assert all(e >= -1e-12 for e in errors)
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_cap_exceeded():
    dh = assemble_discretized(builtin("nonlinear-4").problem, 5)
    with pytest.raises(CapExceeded):
        materialize(dh, SmoothLog(), 0.0, cap=100)


def test_matrix_dump_round_trip(tmp_path):
    H = materialize(assemble_discretized(builtin("qp-2d").problem, 3), SmoothLog(), 0.7)
    path = tmp_path / "h.bin"
    dump_matrix(path, H)
    raw = path.read_bytes()
    assert int(np.frombuffer(raw[:8], "<i8")[0]) == 9 and len(raw) == 8 + 81 * 8
    np.testing.assert_array_equal(load_matrix(path), H)


def test_unnormalized_problem_rejected():
    p = from_expr(parse("x", ["x"]), BoxBounds((0.0,), (2.0,)))
    with pytest.raises(ValueError):
        assemble_discretized(p, 5)
