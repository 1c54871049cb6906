"""Built-in benchmark instances and seeded instance generators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import SeparableObjective, add, const, exp, mul, neg, parse, var
from .problem import BoxBounds, Problem, QPData, from_expr, from_qp, normalize_to_unit_box
from .refine import RefineConfig, refine_many

__all__ = [
    "InstanceSpec",
    "BUILTIN_IDS",
    "builtin",
    "builtin_instances",
    "generate_exp_instance",
    "generate_qp_instance",
    "multistart_minimum",
    "instance_from_problem",
]


@dataclass(frozen=True, eq=False)
class InstanceSpec:
    id: str
    source: str  # builtin-suite | builtin-example | generated-exp | generated-qp | user-file
    problem: Problem
    f_star: float | None = None
    provenance: str | None = None  # "published" or "derived"
    published_value: float | None = None
    description: str = ""
    data: dict = field(default_factory=dict)


# Reference minima were computed with a dense-grid search followed by bounded
# quasi-Newton polish; ``published_value`` is the best-found objective as printed
# (three decimals).
_NONLINEAR = {
    "nonlinear-1": (
        "-4*x^2 + 3*x*y - 2*y^2 + 3*x - y",
        ("x", "y"),
        -3.0,
        -3.0,
    ),
    "nonlinear-2": (
        "-2*(x - 1/3)^2 + y^2 - 1/3*y*log(3*x + 1/2) + 5*(x^2 - y^2 - x - 1/2)^2",
        ("x", "y"),
        0.3538526034735511,
        0.354,
    ),
    "nonlinear-3": (
        "y^1.5 - exp(4*x)*(y - 3/4)",
        ("x", "y"),
        -12.649537508286059,
        -12.650,
    ),
    "nonlinear-4": (
        "(2*y - 1)^2*(z - 2/5) - (2*x - 1)*z + y*(2*x - 3/2)^2",
        ("x", "y", "z"),
        -0.8815104166666667,
        -0.882,
    ),
    "nonlinear-5": (
        "2*exp(-x)*(2*z - 1)^2 - 3*(2*y - 7/10)^2*exp(-z) + log(x + 1)*(y - 4/5)",
        ("x", "y", "z"),
        -4.1956116815451265,
        -4.196,
    ),
}

BUILTIN_IDS = tuple(_NONLINEAR) + ("qp-2d", "exp-2d")


def builtin(instance_id: str) -> InstanceSpec:
    if instance_id in _NONLINEAR:
        text, names, f_star, printed = _NONLINEAR[instance_id]
        p = from_expr(parse(text, names), BoxBounds.unit(len(names)), names)
        return InstanceSpec(
            instance_id, "builtin-suite", normalize_to_unit_box(p), f_star, "published", printed, text
        )
    if instance_id == "qp-2d":
        qp = QPData(np.array([[-2.0, 1.0], [1.0, -1.0]]), np.array([0.75, -0.25]))
        p = from_qp(qp, BoxBounds.unit(2), ("x", "y"))
        # minimum at the corner (0, 1); confirmed by grid search
        return InstanceSpec(
            "qp-2d", "builtin-example", normalize_to_unit_box(p), -0.75, "derived", None,
            "-x^2 + x*y - 1/2*y^2 + 3/4*x - 1/4*y",
            {"Q": qp.Q.tolist(), "b": qp.b.tolist()},
        )
    if instance_id == "exp-2d":
        text, names, f_star, printed = _NONLINEAR["nonlinear-3"]
        p = from_expr(parse(text, names), BoxBounds.unit(2), names)
        return InstanceSpec(
            "exp-2d", "builtin-example", normalize_to_unit_box(p), f_star, "published", printed, text
        )
    raise KeyError(f"unknown builtin instance {instance_id!r}; choose from {BUILTIN_IDS}")


def builtin_instances() -> list[InstanceSpec]:
    return [builtin(i) for i in BUILTIN_IDS]


def multistart_minimum(
    problem: Problem, starts: int = 10_000, seed: int = 0, tol: float = 1e-12
) -> float:
    """Best objective over refinements from uniform random starts."""
    rng = np.random.default_rng(seed)
    X = rng.random((starts, problem.n))
    cfg = RefineConfig(tol=tol, max_iters=2000)
    results = refine_many(problem, X, cfg)
    return float(min(r.f_star for r in results))


def _random_symmetric(rng: np.random.Generator, dim: int, sparsity: float) -> np.ndarray:
    Q = np.diag(rng.uniform(-1.0, 1.0, dim))
    for i in range(dim):
        for j in range(i + 1, dim):
            if rng.random() < sparsity:
                Q[i, j] = Q[j, i] = rng.uniform(-1.0, 1.0)
    return Q


def _check_generator_args(dim: int, sparsity: float) -> None:
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if not 0 < sparsity <= 1:
        raise ValueError("sparsity must lie in (0, 1]")


def exp_objective(Q: np.ndarray, b: np.ndarray) -> SeparableObjective:
    """``1/2 sum_ij Q_ij e^{x_i} e^{x_j} + sum_i b_i e^{-x_i}`` in separable form."""
    dim = len(b)
    uni = []
    for i in range(dim):
        xi = var(i)
        g = add(mul(const(0.5 * Q[i, i]), exp(mul(const(2.0), xi))), mul(const(b[i]), exp(neg(xi))))
        if not g.is_const:
            uni.append((i, g))
    bi = []
    for i in range(dim):
        for j in range(i + 1, dim):
            if Q[i, j] != 0.0:
                bi.append((i, j, mul(const(Q[i, j]), exp(var(i))), exp(var(j))))
    return SeparableObjective(dim, tuple(uni), tuple(bi))


def generate_exp_instance(
    dim: int, sparsity: float, seed: int, starts: int = 10_000
) -> InstanceSpec:
    """Random exponential instance with sparse symmetric ``Q``.

    Off-diagonal pairs are nonzero with probability ``sparsity``; nonzero
    entries of ``Q`` and all of ``b`` are uniform in ``[-1, 1]``. The reference
    minimum comes from ``starts`` refined random starts and is not certified.
    """
    _check_generator_args(dim, sparsity)
    rng = np.random.default_rng(seed)
    Q = _random_symmetric(rng, dim, sparsity)
    b = rng.uniform(-1.0, 1.0, dim)
    p = Problem(exp_objective(Q, b), BoxBounds.unit(dim), normalized=True)
    f_star = multistart_minimum(p, starts, seed) if starts else None
    return InstanceSpec(
        f"exp-d{dim}-s{sparsity:g}-seed{seed}", "generated-exp", p, f_star,
        "derived" if starts else None, None, "exponential family",
        {"Q": Q.tolist(), "b": b.tolist()},
    )


def generate_qp_instance(
    dim: int, sparsity: float, seed: int, starts: int = 10_000
) -> InstanceSpec:
    _check_generator_args(dim, sparsity)
    rng = np.random.default_rng(seed)
    Q = _random_symmetric(rng, dim, sparsity)
    b = rng.uniform(-1.0, 1.0, dim)
    p = normalize_to_unit_box(from_qp(QPData(Q, b)))
    f_star = multistart_minimum(p, starts, seed) if starts else None
    return InstanceSpec(
        f"qp-d{dim}-s{sparsity:g}-seed{seed}", "generated-qp", p, f_star,
        "derived" if starts else None, None, "sparse box QP",
        {"Q": Q.tolist(), "b": b.tolist()},
    )


def instance_from_problem(
    problem: Problem, instance_id: str = "user", f_star: float | None = None
) -> InstanceSpec:
    return InstanceSpec(
        instance_id, "user-file", normalize_to_unit_box(problem), f_star,
        "user" if f_star is not None else None,
    )
