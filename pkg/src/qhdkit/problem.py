"""Box-constrained separable problems, built from QP data or expressions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .expr import (
    Expr,
    SeparableObjective,
    add,
    const,
    extract_separable,
    mul,
    parse,
    var,
)

__all__ = [
    "BoxBounds",
    "QPData",
    "Problem",
    "from_qp",
    "from_expr",
    "normalize_to_unit_box",
    "load_problem",
    "problem_from_dict",
]


@dataclass(frozen=True)
class BoxBounds:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper bounds differ in length")
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError(f"bounds of variable {i} must be finite")
            if not lo < hi:
                raise ValueError(f"need L < U for variable {i}, got [{lo}, {hi}]")

    @classmethod
    def unit(cls, n: int) -> "BoxBounds":
        return cls((0.0,) * n, (1.0,) * n)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "BoxBounds":
        return cls(tuple(float(p[0]) for p in pairs), tuple(float(p[1]) for p in pairs))

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def is_unit(self) -> bool:
        return all(lo == 0.0 for lo in self.lower) and all(hi == 1.0 for hi in self.upper)


@dataclass(frozen=True, eq=False)
class QPData:
    """Objective ``0.5 x^T Q x + b^T x (+ constant)`` with symmetric ``Q``."""

    Q: np.ndarray
    b: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if b.shape[0] != Q.shape[0]:
            raise ValueError(f"b has length {b.shape[0]} but Q is {Q.shape[0]}x{Q.shape[0]}")
        if not np.array_equal(Q, Q.T):
            raise ValueError("Q must be symmetric")
        Q.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def value(self, x: np.ndarray) -> np.ndarray:
        """Objective at ``x`` of shape ``(n,)`` or ``(n, S)``."""
        return 0.5 * np.sum(x * (self.Q @ x), axis=0) + self.b @ x + self.constant

    def gradient(self, x: np.ndarray) -> np.ndarray:
        g = self.Q @ x
        return g + (self.b if x.ndim == 1 else self.b[:, None])


@dataclass(frozen=True, eq=False)
class Problem:
    """Separable objective on a box.

    ``scale`` and ``offset`` record the affine map from unit-box coordinates
    ``u`` to original coordinates ``x = offset + scale * u``. Once
    ``normalized`` is set the objective is expressed in ``u`` and ``bounds`` is
    the unit box.
    """

    objective: SeparableObjective
    bounds: BoxBounds
    qp: QPData | None = None
    names: tuple[str, ...] = ()
    normalized: bool = False
    scale: np.ndarray = field(default=None)
    offset: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.bounds.n != self.objective.n:
            raise ValueError(
                f"objective has {self.objective.n} variables, bounds have {self.bounds.n}"
            )
        if self.scale is None:
            lo = np.array(self.bounds.lower)
            object.__setattr__(self, "scale", np.array(self.bounds.upper) - lo)
            object.__setattr__(self, "offset", lo)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i}" for i in range(self.n)))

    @property
    def n(self) -> int:
        return self.objective.n

    @cached_property
    def expr(self) -> Expr:
        return self.objective.reassemble()

    def to_original(self, u) -> np.ndarray:
        """Map unit-box coordinates back to the original box."""
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            return self.offset + self.scale * u
        return self.offset[:, None] + self.scale[:, None] * u

    def to_unit(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return (x - self.offset) / self.scale
        return (x - self.offset[:, None]) / self.scale[:, None]


def from_qp(qp: QPData, bounds: BoxBounds | None = None, names: Sequence[str] = ()) -> Problem:
    """Decompose ``0.5 x^T Q x + b^T x`` into univariate and pairwise terms.

    Each variable gets ``0.5 Q_ii x_i^2 + b_i x_i``; each nonzero ``Q_kl`` with
    ``k < l`` becomes the pair ``(Q_kl x_k) * x_l``.
    """
    n = qp.n
    bounds = bounds or BoxBounds.unit(n)
    if bounds.n != n:
        raise ValueError(f"QP has {n} variables, bounds have {bounds.n}")
    uni = []
    for i in range(n):
        xi = var(i)
        g = add(mul(const(0.5 * qp.Q[i, i]), mul(xi, xi)), mul(const(qp.b[i]), xi))
        if not g.is_const:
            uni.append((i, g))
    bi = []
    rows, cols = np.nonzero(np.triu(qp.Q, 1))
    for k, l in zip(rows.tolist(), cols.tolist()):
        bi.append((k, l, mul(const(qp.Q[k, l]), var(k)), var(l)))
    obj = SeparableObjective(n, tuple(uni), tuple(bi), float(qp.constant))
    return Problem(obj, bounds, qp=qp, names=tuple(names))


def from_expr(e: Expr, bounds: BoxBounds, names: Sequence[str] = ()) -> Problem:
    return Problem(extract_separable(e, bounds.n), bounds, names=tuple(names))


def normalize_to_unit_box(p: Problem) -> Problem:
    """Rewrite the objective in unit-box coordinates ``x_i = L_i + (U_i - L_i) u_i``."""
    if p.normalized:
        return p
    n = p.n
    lo, scale = p.offset, p.scale
    identity = bool(np.all(lo == 0.0) and np.all(scale == 1.0))
    if identity:
        obj = p.objective
    else:
        mapping = {
            i: add(const(lo[i]), mul(const(scale[i]), var(i))) for i in range(n)
        }
        obj = p.objective.substitute(mapping)
    qp = None
    if p.qp is not None:
        Q, b = p.qp.Q, p.qp.b
        qp = QPData(
            Q * np.outer(scale, scale),
            scale * (Q @ lo + b),
            p.qp.constant + 0.5 * lo @ Q @ lo + b @ lo,
        )
    return Problem(
        obj,
        BoxBounds.unit(n),
        qp=qp,
        names=p.names,
        normalized=True,
        scale=p.scale.copy(),
        offset=p.offset.copy(),
    )


def problem_from_dict(doc: dict) -> Problem:
    """Build a problem from the QP schema ``{"Q", "b", "bounds"}`` or the
    symbolic schema ``{"vars", "expr", "bounds"}``. Missing bounds mean the unit box."""
    if "Q" in doc:
        qp = QPData(np.array(doc["Q"], dtype=float), np.array(doc["b"], dtype=float))
        bounds = BoxBounds.from_pairs(doc["bounds"]) if "bounds" in doc else None
        return from_qp(qp, bounds, doc.get("vars", ()))
    if "expr" in doc:
        names = list(doc["vars"])
        bounds = (
            BoxBounds.from_pairs(doc["bounds"])
            if "bounds" in doc
            else BoxBounds.unit(len(names))
        )
        return from_expr(parse(doc["expr"], names), bounds, names)
    raise ValueError('problem document needs either "Q"/"b" or "vars"/"expr"')


def load_problem(path: str | Path) -> Problem:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))
