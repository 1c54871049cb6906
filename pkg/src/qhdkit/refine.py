"""Box-constrained local refinement of decoded samples on the unit box."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .expr import compile_expr, differentiate
from .problem import Problem

__all__ = [
    "RefineConfig",
    "RefinementResult",
    "ObjectiveFunctions",
    "refine",
    "refine_many",
    "hessian_vector",
    "best_index",
]


@dataclass(frozen=True)
class RefineConfig:
    method: str = "projected-gradient"
    tol: float = 1e-8
    max_iters: int = 500
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 60

    def __post_init__(self):
        aliases = {"pg": "projected-gradient", "tn": "truncated-newton"}
        object.__setattr__(self, "method", aliases.get(self.method, self.method))
        if self.method not in ("projected-gradient", "truncated-newton"):
            raise ValueError(f"unknown refinement method {self.method!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class RefinementResult:
    x_star: np.ndarray
    f_star: float
    iterations: int
    converged: bool
    x0: np.ndarray
    history: tuple[float, ...] = ()


class ObjectiveFunctions:
    """Value, gradient and Hessian-vector product of a unit-box problem.

    All methods accept points of shape ``(n,)`` or stacked ``(n, S)``.
    QP problems use ``Q x + b`` and ``Q v`` directly.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self.n = problem.n

    @cached_property
    def _f(self):
        return compile_expr(self.problem.expr)

    @cached_property
    def _grad_exprs(self):
        return [differentiate(self.problem.expr, i) for i in range(self.n)]

    @cached_property
    def _grad(self):
        return [compile_expr(g) for g in self._grad_exprs]

    @cached_property
    def _hess(self):
        return [
            [compile_expr(differentiate(self._grad_exprs[i], j)) for j in range(self.n)]
            for i in range(self.n)
        ]

    def value(self, x: np.ndarray) -> np.ndarray:
        if self.problem.qp is not None:
            return self.problem.qp.value(x)
        return self._f(x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self.problem.qp is not None:
            return self.problem.qp.gradient(x)
        return np.stack([g(x) for g in self._grad])

    def hessian_vector(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.problem.qp is not None:
            return self.problem.qp.Q @ v
        out = np.zeros(np.broadcast_shapes(x.shape, v.shape))
        for i in range(self.n):
            for j in range(self.n):
                out[i] += self._hess[i][j](x) * v[j]
        return out


def hessian_vector(problem: Problem, x, v) -> np.ndarray:
    """Hessian of the objective at ``x`` applied to ``v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return ObjectiveFunctions(problem).hessian_vector(x, v)


def _projected_gradient_norm(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x - np.clip(x - g, 0.0, 1.0), axis=0)


def _pg_batch(fns: ObjectiveFunctions, X0: np.ndarray, cfg: RefineConfig):
    """Projected gradient with Armijo backtracking on columns of ``X0`` (n, S).

    The first trial step is ``cfg.initial_step``; later searches start from the
    Barzilai-Borwein step ``s.s / s.y`` of the previous move (falling back to
    ``initial_step`` when ``s.y <= 0``). Acceptance stays monotone, so this only
    avoids the slow oscillation a fixed unit trial step causes on stiff problems.
    """
    x = np.clip(X0, 0.0, 1.0)
    f = fns.value(x)
    g = fns.gradient(x)
    S = x.shape[1]
    iters = np.zeros(S, dtype=int)
    active = np.isfinite(f) & np.all(np.isfinite(g), axis=0)
    history = [[float(v)] for v in f]
    trial_step = np.full(S, cfg.initial_step)
    for _ in range(cfg.max_iters):
        pgn = _projected_gradient_norm(x, g)
        active &= pgn > cfg.tol
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xa, fa, ga = x[:, idx], f[idx], g[:, idx]
        alpha = trial_step[idx].copy()
        accepted = np.zeros(idx.size, dtype=bool)
        x_new, f_new = xa.copy(), fa.copy()
        for _ in range(cfg.max_backtracks):
            todo = ~accepted
            if not todo.any():
                break
            trial = np.clip(xa[:, todo] - alpha[todo] * ga[:, todo], 0.0, 1.0)
            ft = fns.value(trial)
            decrease = np.sum(ga[:, todo] * (trial - xa[:, todo]), axis=0)
            ok = np.isfinite(ft) & (ft <= fa[todo] + cfg.armijo_c * decrease) & (ft <= fa[todo])
            sel = np.nonzero(todo)[0]
            x_new[:, sel[ok]] = trial[:, ok]
            f_new[sel[ok]] = ft[ok]
            accepted[sel[ok]] = True
            alpha[sel[~ok]] *= cfg.backtrack
        stalled = idx[~accepted]
        active[stalled] = False
        moved = idx[accepted]
        if moved.size:
            x[:, moved] = x_new[:, accepted]
            f[moved] = f_new[accepted]
            gn = fns.gradient(x[:, moved])
            bad = ~np.all(np.isfinite(gn), axis=0)
            step = x_new[:, accepted] - xa[:, accepted]
            sy = np.sum(step * (gn - ga[:, accepted]), axis=0)
            ss = np.sum(step * step, axis=0)
            with np.errstate(divide="ignore", invalid="ignore"):
                bb = np.where(sy > 0, ss / sy, cfg.initial_step)
            trial_step[moved] = np.clip(np.nan_to_num(bb, nan=cfg.initial_step), 1e-10, 1e10)
            g[:, moved] = gn
            active[moved[bad]] = False
            iters[moved] += 1
            for j in moved:
                history[j].append(float(f[j]))
    pgn = _projected_gradient_norm(x, g)
    converged = np.isfinite(pgn) & (pgn <= cfg.tol)
    return x, f, iters, converged, history


def _tn_single(fns: ObjectiveFunctions, x0: np.ndarray, cfg: RefineConfig):
    """Projected Newton-CG: CG on the free variables, projected Armijo search."""
    n = x0.shape[0]
    x = np.clip(x0, 0.0, 1.0)
    f = float(fns.value(x))
    g = fns.gradient(x)
    history = [f]
    it = 0
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        return x, f, 0, False, history
    while it < cfg.max_iters:
        if _projected_gradient_norm(x, g) <= cfg.tol:
            break
        bound = ((x <= 0.0) & (g > 0)) | ((x >= 1.0) & (g < 0))
        free = ~bound
        d = np.zeros(n)
        r = -g * free
        p = r.copy()
        rr = r @ r
        for _ in range(max(n, 1) * 2):
            Hp = fns.hessian_vector(x, p) * free
            curv = p @ Hp
            if not np.isfinite(curv) or curv <= 1e-14 * (p @ p):
                if not d.any():
                    d = r.copy()
                break
            step = rr / curv
            d += step * p
            r -= step * Hp
            rr_new = r @ r
            if np.sqrt(rr_new) <= 1e-12 * max(1.0, np.linalg.norm(g)):
                break
            p = r + (rr_new / rr) * p
            rr = rr_new
        d = np.where(bound, -g, d)
        if g @ d >= 0:
            d = -g
        alpha = cfg.initial_step
        moved = False
        for _ in range(cfg.max_backtracks):
            trial = np.clip(x + alpha * d, 0.0, 1.0)
            ft = float(fns.value(trial))
            dec = g @ (trial - x)
            if np.isfinite(ft) and dec < 0 and ft <= f + cfg.armijo_c * dec:
                moved = True
                break
            alpha *= cfg.backtrack
        if not moved:
            # fall back to a projected gradient step
            alpha = cfg.initial_step
            for _ in range(cfg.max_backtracks):
                trial = np.clip(x - alpha * g, 0.0, 1.0)
                ft = float(fns.value(trial))
                dec = g @ (trial - x)
                if np.isfinite(ft) and ft <= f + cfg.armijo_c * dec and ft <= f:
                    moved = True
                    break
                alpha *= cfg.backtrack
        if not moved:
            break
        x, f = trial, ft
        g = fns.gradient(x)
        it += 1
        history.append(f)
        if not np.all(np.isfinite(g)):
            break
    pgn = _projected_gradient_norm(x, g)
    return x, f, it, bool(np.isfinite(pgn) and pgn <= cfg.tol), history


def refine_many(
    problem: Problem,
    starts: np.ndarray,
    cfg: RefineConfig = RefineConfig(),
    fns: ObjectiveFunctions | None = None,
) -> list[RefinementResult]:
    """Refine each row of ``starts`` (shape ``(S, n)``) independently."""
    if not problem.bounds.is_unit:
        raise ValueError("refinement works on unit-box problems")
    fns = fns or ObjectiveFunctions(problem)
    X0 = np.atleast_2d(np.asarray(starts, dtype=float))
    if X0.shape[1] != problem.n:
        raise ValueError(f"starts have {X0.shape[1]} coordinates, problem has {problem.n}")
    if np.any(X0 < 0) or np.any(X0 > 1):
        raise ValueError("start points must lie in the unit box")
    if X0.shape[0] == 0:
        return []
    out = []
    if cfg.method == "projected-gradient":
        x, f, iters, conv, hist = _pg_batch(fns, X0.T.copy(), cfg)
        for j in range(X0.shape[0]):
            out.append(
                RefinementResult(x[:, j].copy(), float(f[j]), int(iters[j]), bool(conv[j]),
                                 X0[j].copy(), tuple(hist[j]))
            )
        return out
    for x0 in X0:
        x, f, it, conv, hist = _tn_single(fns, x0, cfg)
        out.append(RefinementResult(x, f, it, conv, x0.copy(), tuple(hist)))
    return out


def refine(problem: Problem, x0, cfg: RefineConfig = RefineConfig()) -> RefinementResult:
    """Local box-constrained descent from ``x0``; never increases the objective."""
    return refine_many(problem, np.asarray(x0, dtype=float)[None, :], cfg)[0]


def best_index(values, tie_tol: float = 1e-12) -> int:
    """Index of the smallest value; near-ties go to the earliest index."""
    values = np.asarray(values, dtype=float)
    finite = np.where(np.isfinite(values), values, np.inf)
    lo = finite.min()
    return int(np.nonzero(finite <= lo + tie_tol)[0][0])
