"""End-to-end QHD runs, classical baselines, success probability and TTS."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .discretize import assemble_discretized
from .embedding import (
    CodewordMap,
    assemble_embedding,
    canonical_scheme,
    decode_indices,
    default_policy,
    grid_points,
)
from .evolve import EvolveConfig, evolve, sample, total_variation
from .instances import InstanceSpec
from .refine import ObjectiveFunctions, RefineConfig, best_index, refine_many
from .schedule import SmoothLog

__all__ = [
    "PipelineConfig",
    "SampleRecord",
    "RunReport",
    "success_probability",
    "tts",
    "run_instance",
    "run_baseline",
    "warmstart_comparison",
]

SUCCESS_TOL = 1e-3


def success_probability(values, f_star: float | None, tol: float = SUCCESS_TOL) -> float:
    """Fraction of results with ``f - f_star < tol``; None or NaN entries count as failures."""
    if f_star is None:
        raise ValueError("success probability needs a reference optimum f_star")
    vals = np.array(
        [np.nan if v is None else getattr(v, "f_star", v) for v in values], dtype=float
    )
    if vals.size == 0:
        raise ValueError("success probability is undefined for an empty sample set")
    ok = np.isfinite(vals) & (vals - f_star < tol)
    return float(ok.mean())


def tts(t0: float, p_s: float) -> float:
    """Time to reach 0.99 cumulative success: ``t0 * ceil(ln 0.01 / ln(1 - p_s))``.

    Returns ``math.inf`` when ``p_s == 0``.
    """
    if not 0.0 <= p_s <= 1.0:
        raise ValueError("p_s must lie in [0, 1]")
    if p_s >= 0.99:
        return t0
    if p_s == 0.0:
        return math.inf
    return t0 * math.ceil(math.log(0.01) / math.log1p(-p_s))


@dataclass(frozen=True)
class PipelineConfig:
    backend: str = "direct"
    scheme: str = "unary"
    grid: int = 17
    resolution: int = 5
    gamma: float = 1.0
    T: float = 10.0
    steps: int = 400
    shots: int = 1000
    seed: int = 0
    refine: str = "pg"
    policy: str | None = None
    auto_steps: bool = True
    max_steps: int = 25_600
    order: int = 4

    def __post_init__(self):
        object.__setattr__(self, "scheme", canonical_scheme(self.scheme))
        if self.backend not in ("direct", "embedded"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @property
    def schedule(self) -> SmoothLog:
        return SmoothLog(self.gamma, self.T)

    @property
    def N(self) -> int:
        if self.backend == "embedded":
            return grid_points(self.scheme, self.resolution)
        return self.grid

    @property
    def decode_policy(self) -> str:
        return self.policy or default_policy(self.scheme)


@dataclass(frozen=True)
class SampleRecord:
    outcome: str  # bitstring or grid multi-index
    decoded: tuple[float, ...] | None
    f_decoded: float | None
    refined: tuple[float, ...] | None
    f_refined: float | None
    success: bool | None


def _num(v):
    if v is None:
        return None
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass(eq=False)
class RunReport:
    instance: str
    method: str  # "qhd" or "baseline"
    config: dict
    samples: list[SampleRecord]
    f_star: float | None
    rejection_rate: float
    p_s: float | None
    best_f: float | None
    best_x: tuple[float, ...] | None
    convergence: dict | None = None
    timing: dict = field(default_factory=dict)

    @property
    def t0(self) -> float:
        return self.timing["t0"]

    @property
    def tts(self) -> float | None:
        return self.timing.get("tts")

    def canonical(self) -> dict:
        return {
            "instance": self.instance,
            "method": self.method,
            "config": self.config,
            "f_star": self.f_star,
            "rejection_rate": self.rejection_rate,
            "success_probability": self.p_s,
            "best_objective": self.best_f,
            "best_point": None if self.best_x is None else list(self.best_x),
            "convergence": self.convergence,
            "samples": [
                {
                    "outcome": s.outcome,
                    "decoded": None if s.decoded is None else list(s.decoded),
                    "f_decoded": s.f_decoded,
                    "refined": None if s.refined is None else list(s.refined),
                    "f_refined": s.f_refined,
                    "success": s.success,
                }
                for s in self.samples
            ],
        }

    def to_json(self) -> dict:
        timing = {k: _num(v) for k, v in self.timing.items()}
        return {"canonical": self.canonical(), "timing": timing}

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.canonical(), sort_keys=True).encode()

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))

    def write_csv(self, path) -> None:
        n = len(self.best_x) if self.best_x is not None else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["outcome"]
                + [f"decoded_{i}" for i in range(n)]
                + [f"refined_{i}" for i in range(n)]
                + ["f_decoded", "f_refined", "success"]
            )
            for s in self.samples:
                dec = list(s.decoded) if s.decoded is not None else [""] * n
                ref = list(s.refined) if s.refined is not None else [""] * n
                w.writerow(
                    [s.outcome] + dec + ref
                    + ["" if s.f_decoded is None else s.f_decoded,
                       "" if s.f_refined is None else s.f_refined,
                       "" if s.success is None else int(s.success)]
                )


def _refine_unique(spec: InstanceSpec, points: np.ndarray, cfg: RefineConfig):
    """Refine distinct rows of ``points`` once and broadcast the results back."""
    if points.shape[0] == 0:
        return [], 0.0
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    t = time.perf_counter()
    results = refine_many(spec.problem, uniq, cfg)
    elapsed = time.perf_counter() - t
    return [results[k] for k in np.asarray(inverse).reshape(-1)], elapsed


def _finish(report_args: dict, spec: InstanceSpec, refined_f: list, t0: float, timing: dict):
    p_s = success_probability(refined_f, spec.f_star) if spec.f_star is not None else None
    timing = dict(timing, t0=t0)
    timing["tts"] = tts(t0, p_s) if p_s is not None else None
    timing["t0_label"] = "simulated t0" if report_args["method"] == "qhd" else "classical t0"
    return RunReport(**report_args, p_s=p_s, timing=timing)


def _evolve_converged(H, cfg: PipelineConfig):
    """Evolve at ``cfg.steps``; with ``auto_steps`` keep doubling until two
    consecutive step counts agree to 1e-3 in total variation."""
    ecfg = EvolveConfig(
        steps=cfg.steps, seed=cfg.seed, shots=cfg.shots, backend=cfg.backend, order=cfg.order
    )
    sched = cfg.schedule
    state = evolve(H, sched, ecfg)
    drift = abs(state.norm - 1.0)
    info = {"steps": cfg.steps, "tv_distance": None, "passed": None}
    steps = cfg.steps
    while cfg.auto_steps:
        finer = evolve(H, sched, replace(ecfg, steps=2 * steps))
        drift = max(drift, abs(finer.norm - 1.0))
        tv = total_variation(state.probabilities, finer.probabilities)
        state, steps = finer, 2 * steps
        info = {"steps": steps, "tv_distance": tv, "passed": tv <= 1e-3}
        if info["passed"] or 2 * steps > cfg.max_steps:
            break
    info["norm_drift"] = drift
    return state, info


def run_instance(spec: InstanceSpec, cfg: PipelineConfig = PipelineConfig()) -> RunReport:
    """Discretize, optionally embed, evolve, sample, decode and refine one instance.

    With ``auto_steps`` the step count doubles from ``cfg.steps`` until the
    outcome distribution moves by at most 1e-3 in total variation.
    """
    if cfg.shots < 1:
        raise ValueError("success probability is undefined for an empty sample set (shots = 0)")
    p = spec.problem
    n = p.n
    dh = assemble_discretized(p, cfg.N)
    H = dh
    cmap = None
    if cfg.backend == "embedded":
        H = assemble_embedding(dh, cfg.scheme)
        cmap = CodewordMap(cfg.scheme, H.r)

    t = time.perf_counter()
    state, conv = _evolve_converged(H, cfg)
    t_evolve = time.perf_counter() - t

    outcomes = sample(state, cfg.shots, cfg.seed)
    t = time.perf_counter()
    if cmap is None:
        multi = np.stack(np.unravel_index(outcomes, state.shape), axis=1)
        points = multi / (cfg.N - 1)
        valid = np.ones(cfg.shots, dtype=bool)
    else:
        points, valid = decode_indices(outcomes, n, cmap, cfg.decode_policy)
    t_decode = time.perf_counter() - t

    fns = ObjectiveFunctions(p)
    f_decoded = np.full(cfg.shots, np.nan)
    if valid.any():
        f_decoded[valid] = fns.value(points[valid].T)
    refined, t_refine = _refine_unique(spec, points[valid], RefineConfig(method=cfg.refine))

    samples = []
    refined_f: list[float | None] = []
    it = iter(refined)
    for j in range(cfg.shots):
        label = state.label(outcomes[j])
        if not valid[j]:
            samples.append(SampleRecord(label, None, None, None, None, False if spec.f_star is not None else None))
            refined_f.append(None)
            continue
        r = next(it)
        succ = None if spec.f_star is None else bool(r.f_star - spec.f_star < SUCCESS_TOL)
        samples.append(
            SampleRecord(label, tuple(points[j].tolist()), float(f_decoded[j]),
                         tuple(r.x_star.tolist()), float(r.f_star), succ)
        )
        refined_f.append(r.f_star)

    fvals = [np.inf if v is None else v for v in refined_f]
    best_f = best_x = None
    if refined:
        b = best_index(fvals)
        best_f = float(fvals[b])
        best_x = tuple(p.to_original(np.array(samples[b].refined)).tolist())
    n_valid = int(valid.sum())
    t0 = t_evolve / cfg.shots + (t_refine / n_valid if n_valid else 0.0)
    config = asdict(cfg)
    config["N"] = cfg.N
    config["schedule"] = cfg.schedule.to_dict()
    config["decode_policy"] = cfg.decode_policy if cmap is not None else None
    return _finish(
        dict(
            instance=spec.id, method="qhd", config=config, samples=samples, f_star=spec.f_star,
            rejection_rate=1.0 - n_valid / cfg.shots, best_f=best_f, best_x=best_x,
            convergence=conv,
        ),
        spec, refined_f, t0,
        {"evolve_s": t_evolve, "decode_s": t_decode, "refine_s": t_refine},
    )


def run_baseline(
    spec: InstanceSpec, starts: int = 1000, seed: int = 0, refine: str = "pg"
) -> RunReport:
    """Refine uniformly random starts; same metrics as :func:`run_instance`."""
    p = spec.problem
    rng = np.random.default_rng(seed)
    X = rng.random((starts, p.n))
    t = time.perf_counter()
    results = refine_many(p, X, RefineConfig(method=refine))
    elapsed = time.perf_counter() - t
    samples = []
    for x0, r in zip(X, results):
        succ = None if spec.f_star is None else bool(r.f_star - spec.f_star < SUCCESS_TOL)
        samples.append(
            SampleRecord("random", tuple(x0.tolist()), r.history[0] if r.history else None,
                         tuple(r.x_star.tolist()), float(r.f_star), succ)
        )
    fvals = [r.f_star for r in results]
    best_f = best_x = None
    if results:
        b = best_index(fvals)
        best_f, best_x = float(fvals[b]), tuple(p.to_original(results[b].x_star).tolist())
    config = {"starts": starts, "seed": seed, "refine": refine}
    return _finish(
        dict(
            instance=spec.id, method="baseline", config=config, samples=samples, f_star=spec.f_star,
            rejection_rate=0.0, best_f=best_f, best_x=best_x,
        ),
        spec, fvals, elapsed / max(starts, 1), {"refine_s": elapsed},
    )


def warmstart_comparison(
    spec: InstanceSpec, cfg: PipelineConfig = PipelineConfig(), samples: int | None = None
) -> dict:
    """Objective distributions of random starts, decoded QHD samples and refined samples."""
    samples = samples or cfg.shots
    report = run_instance(spec, replace(cfg, shots=samples))
    rng = np.random.default_rng(cfg.seed)
    X = rng.random((samples, spec.problem.n))
    random_f = ObjectiveFunctions(spec.problem).value(X.T)
    decoded_f = np.array([s.f_decoded for s in report.samples if s.f_decoded is not None])
    refined_f = np.array([s.f_refined for s in report.samples if s.f_refined is not None])
    med = {
        "random": float(np.median(random_f)),
        "decoded": float(np.median(decoded_f)) if decoded_f.size else None,
        "refined": float(np.median(refined_f)) if refined_f.size else None,
    }
    return {
        "instance": spec.id,
        "samples": samples,
        "distributions": {
            "random": random_f.tolist(),
            "decoded": decoded_f.tolist(),
            "refined": refined_f.tolist(),
        },
        "medians": med,
        "decoded_beats_random": med["decoded"] is not None and med["decoded"] <= med["random"],
        "rejection_rate": report.rejection_rate,
        "success_probability": report.p_s,
    }
