"""State-vector simulation of the QHD Schrodinger equation.

Both backends share one integrator. The state is an ``n``-axis tensor (grid
axes of size ``N`` for the direct backend, registers of size ``2^r`` for the
embedded one). The potential is diagonal; the kinetic part is a sum of
commuting single-axis blocks, each exponentiated exactly through its
eigendecomposition. Steps use Strang splitting with schedule coefficients
frozen at the interval midpoint::

    psi <- e^{-i dt/2 b V} prod_axes e^{-i dt (-a/2) K_axis} e^{-i dt/2 b V} psi

With ``order=4`` (the default) every step is the symmetric triple-jump
composition of three such substeps, which is fourth order in ``dt``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .discretize import CapExceeded, DiscretizedHamiltonian
from .embedding import HamiltonianIR, ir_diagonal, register_kinetic
from .schedule import Schedule, SmoothLog

__all__ = [
    "StateVector",
    "EvolveConfig",
    "ConvergenceReport",
    "NormDrift",
    "initial_state",
    "evolve",
    "sample",
    "convergence_check",
    "total_variation",
    "dump_state",
    "load_state",
]

DIRECT_CAP = 2**20
EMBEDDED_CAP = 2**18


class NormDrift(RuntimeError):
    """Norm of the evolved state drifted beyond 1e-6; the step count is too small."""


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    shape: tuple[int, ...] = ()
    basis: str = "grid"  # "grid" (multi-index, C order) or "bits" (site 0 leftmost)
    num_qubits: int = 0

    def __post_init__(self):
        if not self.shape:
            object.__setattr__(self, "shape", (self.amplitudes.shape[0],))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def label(self, index: int) -> str:
        """Bitstring (embedded basis) or comma-joined grid multi-index (direct basis)."""
        if self.basis == "bits":
            return format(int(index), f"0{self.num_qubits}b")
        return ",".join(str(int(k)) for k in np.unravel_index(int(index), self.shape))


@dataclass(frozen=True)
class EvolveConfig:
    steps: int = 400
    seed: int = 0
    shots: int = 1000
    backend: str = "direct"
    cap: int | None = None
    order: int = 4

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        if self.backend not in ("direct", "embedded"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @property
    def dimension_cap(self) -> int:
        if self.cap is not None:
            return self.cap
        return DIRECT_CAP if self.backend == "direct" else EMBEDDED_CAP


def initial_state(dimension: int, shape: tuple[int, ...] = (), basis: str = "grid",
                  num_qubits: int = 0) -> StateVector:
    """Uniform superposition over all ``dimension`` basis states."""
    if dimension < 1:
        raise ValueError("dimension must be positive")
    amps = np.full(dimension, 1.0 / np.sqrt(dimension), dtype=complex)
    return StateVector(amps, shape or (dimension,), basis, num_qubits)


@dataclass(frozen=True, eq=False)
class _Split:
    shape: tuple[int, ...]
    potential: np.ndarray
    blocks: tuple[tuple[np.ndarray, np.ndarray], ...]  # per-axis (eigenvalues, eigenvectors)
    basis: str
    num_qubits: int = 0


def _eig(K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, U = np.linalg.eigh(K)
    return w, U


def _split(H, cap: int) -> _Split:
    if isinstance(H, DiscretizedHamiltonian):
        if H.dim > cap:
            raise CapExceeded(f"dimension {H.dim} exceeds cap {cap}")
        block = _eig(H.kinetic)
        return _Split((H.N,) * H.n, np.asarray(H.potential_tensor), (block,) * H.n, "grid")
    if isinstance(H, HamiltonianIR):
        dim = 2**H.num_qubits
        if dim > cap:
            raise CapExceeded(f"dimension {dim} exceeds cap {cap}")
        shape = (2**H.r,) * H.n
        blocks = tuple(_eig(register_kinetic(H, i)) for i in range(H.n))
        return _Split(shape, ir_diagonal(H).reshape(shape), blocks, "bits", H.num_qubits)
    raise TypeError(f"cannot evolve {type(H).__name__}")


def _apply_axis(psi: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(psi, axis, 0)
    out = (M @ moved.reshape(moved.shape[0], -1)).reshape(moved.shape)
    return np.moveaxis(out, 0, axis)


_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_TRIPLE_JUMP = (_W1, 1.0 - 2.0 * _W1, _W1)


def _strang(split: _Split, schedule: Schedule, psi: np.ndarray, t0: float, h: float) -> np.ndarray:
    a, b = schedule.coefficients(t0 + 0.5 * h)
    half = np.exp((-0.5j * h * b) * split.potential)
    psi = psi * half
    if a != 0.0:
        for axis, (w, U) in enumerate(split.blocks):
            phases = np.exp((0.5j * h * a) * w)  # exp(-i h (-a/2) w)
            psi = _apply_axis(psi, (U * phases) @ U.T, axis)
    return psi * half


def _run(split: _Split, schedule: Schedule, steps: int, psi: np.ndarray, order: int = 4) -> np.ndarray:
    dt = schedule.T / steps
    weights = _TRIPLE_JUMP if order == 4 else (1.0,)
    for s in range(steps):
        t = s * dt
        for w in weights:
            psi = _strang(split, schedule, psi, t, w * dt)
            t += w * dt
    return psi


def evolve(
    H: DiscretizedHamiltonian | HamiltonianIR,
    schedule: Schedule,
    cfg: EvolveConfig = EvolveConfig(),
    state: StateVector | None = None,
) -> StateVector:
    """Propagate from the uniform superposition (or ``state``) over ``[0, T]``."""
    split = _split(H, cfg.dimension_cap)
    dim = int(np.prod(split.shape))
    if state is None:
        state = initial_state(dim, split.shape, split.basis, split.num_qubits)
    elif state.dim != dim:
        raise ValueError(f"state has dimension {state.dim}, Hamiltonian {dim}")
    psi = _run(split, schedule, cfg.steps, state.amplitudes.reshape(split.shape), cfg.order)
    psi = psi.reshape(-1)
    drift = abs(np.linalg.norm(psi) - state.norm)
    if drift > 1e-6:
        raise NormDrift(f"norm drifted by {drift:.3e} in {cfg.steps} steps")
    return StateVector(psi, split.shape, split.basis, split.num_qubits)


def sample(state: StateVector, shots: int, seed: int | None = 0) -> np.ndarray:
    """Draw ``shots`` basis-state indices from ``|amplitude|^2``."""
    rng = np.random.default_rng(seed)
    if shots == 0:
        return np.zeros(0, dtype=np.int64)
    return rng.choice(state.dim, size=shots, p=state.probabilities).astype(np.int64)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


@dataclass(frozen=True)
class ConvergenceReport:
    steps: int
    tv_distance: float
    threshold: float = 1e-3
    seconds: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return self.tv_distance <= self.threshold


def convergence_check(
    H, schedule: Schedule, cfg: EvolveConfig = EvolveConfig(), threshold: float = 1e-3
) -> ConvergenceReport:
    """Compare outcome distributions at ``steps`` and ``2*steps``."""
    t0 = time.perf_counter()
    coarse = evolve(H, schedule, cfg)
    fine = evolve(H, schedule, replace(cfg, steps=2 * cfg.steps))
    tv = total_variation(coarse.probabilities, fine.probabilities)
    return ConvergenceReport(cfg.steps, tv, threshold, time.perf_counter() - t0)


def dump_state(path, state: StateVector) -> None:
    """int64 dimension header, then interleaved float64 real/imaginary parts."""
    amps = np.ascontiguousarray(state.amplitudes, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(np.int64(state.dim).astype("<i8").tobytes())
        fh.write(amps.view("<f8").tobytes())


def load_state(path) -> np.ndarray:
    with open(path, "rb") as fh:
        d = int(np.frombuffer(fh.read(8), dtype="<i8")[0])
        data = np.frombuffer(fh.read(), dtype="<f8")
    return (data[0::2] + 1j * data[1::2])[:d].copy()


DEFAULT_SCHEDULE = SmoothLog(gamma=1.0, T=10.0)
