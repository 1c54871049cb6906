"""Qubit-level Hamiltonian embedding of the discretized QHD Hamiltonian.

Each variable ``i`` owns a register of ``r`` qubits at sites
``i*r .. i*r + r - 1``. Bits are indexed left to right from 0; in a basis
state index the leftmost bit (site 0) is the most significant.

Per-register blocks (``g_k = g(k h)``)::

    scheme   r      kinetic L'                         potential D(g)
    unary    N-1    sum_k X_k / h^2                    sum_k (g_{r-k} - g_{r-k-1}) n_k + g_0
    onehot   N      sum_k (X_k X_k+1 + Y_k Y_k+1)/2h^2 sum_k g_{r-1-k} n_k
    hamming  N-1    sum_k X_k / h^2                    a E2 + b E1 + c   (g = a x^2 + b x + c)

with ``E1 = (1/r) sum_k n_k`` and ``E2 = E1^2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .discretize import CapExceeded, DiscretizedHamiltonian, Grid, potential_diag
from .expr import Expr, polynomial_coefficients
from .schedule import Schedule, schedule_from_dict

__all__ = [
    "SCHEMES",
    "PauliTerm",
    "HamiltonianIR",
    "CodewordMap",
    "HammingUnsupported",
    "OneHotNotAnnealable",
    "canonical_scheme",
    "qubits_per_variable",
    "grid_points",
    "embed_block",
    "assemble_embedding",
    "codeword_map",
    "restrict_to_codewords",
    "decode",
    "decode_indices",
    "encode",
    "ir_matrix",
    "ir_diagonal",
    "register_kinetic",
    "export_annealer",
    "ir_to_json",
    "ir_from_json",
]

SCHEMES = ("unary", "onehot", "hamming")
OPS = ("X", "Y", "Num")


class HammingUnsupported(ValueError):
    """Hamming potentials exist only for quadratic univariate functions."""


class OneHotNotAnnealable(ValueError):
    """One-hot kinetic terms (XX + YY) cannot be expressed on an annealer."""


def canonical_scheme(scheme: str) -> str:
    s = scheme.lower().replace("-", "").replace("_", "")
    if s not in SCHEMES:
        raise ValueError(f"unknown embedding scheme {scheme!r}")
    return s


def qubits_per_variable(scheme: str, N: int) -> int:
    return N if canonical_scheme(scheme) == "onehot" else N - 1


def grid_points(scheme: str, r: int) -> int:
    return r if canonical_scheme(scheme) == "onehot" else r + 1


@dataclass(frozen=True)
class PauliTerm:
    coeff: float
    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "coeff", float(self.coeff))
        if not np.isfinite(self.coeff) or self.coeff == 0.0:
            raise ValueError("term coefficient must be finite and nonzero")
        sites = [s for s, _ in self.factors]
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValueError("term sites must be strictly increasing")
        if any(op not in OPS for _, op in self.factors):
            raise ValueError(f"operators must be among {OPS}")

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.factors)

    def shifted(self, offset: int) -> "PauliTerm":
        return PauliTerm(self.coeff, tuple((s + offset, op) for s, op in self.factors))

    def to_json(self) -> dict:
        return {"coeff": self.coeff, "ops": [[s, op] for s, op in self.factors]}

    @classmethod
    def from_json(cls, doc: dict) -> "PauliTerm":
        return cls(doc["coeff"], tuple((int(s), str(op)) for s, op in doc["ops"]))


# Diagonal operators as {sorted site tuple: coefficient}; () is the identity.
NumberPoly = dict


def _poly_add(acc: NumberPoly, other: NumberPoly, scale: float = 1.0) -> None:
    for key, c in other.items():
        acc[key] = acc.get(key, 0.0) + scale * c


def _poly_mul(a: NumberPoly, b: NumberPoly) -> NumberPoly:
    out: NumberPoly = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = tuple(sorted(set(ka) | set(kb)))  # n_k^2 = n_k
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _poly_shift(p: NumberPoly, offset: int) -> NumberPoly:
    return {tuple(s + offset for s in key): c for key, c in p.items()}


def _kinetic_terms(scheme: str, grid: Grid) -> list[PauliTerm]:
    r = qubits_per_variable(scheme, grid.N)
    w = 1.0 / grid.h**2
    if scheme == "onehot":
        terms = []
        for k in range(r - 1):
            terms.append(PauliTerm(w / 2, ((k, "X"), (k + 1, "X"))))
            terms.append(PauliTerm(w / 2, ((k, "Y"), (k + 1, "Y"))))
        return terms
    return [PauliTerm(w, ((k, "X"),)) for k in range(r)]


def _potential_poly(scheme: str, g: Expr, grid: Grid) -> NumberPoly:
    N = grid.N
    r = qubits_per_variable(scheme, N)
    if scheme == "hamming":
        coeffs = polynomial_coefficients(g)
        if coeffs is None:
            raise HammingUnsupported(f"{g} is not a polynomial")
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        if len(coeffs) > 3:
            raise HammingUnsupported(f"{g} has degree {len(coeffs) - 1} > 2")
        c0, c1, c2 = (coeffs + [0.0, 0.0, 0.0])[:3]
        poly: NumberPoly = {(): c0}
        for k in range(r):
            poly[(k,)] = c1 / r + c2 / r**2
        for k, l in itertools.combinations(range(r), 2):
            poly[(k, l)] = 2.0 * c2 / r**2
        return poly
    vals = potential_diag(g, grid)
    if scheme == "unary":
        poly = {(k,): vals[r - k] - vals[r - k - 1] for k in range(r)}
        poly[()] = vals[0]
        return poly
    return {(k,): vals[r - 1 - k] for k in range(r)}


def _poly_terms(poly: NumberPoly) -> tuple[list[PauliTerm], float]:
    terms = []
    for key in sorted(poly, key=lambda k: (len(k), k)):
        c = float(poly[key])
        if key == () or c == 0.0:
            continue
        terms.append(PauliTerm(c, tuple((s, "Num") for s in key)))
    return terms, float(poly.get((), 0.0))


def embed_block(
    scheme: str, kind: str, grid: Grid, g: Expr | None = None
) -> tuple[list[PauliTerm], float]:
    """Embed ``L'`` (``kind="kinetic"``) or ``D(g)`` (``kind="potential"``) on one register.

    Returns the term list on sites ``0..r-1`` and the identity coefficient.
    """
    scheme = canonical_scheme(scheme)
    if kind == "kinetic":
        return _kinetic_terms(scheme, grid), 0.0
    if kind == "potential":
        if g is None:
            raise ValueError("potential block needs a function g")
        return _poly_terms(_potential_poly(scheme, g, grid))
    raise ValueError(f"kind must be 'kinetic' or 'potential', got {kind!r}")


@dataclass(frozen=True, eq=False)
class HamiltonianIR:
    """Scheduled qubit Hamiltonian.

    ``H(t) = e^{phi_t} * (-1/2) * sum(kinetic) + e^{chi_t} * (sum(potential) + offset)``.
    """

    scheme: str
    n: int
    r: int
    N: int
    kinetic: tuple[PauliTerm, ...]
    potential: tuple[PauliTerm, ...]
    offset: float = 0.0

    @property
    def num_qubits(self) -> int:
        return self.n * self.r

    def register(self, i: int) -> range:
        return range(i * self.r, (i + 1) * self.r)


def assemble_embedding(dh: DiscretizedHamiltonian, scheme: str) -> HamiltonianIR:
    """Place per-variable blocks on registers; pair terms become products of blocks."""
    scheme = canonical_scheme(scheme)
    grid = dh.grid
    r = qubits_per_variable(scheme, grid.N)
    block = _kinetic_terms(scheme, grid)
    kinetic = tuple(t.shifted(i * r) for i in range(dh.n) for t in block)
    poly: NumberPoly = {(): float(dh.constant)}
    for i, g, _ in dh.univariate:
        _poly_add(poly, _poly_shift(_potential_poly(scheme, g, grid), i * r))
    for k, l, p, q, _, _ in dh.bivariate:
        pk = _poly_shift(_potential_poly(scheme, p, grid), k * r)
        ql = _poly_shift(_potential_poly(scheme, q, grid), l * r)
        _poly_add(poly, _poly_mul(pk, ql))
    terms, offset = _poly_terms(poly)
    return HamiltonianIR(scheme, dh.n, r, grid.N, kinetic, tuple(terms), offset)


# -- codewords and decoding --------------------------------------------------


@dataclass(frozen=True)
class CodewordMap:
    """Valid register bitstrings and the grid index each one encodes."""

    scheme: str
    r: int

    def __post_init__(self):
        object.__setattr__(self, "scheme", canonical_scheme(self.scheme))
        if self.r < 1:
            raise ValueError("register size must be positive")

    @property
    def N(self) -> int:
        return grid_points(self.scheme, self.r)

    def encode(self, j: int) -> str:
        """Canonical codeword of grid index ``j``."""
        r = self.r
        if not 0 <= j < self.N:
            raise ValueError(f"grid index {j} outside 0..{self.N - 1}")
        if self.scheme == "onehot":
            k = r - 1 - j
            return "0" * k + "1" + "0" * (r - 1 - k)
        return "0" * (r - j) + "1" * j

    @property
    def codewords(self) -> tuple[str, ...]:
        """Codewords ordered by grid index; for Hamming every string is valid,
        and this lists the canonical representative per index."""
        return tuple(self.encode(j) for j in range(self.N))

    @property
    def valid(self) -> tuple[tuple[str, int], ...]:
        """All valid register strings paired with their grid index."""
        if self.scheme == "hamming":
            return tuple(
                (format(v, f"0{self.r}b"), bin(v).count("1")) for v in range(2**self.r)
            )
        return tuple((c, j) for j, c in enumerate(self.codewords))

    def lookup_table(self, policy: str | None = None) -> np.ndarray:
        """Grid index per register value ``0..2^r-1``; ``-1`` marks rejection."""
        policy = policy or default_policy(self.scheme)
        if policy not in ("strict", "lenient"):
            raise ValueError(f"unknown decode policy {policy!r}")
        vals = np.arange(2**self.r)
        pop = np.array([bin(v).count("1") for v in vals])
        if self.scheme == "hamming" or (self.scheme == "unary" and policy == "lenient"):
            return pop
        table = np.full(2**self.r, -1)
        for j, c in enumerate(self.codewords):
            table[int(c, 2)] = j
        return table


def codeword_map(scheme: str, r: int) -> CodewordMap:
    return CodewordMap(scheme, r)


def default_policy(scheme: str) -> str:
    return "strict" if canonical_scheme(scheme) == "onehot" else "lenient"


def encode(indices: Iterable[int], cmap: CodewordMap) -> str:
    return "".join(cmap.encode(int(j)) for j in indices)


def decode(bits: str, cmap: CodewordMap, policy: str | None = None) -> np.ndarray | None:
    """Decode a measured bitstring to a unit-box point, or None when rejected.

    >>> decode("00010011", CodewordMap("unary", 4))
    array([0.25, 0.5 ])
    """
    r = cmap.r
    if len(bits) % r or not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"bitstring of length {len(bits)} does not split into {r}-bit registers")
    table = cmap.lookup_table(policy)
    out = []
    for i in range(0, len(bits), r):
        j = table[int(bits[i : i + r], 2)]
        if j < 0:
            return None
        out.append(j / (cmap.N - 1))
    return np.array(out)


def decode_indices(
    indices: np.ndarray, n: int, cmap: CodewordMap, policy: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized decode of basis-state indices over ``n`` registers.

    Returns ``(points, valid)`` with ``points`` of shape ``(len(indices), n)``;
    rows where ``valid`` is False hold NaN.
    """
    r = cmap.r
    indices = np.asarray(indices, dtype=np.int64)
    table = cmap.lookup_table(policy)
    grid_idx = np.empty((indices.shape[0], n), dtype=np.int64)
    mask = (1 << r) - 1
    for i in range(n):
        shift = (n - 1 - i) * r
        grid_idx[:, i] = table[(indices >> shift) & mask]
    valid = np.all(grid_idx >= 0, axis=1)
    pts = grid_idx / (cmap.N - 1)
    pts[~valid] = np.nan
    return pts, valid


# -- operator action ---------------------------------------------------------


def _apply(term: PauliTerm, states: np.ndarray, nq: int) -> tuple[np.ndarray, np.ndarray]:
    amp = np.full(states.shape, term.coeff, dtype=complex)
    new = states.copy()
    for site, op in term.factors:
        shift = nq - 1 - site
        bit = (states >> shift) & 1
        if op == "Num":
            amp *= bit
        elif op == "X":
            new ^= 1 << shift
        else:  # Y|0> = i|1>, Y|1> = -i|0>
            amp *= np.where(bit == 0, 1j, -1j)
            new ^= 1 << shift
    return new, amp


def _group_matrix(terms: Iterable[PauliTerm], nq: int) -> sp.csr_matrix:
    dim = 2**nq
    states = np.arange(dim, dtype=np.int64)
    rows, cols, data = [], [], []
    for t in terms:
        new, amp = _apply(t, states, nq)
        keep = amp != 0
        rows.append(new[keep])
        cols.append(states[keep])
        data.append(amp[keep])
    if not rows:
        return sp.csr_matrix((dim, dim))
    M = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    if np.all(M.data.imag == 0):
        M = M.real.tocsr()
    return M


def ir_matrix(ir: HamiltonianIR, schedule: Schedule, t: float, cap: int = 2**14) -> sp.csr_matrix:
    """Sparse ``H(t)`` on all ``2^(n r)`` basis states."""
    dim = 2**ir.num_qubits
    if dim > cap:
        raise CapExceeded(f"dimension {dim} exceeds cap {cap}")
    a, b = schedule.coefficients(t)
    K = _group_matrix(ir.kinetic, ir.num_qubits)
    P = sp.diags(ir_diagonal(ir))
    return ((-0.5 * a) * K + b * P).tocsr()


def ir_diagonal(ir: HamiltonianIR) -> np.ndarray:
    """Potential group plus offset on every basis state, in index order."""
    nq = ir.num_qubits
    states = np.arange(2**nq, dtype=np.int64)
    diag = np.full(states.shape, ir.offset, dtype=float)
    for t in ir.potential:
        if any(op != "Num" for _, op in t.factors):
            raise ValueError("potential group must be diagonal")
        prod = np.ones(states.shape, dtype=np.int64)
        for site, _ in t.factors:
            prod &= (states >> (nq - 1 - site)) & 1
        diag += t.coeff * prod
    return diag


def register_kinetic(ir: HamiltonianIR, i: int) -> np.ndarray:
    """Dense ``2^r x 2^r`` kinetic block acting on register ``i``."""
    sites = ir.register(i)
    local = []
    for t in ir.kinetic:
        if set(t.sites) <= set(sites):
            local.append(t.shifted(-sites.start))
        elif set(t.sites) & set(sites):
            raise ValueError("kinetic term spans several registers")
    M = _group_matrix(local, ir.r).toarray()
    if np.iscomplexobj(M):
        if np.abs(M.imag).max() > 0:
            raise ValueError("kinetic block is not real")
        M = M.real
    return M


def restrict_to_codewords(
    ir: HamiltonianIR,
    cmap: CodewordMap,
    schedule: Schedule,
    t: float,
    cap: int = 60,
) -> np.ndarray:
    """``H(t)`` on the tensor-product codeword basis, ordered by grid multi-index."""
    if cmap.scheme not in ("unary", "onehot"):
        raise ValueError("codeword restriction needs the unary or one-hot scheme")
    if cmap.scheme != ir.scheme or cmap.r != ir.r:
        raise ValueError("codeword map does not match the IR")
    nq = ir.num_qubits
    if nq > cap:
        raise CapExceeded(f"{nq} qubits exceed cap {cap}")
    words = [int(c, 2) for c in cmap.codewords]
    states = np.zeros(cmap.N**ir.n, dtype=np.int64)
    for pos, multi in enumerate(itertools.product(range(cmap.N), repeat=ir.n)):
        v = 0
        for j in multi:
            v = (v << ir.r) | words[j]
        states[pos] = v
    order = np.argsort(states)
    sorted_states = states[order]
    a, b = schedule.coefficients(t)
    dim = states.shape[0]
    H = np.zeros((dim, dim), dtype=complex)
    groups = ((ir.kinetic, -0.5 * a), (ir.potential, b))
    for terms, scale in groups:
        for term in terms:
            new, amp = _apply(term, states, nq)
            loc = np.searchsorted(sorted_states, new)
            loc = np.minimum(loc, dim - 1)
            hit = sorted_states[loc] == new
            rows = order[loc[hit]]
            np.add.at(H, (rows, np.nonzero(hit)[0]), scale * amp[hit])
    H[np.diag_indices(dim)] += b * ir.offset
    if np.abs(H.imag).max(initial=0.0) > 1e-12:
        raise ValueError("restricted operator is not real")
    return H.real


# -- serialization and export ------------------------------------------------


def ir_to_json(ir: HamiltonianIR) -> dict:
    return {
        "qubits": ir.num_qubits,
        "scheme": ir.scheme,
        "n": ir.n,
        "r": ir.r,
        "N": ir.N,
        "kinetic": [t.to_json() for t in ir.kinetic],
        "potential": [t.to_json() for t in ir.potential],
        "offset": ir.offset,
    }


def ir_from_json(doc: dict) -> HamiltonianIR:
    return HamiltonianIR(
        doc["scheme"],
        int(doc["n"]),
        int(doc["r"]),
        int(doc["N"]),
        tuple(PauliTerm.from_json(t) for t in doc["kinetic"]),
        tuple(PauliTerm.from_json(t) for t in doc["potential"]),
        float(doc["offset"]),
    )


def export_annealer(
    ir: HamiltonianIR,
    schedule: Schedule,
    anneal_time_us: float = 20.0,
    breakpoints: int = 11,
) -> dict:
    """Two-local annealer document: Num linear/quadratic terms, X driver, schedule.

    Raises :class:`OneHotNotAnnealable` for IRs with Y factors or X products.
    """
    if ir.scheme == "onehot" or any(
        len(t.factors) != 1 or t.factors[0][1] != "X" for t in ir.kinetic
    ):
        raise OneHotNotAnnealable("kinetic group needs XX + YY couplings; use unary or hamming")
    driver: dict[str, float] = {}
    for t in ir.kinetic:
        key = str(t.factors[0][0])
        driver[key] = driver.get(key, 0.0) + t.coeff
    linear: dict[str, float] = {}
    quadratic: dict[str, float] = {}
    for t in ir.potential:
        if len(t.factors) == 1:
            linear[str(t.sites[0])] = linear.get(str(t.sites[0]), 0.0) + t.coeff
        elif len(t.factors) == 2:
            key = f"{t.sites[0]},{t.sites[1]}"
            quadratic[key] = quadratic.get(key, 0.0) + t.coeff
        else:
            raise ValueError(f"potential term on sites {t.sites} is not two-local")
    return {
        "num_qubits": ir.num_qubits,
        "scheme": ir.scheme,
        "variables": ir.n,
        "register_size": ir.r,
        "linear": linear,
        "quadratic": quadratic,
        "driver": driver,
        "offset": ir.offset,
        "kinetic_prefactor": -0.5,
        "schedule": [
            {"t": t, "kinetic": a, "potential": b} for t, a, b in schedule.breakpoints(breakpoints)
        ],
        "schedule_source": schedule.to_dict(),
        "anneal_time_us": anneal_time_us,
    }


def schedule_of(doc: dict) -> Schedule:
    return schedule_from_dict(doc["schedule_source"])
