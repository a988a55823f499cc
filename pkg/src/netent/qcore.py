"""Dense complex-matrix toolkit for few-qubit quantum states.

Tensor algebra, partial trace/transpose, negativities, canonical states,
white-noise mixing, and the RDM JSON interchange format. Everything is
dense double precision; the intended scale is at most 9 qubits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

HERM_TOL = 1e-8        # max allowed Hermiticity defect on ingestion
EIG_CLIP = 1e-10       # eigenvalues in [-EIG_CLIP, 0) are clipped to 0
TRACE_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class LocalDims:
    """Ordered local Hilbert-space dimensions, one per tensor factor."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError("every local dimension must be >= 2")

    @property
    def D(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)

    def __getitem__(self, i):
        return self.dims[i]


def _as_dims(dims) -> LocalDims:
    return dims if isinstance(dims, LocalDims) else LocalDims(tuple(dims))


@dataclass(frozen=True)
class PureState:
    """Normalized state vector tagged with its tensor-factor dimensions."""

    amplitudes: np.ndarray
    dims: LocalDims

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != self.dims.D:
            raise ValueError("amplitude length does not match dims")
        n = np.linalg.norm(v)
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |norm-1| = {abs(n - 1):.2e}")
        v = v / n
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def D(self) -> int:
        return self.dims.D

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.dims)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix with ingestion guards.

    On construction the matrix is symmetrized (rejected if the Hermiticity
    defect exceeds 1e-8), eigenvalues in [-1e-10, 0) are clipped to zero,
    anything more negative is rejected, and the trace is renormalized to 1
    (rejected if it differs from 1 by more than 1e-10 beforehand).
    """

    entries: np.ndarray
    dims: LocalDims

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        m = np.asarray(self.entries, dtype=complex)
        D = self.dims.D
        if m.shape != (D, D):
            raise ValueError(f"matrix shape {m.shape} does not match dims (D={D})")
        defect = np.max(np.abs(m - m.conj().T)) if D else 0.0
        if defect > HERM_TOL:
            raise ValueError(f"not Hermitian: defect {defect:.2e} > {HERM_TOL}")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr!r} differs from 1 beyond {TRACE_TOL}")
        w, v = np.linalg.eigh(m)
        if w[0] < -EIG_CLIP:
            raise ValueError(f"negative eigenvalue {w[0]:.2e} below -{EIG_CLIP}")
        if w[0] < 0.0:
            w = np.clip(w, 0.0, None)
            m = (v * w) @ v.conj().T
            m = 0.5 * (m + m.conj().T)
        m = m / np.trace(m).real
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def D(self) -> int:
        return self.dims.D


@dataclass(frozen=True)
class PartySplit:
    """Partition of the tensor factors into k >= 2 disjoint ordered groups."""

    parties: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.parties)
        object.__setattr__(self, "parties", groups)
        if len(groups) < 2:
            raise ValueError("need at least two parties")
        flat = [i for g in groups for i in g]
        if len(flat) != len(set(flat)):
            raise ValueError("party groups must be disjoint")
        if any(len(g) == 0 for g in groups):
            raise ValueError("empty party group")

    @property
    def k(self) -> int:
        return len(self.parties)

    def all_factors(self) -> tuple[int, ...]:
        return tuple(sorted(i for g in self.parties for i in g))

    def covers(self, nfactors: int) -> bool:
        return self.all_factors() == tuple(range(nfactors))


def qubit_split(groups) -> PartySplit:
    """PartySplit from a list of factor-index groups, e.g. [[0,1],[2,3],[4,5]]."""
    return PartySplit(tuple(tuple(g) for g in groups))


# ---------------------------------------------------------------------------
# tensor algebra


def tensor(a, b):
    """Kronecker product of two states of the same kind, dims concatenated."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes),
                         LocalDims(a.dims.dims + b.dims.dims))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.entries, b.entries),
                             LocalDims(a.dims.dims + b.dims.dims))
    raise TypeError("tensor requires two PureState or two DensityMatrix")


def _ptrace_raw(m: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    n = len(dims)
    keep = tuple(sorted(keep))
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    for count, i in enumerate(traced):
        ax = i - sum(1 for j in traced[:count] if j < i)
        nleft = n - count
        t = np.trace(t, axis1=ax, axis2=ax + nleft)
    dk = math.prod(dims[i] for i in keep)
    return t.reshape(dk, dk)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out all factors not in `keep`; kept factors stay in original order."""
    keep = tuple(sorted(int(i) for i in keep))
    n = len(rho.dims)
    if not keep or any(i < 0 or i >= n for i in keep):
        raise IndexError("keep must be a nonempty subset of factor indices")
    out = _ptrace_raw(rho.entries, rho.dims.dims, keep)
    return DensityMatrix(out, LocalDims(tuple(rho.dims[i] for i in keep)))


def _pt_raw(m: np.ndarray, dims: tuple[int, ...], subset: tuple[int, ...]) -> np.ndarray:
    n = len(dims)
    t = m.reshape(dims + dims)
    perm = list(range(2 * n))
    for i in subset:
        perm[i], perm[i + n] = perm[i + n], perm[i]
    D = math.prod(dims)
    return t.transpose(perm).reshape(D, D)


def partial_transpose(rho: DensityMatrix, subset) -> np.ndarray:
    """Transpose the given factors; returns a plain Hermitian matrix."""
    subset = tuple(sorted(set(int(i) for i in subset)))
    n = len(rho.dims)
    if any(i < 0 or i >= n for i in subset):
        raise IndexError("factor index out of range")
    return _pt_raw(rho.entries, rho.dims.dims, subset)


def permute_factors(state, perm):
    """Reorder tensor factors so new factor i is old factor perm[i]."""
    perm = tuple(int(i) for i in perm)
    if isinstance(state, PureState):
        dims = state.dims.dims
        v = state.amplitudes.reshape(dims).transpose(perm).reshape(-1)
        return PureState(v, LocalDims(tuple(dims[i] for i in perm)))
    if isinstance(state, DensityMatrix):
        dims = state.dims.dims
        n = len(dims)
        full = tuple(perm) + tuple(i + n for i in perm)
        D = state.D
        m = state.entries.reshape(dims + dims).transpose(full).reshape(D, D)
        return DensityMatrix(m, LocalDims(tuple(dims[i] for i in perm)))
    raise TypeError("expected PureState or DensityMatrix")


# ---------------------------------------------------------------------------
# entanglement measures


def negativity(rho: DensityMatrix, cut: PartySplit) -> float:
    """Negativity across a bipartition: sum of |negative eigenvalues| of rho^{T_A}.

    The first group of `cut` is transposed; the spectrum (hence the value)
    does not depend on which side is chosen.
    """
    if cut.k != 2:
        raise ValueError("negativity needs a bipartition (k=2)")
    if not cut.covers(len(rho.dims)):
        raise ValueError("cut does not cover all factors")
    pt = partial_transpose(rho, cut.parties[0])
    w = np.linalg.eigvalsh(pt)
    return float(-w[w < 0].sum())


def log_negativity(rho: DensityMatrix, cut: PartySplit) -> float:
    """LN = log2(2N + 1); additive over cut-aligned tensor products."""
    return float(math.log2(2.0 * negativity(rho, cut) + 1.0))


def bipartitions(split: PartySplit):
    """All 2^(k-1) - 1 bipartitions of the parties, party 0 fixed on the left.

    Yields (left_parties, right_parties) as index tuples in a stable
    lexicographic order of the right-block bitmask.
    """
    k = split.k
    others = list(range(1, k))
    for mask in range(1, 2 ** (k - 1)):
        right = tuple(others[i] for i in range(k - 1) if mask >> i & 1)
        left = tuple(i for i in range(k) if i not in right)
        yield left, right


def cut_of(split: PartySplit, left_parties, right_parties) -> PartySplit:
    left = tuple(i for p in left_parties for i in split.parties[p])
    right = tuple(i for p in right_parties for i in split.parties[p])
    return PartySplit((left, right))


def min_bipartite_negativity(rho: DensityMatrix, split: PartySplit):
    """Minimum negativity over all bipartitions of the parties.

    Returns (value, argmin cut); ties resolved toward the first bipartition
    in the documented enumeration order.
    """
    if not split.covers(len(rho.dims)):
        raise ValueError("split does not cover all factors")
    best = None
    best_cut = None
    for left, right in bipartitions(split):
        cut = cut_of(split, left, right)
        val = negativity(rho, cut)
        if best is None or val < best - 1e-15:
            best, best_cut = val, cut
    return best, best_cut


def hs_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Hilbert-Schmidt distance sqrt(tr (a-b)^2)."""
    if a.dims.dims != b.dims.dims:
        raise ValueError("dimension mismatch")
    return float(np.linalg.norm(a.entries - b.entries, "fro"))


# ---------------------------------------------------------------------------
# canonical states and noise


def canonical_state(kind: str, *params) -> PureState:
    """Named few-qubit states: ghz(n), w(n), dicke(k,n), bell_triangle, product(bits)."""
    kind = kind.lower().replace("-", "_")
    if kind == "ghz":
        (n,) = params
        v = np.zeros(2 ** n, dtype=complex)
        v[0] = v[-1] = 1.0 / math.sqrt(2)
        return PureState(v, LocalDims((2,) * n))
    if kind == "w":
        (n,) = params
        return canonical_state("dicke", 1, n)
    if kind == "dicke":
        k, n = params
        if not 0 <= k <= n:
            raise ValueError("dicke requires 0 <= k <= n")
        v = np.zeros(2 ** n, dtype=complex)
        amp = 1.0 / math.sqrt(math.comb(n, k))
        for ones in combinations(range(n), k):
            idx = sum(1 << (n - 1 - i) for i in ones)
            v[idx] = amp
        return PureState(v, LocalDims((2,) * n))
    if kind == "bell_triangle":
        bell = PureState(np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2),
                         LocalDims((2, 2)))
        # pairs on (A0,B0), (B1,C0), (C1,A1); reorder to (A0,A1,B0,B1,C0,C1)
        s = tensor(tensor(bell, bell), bell)
        return permute_factors(s, (0, 5, 1, 2, 3, 4))
    if kind == "product":
        (bits,) = params
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise ValueError("product bits must be 0/1")
        n = len(bits)
        v = np.zeros(2 ** n, dtype=complex)
        v[sum(b << (n - 1 - i) for i, b in enumerate(bits))] = 1.0
        return PureState(v, LocalDims((2,) * n))
    raise ValueError(f"unknown canonical state kind {kind!r}")


def maximally_mixed(dims) -> DensityMatrix:
    dims = _as_dims(dims)
    return DensityMatrix(np.eye(dims.D) / dims.D, dims)


def white_noise_mix(psi: PureState, p: float) -> DensityMatrix:
    """(1-p) |psi><psi| + p I/D."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("noise fraction must lie in [0, 1]")
    D = psi.D
    v = psi.amplitudes
    m = (1.0 - p) * np.outer(v, v.conj()) + p * np.eye(D) / D
    return DensityMatrix(m, psi.dims)


# ---------------------------------------------------------------------------
# RDM JSON interchange


def rdm_to_json(rho: DensityMatrix, parties: PartySplit | None = None) -> str:
    obj = {
        "dims": list(rho.dims.dims),
        "parties": [list(g) for g in parties.parties] if parties is not None
                   else [[i] for i in range(len(rho.dims))],
        "re": rho.entries.real.tolist(),
        "im": rho.entries.imag.tolist(),
    }
    return json.dumps(obj)


def rdm_from_json(text: str):
    obj = json.loads(text)
    for key in ("dims", "parties", "re", "im"):
        if key not in obj:
            raise ValueError(f"RDM JSON missing key {key!r}")
    dims = LocalDims(tuple(obj["dims"]))
    m = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
    rho = DensityMatrix(m, dims)
    parties = PartySplit(tuple(tuple(g) for g in obj["parties"]))
    if not parties.covers(len(dims)):
        raise ValueError("parties do not cover all factors")
    return rho, parties


def save_rdm(path, rho: DensityMatrix, parties: PartySplit | None = None):
    with open(path, "w") as fh:
        fh.write(rdm_to_json(rho, parties))


def load_rdm(path):
    with open(path) as fh:
        return rdm_from_json(fh.read())
