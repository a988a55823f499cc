"""Exact reduced density matrices of the transverse-field Ising chain.

The chain H = -sum_j sigma^x_j sigma^x_{j+1} - h sum_j sigma^z_j on an L-site
ring maps under the Jordan-Wigner transformation to free Majorana fermions,

    a_{2j}   = (prod_{l<j} sigma^z_l) sigma^x_j,
    a_{2j+1} = (prod_{l<j} sigma^z_l) sigma^y_j,

so every Pauli-string expectation reduces by Wick's theorem to a Pfaffian of
the two-point matrix Gamma_{jk} = (i/2) <[a_j, a_k]>.

Two levels of treatment coexist here.  The correlation-matrix functions
(ground_correlations, gibbs_correlations, rdm) work in the antiperiodic
(Neveu-Schwarz) fermion sector alone, which on even rings contains the
finite-size ground state; at h < 1 this picks the symmetric cat combination
of the two ferromagnetic branches.  The antiperiodic ring is invariant under
the twisted translation (shift by one site, sign flip across the seam between
sites L-1 and 0), so bulk entries of Gamma depend on site separation only and
windows that stay clear of the seam are exactly translation covariant; the
rdm guard keeps windows in the bulk for that reason.

A thermal spin state, however, is not a single fermion-sector Gibbs state:
the boundary bond couples to fermion parity, so the ring Hamiltonian is
block-diagonal with the antiperiodic quadratic form acting on the even-parity
subspace and the periodic one on the odd-parity subspace.  Tracing against
those projectors turns every spin expectation into four Gaussian traces: the
plain Gibbs trace of each sector plus a parity-twisted trace in which mode
occupations enter through coth instead of tanh and the overall weight is the
product of mode tanh factors times the Bogoliubov vacuum parity.  The
functions thermal_expectation and thermal_rdm evaluate that combination
exactly, so they agree with dense diagonalization at machine precision at any
L the oracle can reach, and remain exact (not just thermodynamic-limit
accurate) at large L.  Zero modes of the periodic sector, present at h = 1,
make the twisted trace a 0 * inf product; they are floored at a small delta
and the twisted term is extrapolated delta -> 0, which is exact to O(delta^2)
because everything in sight is analytic in the floor.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from itertools import product as _iproduct

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .qcore import DensityMatrix

__all__ = [
    "ChainSpec",
    "MajoranaCorrelation",
    "SiteSubset",
    "pfaffian",
    "ground_correlations",
    "gibbs_correlations",
    "pauli_expectation",
    "rdm",
    "thermal_expectation",
    "thermal_rdm",
    "ed_oracle",
]

ANTISYM_TOL = 1e-10
SVAL_TOL = 1e-9
ED_MAX_L = 14
RDM_MAX_SITES = 8


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class ChainSpec:
    """Ring geometry and thermodynamic parameters; coupling J = 1."""

    h: float
    beta: float
    L: int

    def __post_init__(self):
        if not self.h >= 0:
            raise ValueError("transverse field must be nonnegative")
        if not (self.beta > 0 or math.isinf(self.beta)):
            raise ValueError("inverse temperature must be positive or inf")
        if self.L < 2 or self.L % 2:
            raise ValueError("chain length must be even and at least 2")


@dataclass(frozen=True)
class MajoranaCorrelation:
    """Gamma_{jk} = (i/2)(<a_j a_k> - <a_k a_j>), real antisymmetric 2Lx2L.

    Majorana ordering: index 2j is the x-type operator on site j, index 2j+1
    the y-type one, j = 0..L-1.
    """

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
            raise ValueError("correlation matrix must be square of even size")
        if np.max(np.abs(g + g.T)) > ANTISYM_TOL:
            raise ValueError("correlation matrix must be antisymmetric")
        sv = np.abs(np.linalg.eigvalsh(1j * g))
        if sv.size and sv.max() > 1.0 + SVAL_TOL:
            raise ValueError("correlation matrix has singular value above 1")
        g = 0.5 * (g - g.T)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def L(self) -> int:
        return self.gamma.shape[0] // 2


@dataclass(frozen=True)
class SiteSubset:
    """Strictly increasing chain sites, at most 8 (dense RDM cap)."""

    sites: tuple

    def __post_init__(self):
        s = tuple(int(x) for x in self.sites)
        if not s:
            raise ValueError("subset must contain at least one site")
        if len(s) > RDM_MAX_SITES:
            raise ValueError(f"subset larger than {RDM_MAX_SITES} sites")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("sites must be strictly increasing")
        if s[0] < 0:
            raise ValueError("sites must be nonnegative")
        object.__setattr__(self, "sites", s)


def _as_subset(subset) -> SiteSubset:
    if isinstance(subset, SiteSubset):
        return subset
    return SiteSubset(tuple(subset))


# ---------------------------------------------------------------------------
# Pfaffian of a real antisymmetric matrix


def pfaffian(mat: np.ndarray) -> float:
    """Parlett-Reid tridiagonalization with partial pivoting.

    Skew-symmetric Gaussian elimination: congruence transformations zero out
    column entries below the first subdiagonal; the Pfaffian is the product
    of the surviving subdiagonal entries times the pivot-swap sign.
    """
    m = np.array(mat, dtype=float)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ValueError("matrix must be square")
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0
    sign = 1.0
    val = 1.0
    for k in range(0, n - 2, 2):
        col = np.abs(m[k + 1:, k])
        p = k + 1 + int(np.argmax(col))
        if col[p - k - 1] == 0.0:
            return 0.0
        if p != k + 1:
            m[[k + 1, p], :] = m[[p, k + 1], :]
            m[:, [k + 1, p]] = m[:, [p, k + 1]]
            sign = -sign
        pivot = m[k, k + 1]
        val *= pivot
        tau = m[k, k + 2:] / pivot
        # congruence update of the trailing block: rows/cols k+2.. lose their
        # coupling to rows k and k+1
        w = m[k + 1, k + 2:]
        m[k + 2:, k + 2:] += np.outer(w, tau) - np.outer(tau, w)
        m[k + 2:, k + 2:] = 0.5 * (m[k + 2:, k + 2:] - m[k + 2:, k + 2:].T)
    return sign * val * m[n - 2, n - 1]


# ---------------------------------------------------------------------------
# correlation matrices


def _quadratic_form(spec: ChainSpec, periodic: bool = False) -> np.ndarray:
    """Coupling matrix A with H = (i/4) a^T A a.

    The seam bond between sites L-1 and 0 carries the opposite sign from the
    bulk in the antiperiodic (even spin parity) sector and the bulk sign in
    the periodic (odd spin parity) one.
    """
    L = spec.L
    A = np.zeros((2 * L, 2 * L))
    for j in range(L):
        A[2 * j, 2 * j + 1] = 2.0 * spec.h
        A[2 * j + 1, 2 * j] = -2.0 * spec.h
    for j in range(L - 1):
        A[2 * j + 1, 2 * j + 2] = 2.0
        A[2 * j + 2, 2 * j + 1] = -2.0
    seam = 2.0 if periodic else -2.0
    A[2 * L - 1, 0] = seam
    A[0, 2 * L - 1] = -seam
    return A


def _correlations(spec: ChainSpec, mode_filling) -> MajoranaCorrelation:
    M = 1j * _quadratic_form(spec)
    lam, V = np.linalg.eigh(M)
    Gc = 1j * (V * mode_filling(lam)) @ V.conj().T
    G = Gc.real
    if np.max(np.abs(Gc.imag)) > 1e-12:
        raise AssertionError("correlation matrix came out non-real")
    return MajoranaCorrelation(G)


def ground_correlations(spec: ChainSpec) -> MajoranaCorrelation:
    """NS-sector ground-state Majorana correlations of the ring."""
    if not math.isinf(spec.beta):
        raise ValueError("ground state requested with finite beta")
    return _correlations(spec, np.sign)


def gibbs_correlations(spec: ChainSpec) -> MajoranaCorrelation:
    """NS-sector Gibbs-state Majorana correlations at finite beta."""
    if math.isinf(spec.beta):
        raise ValueError("finite beta required; use ground_correlations")
    beta = spec.beta
    return _correlations(spec, lambda lam: np.tanh(0.5 * beta * lam))


def correlations(spec: ChainSpec) -> MajoranaCorrelation:
    """Dispatch on beta: ground state at beta = inf, Gibbs otherwise."""
    if math.isinf(spec.beta):
        return ground_correlations(spec)
    return gibbs_correlations(spec)


# ---------------------------------------------------------------------------
# Pauli-string expectations


def _normalize_pstring(pstring) -> list:
    """Accept 'IXZ..' (index = site) or {site: letter}; drop identities."""
    if isinstance(pstring, str):
        items = [(i, c.upper()) for i, c in enumerate(pstring)]
    else:
        items = [(int(s), str(c).upper()) for s, c in dict(pstring).items()]
    out = []
    for site, letter in sorted(items):
        if letter == "I":
            continue
        if letter not in ("X", "Y", "Z"):
            raise ValueError(f"unknown Pauli letter {letter!r}")
        if site < 0:
            raise ValueError("sites must be nonnegative")
        out.append((site, letter))
    return out


def _majorana_monomial(letters: list, s0: int):
    """(phase, index list) of the Jordan-Wigner image, relative to site s0.

    Valid for strings with an even number of X/Y letters: their full
    Jordan-Wigner tails share the prefix below the first X/Y site an even
    number of times, and those prefix factors commute with everything in
    between, so the tails may be truncated there.
    """
    xy_sites = [s for s, c in letters if c != "Z"]
    first_xy = min(xy_sites) if xy_sites else 0
    phase = 1 + 0j
    idx = []
    for site, letter in letters:
        p = site - s0
        if letter == "Z":
            phase *= -1j
            idx += [2 * p, 2 * p + 1]
            continue
        for l in range(first_xy - s0, p):
            phase *= -1j
            idx += [2 * l, 2 * l + 1]
        idx.append(2 * p if letter == "X" else 2 * p + 1)
    return phase, idx


def _canonicalize(idx: list):
    """Sort Majorana factors ascending; a^2 = 1, swaps of distinct flip sign."""
    sign = 1.0
    arr = list(idx)
    # insertion sort with transposition counting (lists stay < ~100 long)
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    out = []
    i = 0
    while i < len(arr):
        if i + 1 < len(arr) and arr[i] == arr[i + 1]:
            i += 2
            continue
        out.append(arr[i])
        i += 1
    return sign, out


def _monomial_data(letters: list):
    """(majorana indices, prefactor, trivial value) of a normalized string.

    Trivial value is set (and the other two are None) when no Pfaffian is
    needed: the empty string, odd-fermion-parity strings, and strings whose
    Majorana factors cancel completely.
    """
    if not letters:
        return None, None, 1.0
    if sum(1 for _, c in letters if c != "Z") % 2:
        return None, None, 0.0
    s0 = letters[0][0]
    phase, idx = _majorana_monomial(letters, s0)
    sign, idx = _canonicalize(idx)
    if len(idx) % 2:
        raise AssertionError("even-parity string reduced to an odd monomial")
    if not idx:
        out = phase * sign
        if abs(out.imag) > 1e-10:
            raise AssertionError("Pauli expectation came out complex")
        return None, None, float(out.real)
    sub = np.asarray(idx, dtype=int) + 2 * s0
    pre = phase * sign * (-1j) ** (len(idx) // 2)
    return sub, pre, None


def _skew_expectation(mat: np.ndarray, sub: np.ndarray, pre: complex) -> float:
    out = pre * pfaffian(mat[np.ix_(sub, sub)])
    if abs(out.imag) > 1e-8 * max(1.0, abs(out)):
        raise AssertionError("Pauli expectation came out complex")
    return float(out.real)


def pauli_expectation(gamma: MajoranaCorrelation, pstring) -> float:
    """<P> on the Gaussian state described by gamma.

    Strings with odd fermion parity (odd X/Y count) vanish identically.  Even
    strings become Majorana monomials supported between their first and last
    X/Y site (Jordan-Wigner tails over skipped sites are expanded in place),
    and Wick's theorem turns those into a Pfaffian over gamma entries.
    """
    letters = _normalize_pstring(pstring)
    if letters and letters[-1][0] >= gamma.L:
        raise ValueError("string extends past the chain")
    sub, pre, trivial = _monomial_data(letters)
    if trivial is not None:
        return trivial
    return _skew_expectation(gamma.gamma, sub, pre)


# ---------------------------------------------------------------------------
# exact parity-resolved thermal expectations

_THERMAL_CACHE: "OrderedDict" = OrderedDict()
_THERMAL_CACHE_CAP = 6
_ZERO_MODE_TOL = 1e-9


def _paired_modes(A: np.ndarray, floor: float):
    """Eigen-decomposition of iA with conjugate-paired, floored zero modes.

    For nonzero eigenvalues of the Hermitian matrix iA the eigenvectors at
    +lam and -lam are automatically complex conjugates of each other.  An
    exact zero eigenvalue is (at least) doubly degenerate and eigh returns an
    arbitrary unitary mix of the null vectors, so the pairing is rebuilt by
    hand: a real orthonormal basis u1, u2 of the null space gives the pair
    v = (u1 + i u2)/sqrt(2) at +floor and its conjugate at -floor.

    Returns (floored eigenvalues, raw eigenvalues, eigenvectors).  The raw
    values keep exact zeros at zero: functions regular at the origin (tanh)
    should see those, only the singular fillings (coth, sign) need the floor.
    """
    lam, V = np.linalg.eigh(1j * A)
    raw = lam.copy()
    zero = np.abs(lam) < _ZERO_MODE_TOL
    if np.any(zero):
        Vz = V[:, zero]
        q, r = np.linalg.qr(np.hstack([Vz.real, Vz.imag]))
        U = q[:, np.abs(np.diag(r)) > 1e-10]
        m = U.shape[1] // 2
        if U.shape[1] != 2 * m or 2 * m != int(np.sum(zero)):
            raise AssertionError("zero-mode space did not pair up")
        lam = lam.copy()
        V = V.copy()
        cols = np.where(zero)[0]
        for j in range(m):
            v = (U[:, 2 * j] + 1j * U[:, 2 * j + 1]) / np.sqrt(2.0)
            V[:, cols[2 * j]] = v.conj()
            lam[cols[2 * j]] = -floor
            raw[cols[2 * j]] = 0.0
            V[:, cols[2 * j + 1]] = v
            lam[cols[2 * j + 1]] = floor
            raw[cols[2 * j + 1]] = 0.0
    else:
        lam = np.where(np.abs(lam) < floor, np.sign(lam) * floor, lam)
    return lam, raw, V


def _reconstruct(V: np.ndarray, filling: np.ndarray) -> np.ndarray:
    Gc = 1j * (V * filling) @ V.conj().T
    if np.max(np.abs(Gc.imag)) > 1e-9 * max(1.0, np.max(np.abs(Gc.real))):
        raise AssertionError("correlation matrix came out non-real")
    G = Gc.real
    return 0.5 * (G - G.T)


@dataclass(frozen=True)
class _SectorBlend:
    """One fermion sector's contribution to the spin Gibbs trace.

    logZ is log Tr exp(-beta H_sector) over the full Fock space and gamma the
    plain (tanh-filled) correlation matrix.  twisted, when the sector parity
    weight has not underflowed, holds ((r, gamma_P)) at floor/2 and at floor:
    r is the signed relative weight of the parity-twisted trace (vacuum
    parity times the product of mode tanh factors) and gamma_P its coth
    correlation matrix.  Two floors allow extrapolating the floored zero
    mode away.
    """

    logZ: float
    gamma: np.ndarray
    twisted: tuple


def _thermal_sector(spec: ChainSpec, periodic: bool) -> _SectorBlend:
    key = (spec, periodic)
    hit = _THERMAL_CACHE.get(key)
    if hit is not None:
        _THERMAL_CACHE.move_to_end(key)
        return hit
    beta = spec.beta
    floor = max(1e-8, 2e-5 / max(1.0, beta / 10.0))
    A = _quadratic_form(spec, periodic)
    parts = []
    p_vac = None
    for f in (0.5 * floor, floor):
        lam, raw, V = _paired_modes(A, f)
        x = 0.5 * beta * lam
        xp = np.sort(x)[spec.L:]
        if f == 0.5 * floor:
            gamma = _reconstruct(V, np.tanh(0.5 * beta * raw))
            logZ = float(np.sum(np.logaddexp(xp, -xp)))
        logr = float(np.sum(np.log(np.tanh(xp))))
        if logr < -680.0:
            parts = None
            break
        if p_vac is None:
            ginf = _reconstruct(V, np.sign(lam))
            p_vac = float(np.round((-1.0) ** spec.L * pfaffian(ginf)))
            if abs(p_vac) != 1.0:
                raise AssertionError("vacuum parity did not come out as +-1")
        parts.append((p_vac * float(np.exp(logr)), _reconstruct(V, 1.0 / np.tanh(x))))
    blend = _SectorBlend(logZ, gamma, tuple(parts) if parts else None)
    _THERMAL_CACHE[key] = blend
    if len(_THERMAL_CACHE) > _THERMAL_CACHE_CAP:
        _THERMAL_CACHE.popitem(last=False)
    return blend


def thermal_expectation(spec: ChainSpec, pstring) -> float:
    """<P> on the exact spin Gibbs state of the finite ring.

    Combines both fermion sectors with their parity projectors, so unlike
    pauli_expectation on gibbs_correlations this is exact at the given L,
    seam included, rather than only in the thermodynamic limit.  At beta =
    inf it reduces to the even-parity ground state, matching ed_oracle.
    """
    if math.isinf(spec.beta):
        return pauli_expectation(ground_correlations(spec), pstring)
    letters = _normalize_pstring(pstring)
    if letters and letters[-1][0] >= spec.L:
        raise ValueError("string extends past the chain")
    sub, pre, trivial = _monomial_data(letters)
    if trivial is not None:
        return trivial
    ns = _thermal_sector(spec, periodic=False)
    ra = _thermal_sector(spec, periodic=True)
    zm = max(ns.logZ, ra.logZ)
    num = 0.0
    den = 0.0
    for blend, sgn in ((ns, 1.0), (ra, -1.0)):
        w = float(np.exp(blend.logZ - zm))
        t = _skew_expectation(blend.gamma, sub, pre)
        tw_val = tw_id = 0.0
        if blend.twisted is not None:
            (r_half, gp_half), (r_full, gp_full) = blend.twisted
            # floor -> 0 extrapolation of the twisted trace: evaluations at
            # floor/2 and floor cancel the O(floor) term
            tw_val = (2.0 * r_half * _skew_expectation(gp_half, sub, pre)
                      - r_full * _skew_expectation(gp_full, sub, pre))
            tw_id = 2.0 * r_half - r_full
        num += w * (t + sgn * tw_val)
        den += w * (1.0 + sgn * tw_id)
    return num / den


# ---------------------------------------------------------------------------
# reduced density matrices by Pauli tomography


_PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
_LETTERS = "IXYZ"


def _tomography(ss: SiteSubset, expect) -> DensityMatrix:
    """2^-n sum_P expect(P) P over the 4^n strings on the subset."""
    n = len(ss.sites)
    coeff = np.zeros((4,) * n)
    for combo in _iproduct(range(4), repeat=n):
        if sum(1 for p in combo if p in (1, 2)) % 2:
            continue
        pstring = {s: _LETTERS[p] for s, p in zip(ss.sites, combo) if p}
        coeff[combo] = expect(pstring)
    # contract the coefficient tensor against the Pauli basis one axis at a
    # time: axes come out as (row_0, col_0, row_1, col_1, ...)
    arr = coeff
    for _ in range(n):
        arr = np.tensordot(arr, _PAULI, axes=([0], [0]))
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    arr = np.transpose(arr, order).reshape(2 ** n, 2 ** n)
    return DensityMatrix(arr / 2 ** n, (2,) * n)


def rdm(gamma: MajoranaCorrelation, subset) -> DensityMatrix:
    """Density matrix of the spin subset: 2^-n sum_P <P> P over 4^n strings.

    Handles non-contiguous subsets through the string expansion inside
    pauli_expectation.  Requires L >= 2*max(site)+16 so the window sits in
    the bulk of the ring, far from the antiperiodic seam.
    """
    ss = _as_subset(subset)
    L = gamma.L
    if ss.sites[-1] >= L:
        raise ValueError("subset extends past the chain")
    if L < 2 * ss.sites[-1] + 16:
        raise ValueError(
            "chain too short for this subset: need L >= 2*max(site)+16")
    return _tomography(ss, lambda p: pauli_expectation(gamma, p))


def thermal_rdm(spec: ChainSpec, subset) -> DensityMatrix:
    """Exact finite-ring reduced density matrix at the spec's temperature.

    Built from thermal_expectation, so both fermion parity sectors enter and
    the result is exact at the given L.  The bulk-window rule of rdm does not
    apply: the parity-resolved ensemble is an exact object of the finite
    ring, seam and all, so any subset inside the chain is legal.
    """
    ss = _as_subset(subset)
    if ss.sites[-1] >= spec.L:
        raise ValueError("subset extends past the chain")
    if math.isinf(spec.beta):
        gam = ground_correlations(spec)
        return _tomography(ss, lambda p: pauli_expectation(gam, p))
    return _tomography(ss, lambda p: thermal_expectation(spec, p))


# ---------------------------------------------------------------------------
# dense exact-diagonalization oracle


def _ring_hamiltonian(L: int, h: float) -> sp.csr_matrix:
    D = 1 << L
    states = np.arange(D, dtype=np.int64)
    # sigma^z diagonal; bit l (counted from the most significant, matching
    # the tensor convention elsewhere) clear means spin up
    diag = np.zeros(D)
    for l in range(L):
        bit = (states >> (L - 1 - l)) & 1
        diag -= h * (1.0 - 2.0 * bit)
    rows = [states]
    cols = [states]
    vals = [diag]
    for j in range(L):
        j2 = (j + 1) % L
        mask = (1 << (L - 1 - j)) | (1 << (L - 1 - j2))
        rows.append(states)
        cols.append(states ^ mask)
        vals.append(np.full(D, -1.0))
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(D, D))
    return H.tocsr()


def _parity_indices(L: int):
    states = np.arange(1 << L, dtype=np.int64)
    pops = np.zeros(1 << L, dtype=np.int64)
    for l in range(L):
        pops += (states >> l) & 1
    even = np.nonzero(pops % 2 == 0)[0]
    odd = np.nonzero(pops % 2 == 1)[0]
    return even, odd


def _subset_rdm_from_vectors(vecs: np.ndarray, weights: np.ndarray,
                             L: int, sites: tuple) -> np.ndarray:
    """sum_i w_i tr_rest |v_i><v_i| for columns of vecs on the full ring."""
    n = len(sites)
    rest = [l for l in range(L) if l not in sites]
    k = vecs.shape[1]
    rho = np.zeros((1 << n, 1 << n))
    chunk = max(1, (1 << 24) // (1 << L))
    for lo in range(0, k, chunk):
        hi = min(k, lo + chunk)
        block = vecs[:, lo:hi].reshape((2,) * L + (hi - lo,))
        block = np.transpose(block, tuple(sites) + tuple(rest) + (L,))
        block = block.reshape(1 << n, 1 << (L - n), hi - lo)
        rho += np.einsum("aBk,bBk,k->ab", block, block, weights[lo:hi],
                         optimize=True)
    return rho


def ed_oracle(L: int, h: float, beta: float, subset) -> DensityMatrix:
    """Dense/sparse diagonalization of the spin ring, then direct tracing.

    Ground states (beta = inf) come from the even-parity block, matching the
    antiperiodic-sector choice of the correlation pipeline.  Gibbs states
    diagonalize both parity blocks densely, so L is capped at 14.
    """
    if L > ED_MAX_L:
        raise ValueError(f"oracle capped at L = {ED_MAX_L}")
    if L < 3:
        raise ValueError("ring needs at least 3 sites")
    ss = _as_subset(subset)
    if ss.sites[-1] >= L:
        raise ValueError("subset extends past the chain")
    if not (beta > 0 or math.isinf(beta)):
        raise ValueError("inverse temperature must be positive or inf")
    H = _ring_hamiltonian(L, h)
    even, odd = _parity_indices(L)
    D = 1 << L
    if math.isinf(beta):
        He = H[even][:, even]
        if He.shape[0] <= 2:
            w, v = np.linalg.eigh(He.toarray())
            gs_block = v[:, 0]
        else:
            w, v = spla.eigsh(He, k=1, which="SA")
            gs_block = v[:, 0]
        full = np.zeros((D, 1))
        full[even, 0] = gs_block
        rho = _subset_rdm_from_vectors(full, np.ones(1), L, ss.sites)
    else:
        pieces = []
        for idx in (even, odd):
            Hb = H[idx][:, idx].toarray()
            w, v = np.linalg.eigh(Hb)
            pieces.append((idx, w, v))
            del Hb
        e0 = min(p[1][0] for p in pieces)
        z = sum(np.exp(-beta * (p[1] - e0)).sum() for p in pieces)
        rho = np.zeros((1 << len(ss.sites),) * 2)
        for idx, w, v in pieces:
            weights = np.exp(-beta * (w - e0)) / z
            keep = weights > 1e-16
            if not keep.any():
                continue
            full = np.zeros((D, int(keep.sum())))
            full[idx] = v[:, keep]
            rho += _subset_rdm_from_vectors(full, weights[keep], L, ss.sites)
    return DensityMatrix(rho.astype(complex), (2,) * len(ss.sites))
