"""Cone-block vectorization and projection utilities.

PSD blocks are real symmetric matrices stored in scaled lower-triangle
form (svec, off-diagonals times sqrt(2)); complex Hermitian data enters
through the real embedding [[Re, -Im], [Im, Re]] handled in herm.py.
svec/smat also accept complex Hermitian input, mapping to a length d^2
real vector (diagonal, then interleaved sqrt(2)*Re / sqrt(2)*Im of the
lower triangle) with the same inner-product convention.
"""

from __future__ import annotations

import math

import numpy as np

_SQ2 = math.sqrt(2.0)


def tril_indices(d: int):
    """Row-major lower-triangle index pair arrays (i, j) with i >= j."""
    return np.tril_indices(d)


def svec_len(d: int) -> int:
    return d * (d + 1) // 2


def _check_hermitian(H: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("square matrix required")
    defect = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if defect > tol:
        raise ValueError(f"not Hermitian: defect {defect:.2e}")
    return 0.5 * (H + H.conj().T)


def svec(H: np.ndarray) -> np.ndarray:
    """Isometric vectorization with <svec(X), svec(Y)> = Re tr(X^dag Y).

    Real symmetric input -> length d(d+1)/2; complex Hermitian input ->
    length d^2 (diagonal first, then interleaved scaled Re/Im pairs).
    """
    H = _check_hermitian(H)
    d = H.shape[0]
    if not np.iscomplexobj(H):
        i, j = np.tril_indices(d)
        out = H[i, j].copy()
        out[i != j] *= _SQ2
        return out
    out = np.empty(d * d)
    out[:d] = H.diagonal().real
    i, j = np.tril_indices(d, -1)
    out[d::2] = _SQ2 * H[i, j].real
    out[d + 1::2] = _SQ2 * H[i, j].imag
    return out


def smat(v: np.ndarray, dim: int | None = None, hermitian: bool | None = None):
    """Inverse of svec. The encoding is inferred from the length when
    unambiguous; pass dim/hermitian to disambiguate (e.g. length 36)."""
    v = np.asarray(v, dtype=float).reshape(-1)
    n = v.shape[0]
    d_sym = int((math.isqrt(8 * n + 1) - 1) // 2)
    sym_ok = svec_len(d_sym) == n
    d_her = math.isqrt(n)
    her_ok = d_her * d_her == n
    if hermitian is None:
        if sym_ok and her_ok:
            if dim is None:
                raise ValueError(f"ambiguous svec length {n}; pass dim or hermitian")
            hermitian = dim == d_her and dim != d_sym
            if dim == d_her == d_sym:
                raise ValueError("pass hermitian= to disambiguate")
        elif sym_ok:
            hermitian = False
        elif her_ok:
            hermitian = True
        else:
            raise ValueError(f"length {n} is not a valid svec length")
    if not hermitian:
        if not sym_ok or (dim is not None and dim != d_sym):
            raise ValueError("length does not match a real symmetric svec")
        d = d_sym
        out = np.zeros((d, d))
        i, j = np.tril_indices(d)
        vals = v.copy()
        vals[i != j] /= _SQ2
        out[i, j] = vals
        out[j, i] = vals
        return out
    if not her_ok or (dim is not None and dim != d_her):
        raise ValueError("length does not match a Hermitian svec")
    d = d_her
    out = np.zeros((d, d), dtype=complex)
    out[np.arange(d), np.arange(d)] = v[:d]
    i, j = np.tril_indices(d, -1)
    lower = (v[d::2] + 1j * v[d + 1::2]) / _SQ2
    out[i, j] = lower
    out[j, i] = lower.conj()
    return out


def project_psd(v: np.ndarray, d: int) -> np.ndarray:
    """Euclidean projection of a real symmetric svec block onto the PSD cone."""
    S = smat(v, dim=d, hermitian=False)
    w, Q = np.linalg.eigh(S)
    if w[0] >= 0.0:
        return np.asarray(v, dtype=float).copy()
    pos = w > 0.0
    P = (Q[:, pos] * w[pos]) @ Q[:, pos].T
    return svec(0.5 * (P + P.T))


class ConeLayout:
    """Offsets and batched projection for an ordered list of cone blocks.

    Blocks are ("free", n), ("nonneg", n) or ("psd", d); a psd block
    occupies d(d+1)/2 coordinates.
    """

    def __init__(self, cones):
        self.cones = [(str(kind), int(p)) for kind, p in cones]
        self.offsets = []
        off = 0
        for kind, p in self.cones:
            if kind == "free" or kind == "nonneg":
                size = p
            elif kind == "psd":
                size = svec_len(p)
            else:
                raise ValueError(f"unknown cone kind {kind!r}")
            self.offsets.append((kind, p, off, off + size))
            off += size
        self.dim = off
        self._nonneg_mask = np.zeros(self.dim, dtype=bool)
        self._free_mask = np.zeros(self.dim, dtype=bool)
        for kind, p, a, b in self.offsets:
            if kind == "nonneg":
                self._nonneg_mask[a:b] = True
            elif kind == "free":
                self._free_mask[a:b] = True
        # group equal-size psd blocks for batched eigendecompositions
        self._psd_groups: dict[int, list[int]] = {}
        for kind, p, a, b in self.offsets:
            if kind == "psd":
                self._psd_groups.setdefault(p, []).append(a)
        self._tril_cache = {d: np.tril_indices(d) for d in self._psd_groups}

    def block(self, x: np.ndarray, index: int) -> np.ndarray:
        kind, p, a, b = self.offsets[index]
        return x[a:b]

    def project(self, x: np.ndarray, dual: bool = False) -> np.ndarray:
        """Project onto the cone (dual=False) or its dual (dual=True).

        The dual cone replaces free components by zero; nonneg and psd
        blocks are self-dual.
        """
        out = x.copy()
        if dual:
            out[self._free_mask] = 0.0
        if self._nonneg_mask.any():
            out[self._nonneg_mask] = np.maximum(out[self._nonneg_mask], 0.0)
        for d, starts in self._psd_groups.items():
            ln = svec_len(d)
            i, j = self._tril_cache[d]
            off_mask = i != j
            stack = np.empty((len(starts), d, d))
            for s, a in enumerate(starts):
                v = out[a:a + ln].copy()
                v[off_mask] /= _SQ2
                stack[s][i, j] = v
                stack[s][j, i] = v
            w, Q = np.linalg.eigh(stack)
            np.clip(w, 0.0, None, out=w)
            proj = (Q * w[:, None, :]) @ np.swapaxes(Q, 1, 2)
            proj = 0.5 * (proj + np.swapaxes(proj, 1, 2))
            for s, a in enumerate(starts):
                v = proj[s][i, j]
                v[off_mask] *= _SQ2
                out[a:a + ln] = v
        return out

    def membership_defect(self, x: np.ndarray) -> float:
        """Max violation of cone membership (0 for points inside)."""
        worst = 0.0
        for kind, p, a, b in self.offsets:
            if kind == "nonneg" and b > a:
                worst = max(worst, float(-(x[a:b].min(initial=0.0))))
            elif kind == "psd":
                S = smat(x[a:b], dim=p, hermitian=False)
                worst = max(worst, float(-np.linalg.eigvalsh(S)[0]))
        return worst
