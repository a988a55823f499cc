"""Hermitian-variable layer on top of the real conic solver.

Complex Hermitian matrices are handled in two real coordinate systems:

* hvec: length d^2, [diagonal, interleaved sqrt(2)Re/sqrt(2)Im of the
  row-major lower triangle]; <hvec(F), hvec(X)> = Re tr(F^dag X).
* embedded svec: a PSD variable X is stored as svec(E(X)) with
  E(X) = [[Re X, -Im X], [Im X, Re X]], a real symmetric 2d block;
  svec(E(X)) = T_d hvec(X) with T_d a sqrt(2)-isometry built here.

Linear maps between Hermitian spaces (partial trace/transpose, subsystem
permutation, Kraus congruence) are assembled as sparse matrices acting on
vec coordinates and conjugated into hvec coordinates. Matrix-valued
equality constraints are imposed in hvec coordinates of the underlying
complex objects; the antisymmetric remainder of an embedded block is
unconstrained, which is a tight relaxation (averaging with the symplectic
conjugation J E J^T maps any feasible point to an embedded one with the
same objective).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .cones import svec_len
from .solver import ConicProgram

_SQ2 = math.sqrt(2.0)


def hvec(H: np.ndarray) -> np.ndarray:
    """Real coordinates of a complex Hermitian matrix (length d^2)."""
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    out = np.empty(d * d)
    out[:d] = H.diagonal().real
    i, j = np.tril_indices(d, -1)
    out[d::2] = _SQ2 * H[i, j].real
    out[d + 1::2] = _SQ2 * H[i, j].imag
    return out


def hmat(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of hvec."""
    v = np.asarray(v, dtype=float)
    out = np.zeros((d, d), dtype=complex)
    out[np.arange(d), np.arange(d)] = v[:d]
    i, j = np.tril_indices(d, -1)
    lower = (v[d::2] + 1j * v[d + 1::2]) / _SQ2
    out[i, j] = lower
    out[j, i] = lower.conj()
    return out


@lru_cache(maxsize=None)
def embed_map(d: int) -> sp.csr_matrix:
    """T_d with svec(E(X)) = T_d hvec(X); T_d^T T_d = 2 I."""
    def sidx(p, q):
        return p * (p + 1) // 2 + q

    rows, cols, vals = [], [], []
    k = np.arange(d)
    rows.append(sidx(k, k)); cols.append(k); vals.append(np.ones(d))
    rows.append(sidx(d + k, d + k)); cols.append(k); vals.append(np.ones(d))
    i, j = np.tril_indices(d, -1)
    if i.size:
        r = i * (i - 1) // 2 + j
        re_col = d + 2 * r
        im_col = d + 2 * r + 1
        rows.append(sidx(i, j)); cols.append(re_col); vals.append(np.ones(i.size))
        rows.append(sidx(d + i, d + j)); cols.append(re_col); vals.append(np.ones(i.size))
        rows.append(sidx(d + i, j)); cols.append(im_col); vals.append(np.ones(i.size))
        rows.append(sidx(d + j, i)); cols.append(im_col); vals.append(-np.ones(i.size))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(svec_len(2 * d), d * d))


@lru_cache(maxsize=None)
def _basis_to_vec(d: int) -> sp.csr_matrix:
    """Complex sparse B_d with vec(X) = B_d hvec(X) (row-major vec)."""
    rows, cols, vals = [], [], []
    k = np.arange(d)
    rows.append(k * d + k); cols.append(k); vals.append(np.ones(d, dtype=complex))
    i, j = np.tril_indices(d, -1)
    if i.size:
        r = i * (i - 1) // 2 + j
        one = np.full(i.size, 1.0 / _SQ2, dtype=complex)
        rows.append(i * d + j); cols.append(d + 2 * r); vals.append(one)
        rows.append(j * d + i); cols.append(d + 2 * r); vals.append(one)
        rows.append(i * d + j); cols.append(d + 2 * r + 1); vals.append(1j * one)
        rows.append(j * d + i); cols.append(d + 2 * r + 1); vals.append(-1j * one)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(d * d, d * d))


def hvec_op(vec_op: sp.spmatrix, d_out: int, d_in: int) -> sp.csr_matrix:
    """Conjugate a Hermiticity-preserving complex-linear vec-space map into
    a real sparse matrix on hvec coordinates."""
    B = _basis_to_vec(d_in)
    F = _basis_to_vec(d_out).conj().T
    M = (F @ sp.csr_matrix(vec_op, dtype=complex) @ B).tocoo()
    if M.nnz and np.max(np.abs(M.data.imag)) > 1e-12:
        raise ValueError("map does not preserve Hermiticity")
    out = sp.csr_matrix((M.data.real, (M.row, M.col)), shape=M.shape)
    out.data[np.abs(out.data) < 1e-14] = 0.0
    out.eliminate_zeros()
    return out


# ---------------------------------------------------------------------------
# vec-level building blocks (row-major vec: X[i, j] -> i*d + j)


def _digits(indices: np.ndarray, dims) -> list[np.ndarray]:
    out = []
    rem = indices
    for d in reversed(dims):
        out.append(rem % d)
        rem = rem // d
    return out[::-1]


def _from_digits(digs, dims) -> np.ndarray:
    idx = np.zeros_like(digs[0])
    for g, d in zip(digs, dims):
        idx = idx * d + g
    return idx


def vec_permutation(dims, perm) -> sp.csr_matrix:
    """vec-level matrix of X -> X_perm where new factor i is old factor perm[i]."""
    dims = tuple(int(x) for x in dims)
    perm = tuple(int(p) for p in perm)
    D = math.prod(dims)
    idx = np.arange(D)
    digs = _digits(idx, dims)
    new_dims = tuple(dims[p] for p in perm)
    row_map = _from_digits([digs[p] for p in perm], new_dims)
    # entry (i,j) of the permuted matrix equals entry (old i, old j)
    rows = row_map[:, None] * D + row_map[None, :]
    cols = idx[:, None] * D + idx[None, :]
    data = np.ones(D * D)
    return sp.csr_matrix((data, (rows.ravel(), cols.ravel())), shape=(D * D, D * D))


def vec_partial_transpose(dims, subset) -> sp.csr_matrix:
    dims = tuple(int(x) for x in dims)
    subset = set(int(s) for s in subset)
    D = math.prod(dims)
    idx = np.arange(D)
    digs = _digits(idx, dims)
    rows_i = np.repeat(idx, D)
    rows_j = np.tile(idx, D)
    di = [g[rows_i] for g in digs]
    dj = [g[rows_j] for g in digs]
    new_i = [dj[k] if k in subset else di[k] for k in range(len(dims))]
    new_j = [di[k] if k in subset else dj[k] for k in range(len(dims))]
    rows = _from_digits(new_i, dims) * D + _from_digits(new_j, dims)
    cols = rows_i * D + rows_j
    return sp.csr_matrix((np.ones(D * D), (rows, cols)), shape=(D * D, D * D))


def vec_partial_trace(dims, keep) -> sp.csr_matrix:
    dims = tuple(int(x) for x in dims)
    keep = tuple(sorted(int(k) for k in keep))
    traced = tuple(i for i in range(len(dims)) if i not in keep)
    Dk = math.prod(dims[i] for i in keep)
    Dt = math.prod(dims[i] for i in traced) if traced else 1
    D = math.prod(dims)
    a = np.arange(Dk)
    t = np.arange(Dt)
    adig = _digits(a, tuple(dims[i] for i in keep))
    tdig = _digits(t, tuple(dims[i] for i in traced)) if traced else []
    # big flat index with keep digits a and traced digits t
    strides = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    big = np.zeros((Dk, Dt), dtype=np.int64)
    for pos, g in zip(keep, adig):
        big += g[:, None] * strides[pos]
    for pos, g in zip(traced, tdig):
        big += g[None, :] * strides[pos]
    # enumerate (a, b, t) triples
    A = np.repeat(a, Dk * Dt)
    Bv = np.tile(np.repeat(a, Dt), Dk)
    Tv = np.tile(t, Dk * Dk)
    big_a = big[A, Tv]
    big_b = big[Bv, Tv]
    rows = A * Dk + Bv
    cols = big_a * D + big_b
    return sp.csr_matrix((np.ones(rows.size), (rows, cols)),
                         shape=(Dk * Dk, D * D))


def vec_congruence(K: np.ndarray) -> sp.csr_matrix:
    """vec-level matrix of X -> K X K^dag (K may be rectangular/sparse)."""
    Ks = sp.csr_matrix(K)
    return sp.kron(Ks, Ks.conj(), format="csr")


def vec_identity(D: int) -> sp.csr_matrix:
    return sp.identity(D * D, format="csr")


# hvec-level convenience wrappers

def op_partial_trace(dims, keep) -> sp.csr_matrix:
    Dk = math.prod(int(dims[i]) for i in sorted(keep))
    return hvec_op(vec_partial_trace(dims, keep), Dk, math.prod(dims))


def op_partial_transpose(dims, subset) -> sp.csr_matrix:
    D = math.prod(dims)
    return hvec_op(vec_partial_transpose(dims, subset), D, D)


def op_permutation(dims, perm) -> sp.csr_matrix:
    D = math.prod(dims)
    return hvec_op(vec_permutation(dims, perm), D, D)


def op_congruence(K) -> sp.csr_matrix:
    K = sp.csr_matrix(K)
    return hvec_op(vec_congruence(K), K.shape[0], K.shape[1])


# ---------------------------------------------------------------------------
# program builder


class HermitianProgramBuilder:
    """Accumulates Hermitian variable blocks and hvec-level constraints,
    then assembles a real ConicProgram plus bookkeeping maps."""

    def __init__(self):
        self._blocks = []          # (name, kind, param, col_start, col_end)
        self._by_name = {}
        self._ncols = 0
        self._rows = []            # list of (row_offset, col_offset, sparse)
        self._rhs = []
        self._nrows = 0
        self._row_names = {}
        self._c_parts = {}

    # -- variables ---------------------------------------------------------

    def _add_block(self, name, kind, param, length):
        if name in self._by_name:
            raise ValueError(f"duplicate block {name!r}")
        entry = (name, kind, param, self._ncols, self._ncols + length)
        self._blocks.append(entry)
        self._by_name[name] = entry
        self._ncols += length
        return name

    def add_herm_free(self, name: str, d: int):
        """Unconstrained complex Hermitian variable (hvec coordinates)."""
        return self._add_block(name, "herm_free", d, d * d)

    def add_herm_psd(self, name: str, d: int):
        """Complex PSD variable, stored as the embedded 2d-dim svec block."""
        return self._add_block(name, "herm_psd", d, svec_len(2 * d))

    def add_nonneg(self, name: str, n: int = 1):
        return self._add_block(name, "nonneg", n, n)

    def add_free(self, name: str, n: int = 1):
        return self._add_block(name, "free", n, n)

    def _hvec_extract(self, name) -> sp.spmatrix:
        """Sparse map from block coordinates to hvec of the complex matrix."""
        _, kind, d, a, b = self._by_name[name]
        if kind == "herm_free":
            return sp.identity(d * d, format="csr")
        if kind == "herm_psd":
            return (0.5 * embed_map(d).T).tocsr()
        raise ValueError(f"block {name!r} is not a Hermitian variable")

    # -- constraints ---------------------------------------------------------

    def _push_rows(self, terms_cols, rhs, name):
        # Vacuous rows (all-zero coefficients, zero rhs) arise when maps
        # cancel, e.g. the fixed coordinates of a permutation-symmetry row
        # P - I.  They carry only float dust, and diagonal equilibration
        # in the solver amplifies 1/norm, so drop them here.
        mats = [sp.csr_matrix(mat) for _, mat in terms_cols]
        sq = np.zeros(rhs.shape[0])
        for mat in mats:
            sq += np.asarray(mat.multiply(mat).sum(axis=1)).ravel()
        dust = sq <= 1e-24
        if np.any(dust & (np.abs(rhs) > 1e-9)):
            raise ValueError(
                f"constraint {name!r} forces a nonzero constant on an "
                "all-zero row; the terms cancel but the rhs does not")
        keep = ~dust
        if not np.all(keep):
            mats = [mat[keep] for mat in mats]
            rhs = rhs[keep]
        r0 = self._nrows
        nr = rhs.shape[0]
        for (col_off, _), mat in zip(terms_cols, mats):
            self._rows.append((r0, col_off, mat))
        self._rhs.append(rhs)
        self._nrows += nr
        if name:
            self._row_names.setdefault(name, []).append((r0, r0 + nr))

    def add_matrix_equality(self, terms, rhs=None, d_out=None, name=None):
        """Sum_b Op_b(X_b) = C as d_out^2 scalar rows in hvec coordinates.

        terms: list of (block_name, op) with op a real sparse matrix from
        the block's hvec coordinates to hvec of the output space, or None
        for the identity (square case). Raw (free/nonneg) blocks may appear
        with op mapping their coordinates directly into hvec rows, so a
        scalar can carry a matrix coefficient. rhs: complex Hermitian C or
        None.
        """
        mats = []
        for bname, op in terms:
            _, kind, _, a, b = self._by_name[bname]
            if kind in ("free", "nonneg"):
                mat = sp.csr_matrix(op)
                if mat.shape[1] != b - a:
                    raise ValueError("raw term column count mismatch")
            else:
                ext = self._hvec_extract(bname)
                mat = ext if op is None else sp.csr_matrix(op) @ ext
            mats.append((a, mat))
        nr = mats[0][1].shape[0]
        if any(m.shape[0] != nr for _, m in mats):
            raise ValueError("output dimensions differ between terms")
        if rhs is None:
            vec = np.zeros(nr)
        else:
            vec = hvec(np.asarray(rhs, dtype=complex))
            if vec.shape[0] != nr:
                raise ValueError("rhs dimension mismatch")
        self._push_rows(mats, vec, name)

    def add_scalar_equality(self, herm_terms=(), raw_terms=(), rhs=0.0, name=None):
        """Sum Re tr(F^dag X_b) + Sum w.x_raw = rhs as one row."""
        mats = []
        for bname, F in herm_terms:
            ext = self._hvec_extract(bname)
            row = sp.csr_matrix(hvec(np.asarray(F, dtype=complex))[None, :]) @ ext
            mats.append((self._by_name[bname][3], row))
        for bname, w in raw_terms:
            _, kind, p, a, b = self._by_name[bname]
            w = np.atleast_2d(np.asarray(w, dtype=float))
            if w.shape != (1, b - a):
                raise ValueError("raw coefficient length mismatch")
            mats.append((a, sp.csr_matrix(w)))
        self._push_rows(mats, np.array([float(rhs)]), name)

    # -- objective -----------------------------------------------------------

    def add_objective_herm(self, name, F):
        """Add Re tr(F^dag X_name) to the minimized objective."""
        ext = self._hvec_extract(name)
        row = (sp.csr_matrix(hvec(np.asarray(F, dtype=complex))[None, :]) @ ext).toarray().ravel()
        a = self._by_name[name][3]
        self._c_parts[a] = self._c_parts.get(a, 0) + row

    def add_objective_raw(self, name, w):
        _, kind, p, a, b = self._by_name[name]
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != b - a:
            raise ValueError("objective length mismatch")
        self._c_parts[a] = self._c_parts.get(a, 0) + w

    # -- assembly ------------------------------------------------------------

    def build(self) -> "BuiltProgram":
        cones = []
        for name, kind, p, a, b in self._blocks:
            if kind == "herm_free":
                cones.append(("free", b - a))
            elif kind == "herm_psd":
                cones.append(("psd", 2 * p))
            else:
                cones.append((kind, b - a))
        rows = []
        cols = []
        vals = []
        for r0, c0, mat in self._rows:
            coo = mat.tocoo()
            rows.append(coo.row + r0)
            cols.append(coo.col + c0)
            vals.append(coo.data)
        A = sp.csr_matrix(
            (np.concatenate(vals) if vals else np.empty(0),
             (np.concatenate(rows) if rows else np.empty(0, dtype=int),
              np.concatenate(cols) if cols else np.empty(0, dtype=int))),
            shape=(self._nrows, self._ncols)).tocsc()
        b = np.concatenate(self._rhs) if self._rhs else np.empty(0)
        c = np.zeros(self._ncols)
        for a0, part in self._c_parts.items():
            c[a0:a0 + part.shape[0]] += part
        prog = ConicProgram(c=c, A=A, b=b, cones=tuple(cones))
        return BuiltProgram(prog, dict(self._by_name),
                            {k: list(v) for k, v in self._row_names.items()})


class BuiltProgram:
    """ConicProgram plus name -> block/rows bookkeeping."""

    def __init__(self, prog: ConicProgram, blocks, row_names):
        self.program = prog
        self.blocks = blocks
        self.row_names = row_names

    def matrix(self, x: np.ndarray, name: str) -> np.ndarray:
        """Recover the complex Hermitian value of a named block from a
        solution vector (J-symmetric extraction for embedded blocks)."""
        _, kind, d, a, b = self.blocks[name]
        if kind == "herm_free":
            return hmat(x[a:b], d)
        if kind == "herm_psd":
            hv = 0.5 * (embed_map(d).T @ x[a:b])
            return hmat(hv, d)
        raise ValueError(f"{name!r} is not a Hermitian block")

    def raw(self, x: np.ndarray, name: str) -> np.ndarray:
        _, kind, p, a, b = self.blocks[name]
        return x[a:b]
