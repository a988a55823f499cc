"""Genuine multiparty negativity via the fully-decomposable-witness SDP.

    N(rho) = -min tr(rho W)
    s.t.    W = P_m + Q_m^{T_m},  P_m >= 0,  0 <= Q_m <= I
            for all bipartitions m | mbar of the parties

plus vanishing-threshold sweeps along white-noise lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import qcore
from .conic import (
    HermitianProgramBuilder,
    SolverSettings,
    hvec,
    op_partial_transpose,
    solve,
)
from .qcore import DensityMatrix, PartySplit, PureState, white_noise_mix

MAX_DIM = 256


@dataclass
class GmnResult:
    value: float
    witness: np.ndarray
    certificates: dict          # cut index -> (P_m, Q_m), cone-clipped
    cuts: list                  # PartySplit per bipartition, enumeration order
    residuals: tuple
    status: str
    iterations: int
    solve_time: float


def _clip_psd(M: np.ndarray, hi: float | None = None) -> np.ndarray:
    w, V = np.linalg.eigh(M)
    w = np.clip(w, 0.0, hi)
    out = (V * w) @ V.conj().T
    return 0.5 * (out + out.conj().T)


def build_gmn_program(rho: DensityMatrix, split: PartySplit):
    """Witness SDP for the given party split; returns (built, cuts)."""
    if split.k not in (3, 4):
        raise ValueError("gmn supports 3 or 4 parties")
    D = rho.D
    if D > MAX_DIM:
        raise ValueError(f"dimension {D} exceeds the documented ceiling {MAX_DIM}")
    if not split.covers(len(rho.dims)):
        raise ValueError("split does not cover all factors")
    dims = rho.dims.dims
    bld = HermitianProgramBuilder()
    bld.add_herm_free("W", D)
    bld.add_objective_herm("W", rho.entries)
    eye = np.eye(D, dtype=complex)
    cuts = []
    for ci, (left, right) in enumerate(qcore.bipartitions(split)):
        cut = qcore.cut_of(split, left, right)
        cuts.append(cut)
        pt_op = op_partial_transpose(dims, cut.parties[1])
        bld.add_herm_psd(f"P{ci}", D)
        bld.add_herm_psd(f"Q{ci}", D)
        bld.add_herm_psd(f"R{ci}", D)
        # W - P - Q^{T_m} = 0
        ident = sp.identity(D * D, format="csr")
        bld.add_matrix_equality(
            [("W", None), (f"P{ci}", -ident), (f"Q{ci}", -pt_op)],
            name=f"decompose{ci}")
        # Q + R = I  (R is the slack giving Q <= I)
        bld.add_matrix_equality(
            [(f"Q{ci}", None), (f"R{ci}", None)], rhs=eye, name=f"upper{ci}")
    return bld.build(), cuts


def gmn(rho: DensityMatrix, split: PartySplit,
        settings: SolverSettings | None = None) -> GmnResult:
    """Genuine multiparty negativity of rho under the given party grouping."""
    built, cuts = build_gmn_program(rho, split)
    sol = solve(built.program, settings)
    if sol.status not in ("optimal", "max_iters"):
        raise RuntimeError(f"witness SDP returned status {sol.status}")
    W = built.matrix(sol.x, "W")
    value = max(0.0, -float(np.trace(rho.entries @ W).real))
    certs = {}
    for ci in range(len(cuts)):
        P = _clip_psd(built.matrix(sol.x, f"P{ci}"))
        Q = _clip_psd(built.matrix(sol.x, f"Q{ci}"), hi=1.0)
        certs[ci] = (P, Q)
    return GmnResult(value=value, witness=W, certificates=certs, cuts=cuts,
                     residuals=sol.residuals, status=sol.status,
                     iterations=sol.iterations, solve_time=sol.solve_time)


@dataclass
class ThresholdResult:
    p_c: float
    bracket: tuple
    evaluations: list           # (p, gmn value) pairs in evaluation order
    resolution: float


def gmn_threshold(psi: PureState, split: PartySplit, p_grid,
                  settings: SolverSettings | None = None,
                  vanish_tol: float = 1e-5,
                  resolution: float = 1e-4) -> ThresholdResult:
    """Smallest white-noise fraction where the GMN of (1-p)|psi><psi| + p I/D
    drops below vanish_tol, bisected down to the requested resolution."""
    grid = sorted(float(p) for p in p_grid)
    if any(p < 0 or p > 1 for p in grid):
        raise ValueError("grid must lie in [0, 1]")
    evals = []

    def value(p):
        res = gmn(white_noise_mix(psi, p), split, settings)
        evals.append((p, res.value))
        return res.value

    lo = None
    hi = None
    for p in grid:
        if value(p) < vanish_tol:
            hi = p
            break
        lo = p
    if hi is None:
        raise ValueError("gmn does not vanish on the given grid")
    if lo is None:
        lo = 0.0
        if hi == 0.0:
            return ThresholdResult(0.0, (0.0, 0.0), evals, resolution)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if value(mid) < vanish_tol:
            hi = mid
        else:
            lo = mid
    return ThresholdResult(0.5 * (lo + hi), (lo, hi), evals, resolution)
