"""First-order splitting solver for standard-form conic programs.

    minimize    c^T x
    subject to  A x = b,   x in K = free x nonneg x PSD-blocks

solved by ADMM on the homogeneous self-dual embedding: the skew system
u_next = (I + Q)^{-1}(u + v) followed by projection onto C = K x R^m x R+,
with Q built from (A, b, c). The linear system is reduced to a fixed
quasi-definite system factorized once (sparse LU); an optional matrix-free
conjugate-gradient mode avoids the factorization for the largest programs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cones import ConeLayout, svec_len


@dataclass(frozen=True)
class ConicProgram:
    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    cones: tuple

    def __post_init__(self):
        A = sp.csc_matrix(self.A)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        layout = ConeLayout(self.cones)
        if A.shape != (b.shape[0], c.shape[0]):
            raise ValueError(f"A shape {A.shape} vs b {b.shape}, c {c.shape}")
        if layout.dim != c.shape[0]:
            raise ValueError(f"cone dimension {layout.dim} != len(c) {c.shape[0]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "cones", tuple((str(k), int(p)) for k, p in self.cones))

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class SolverSettings:
    eps_primal: float = 1e-6
    eps_dual: float = 1e-6
    eps_gap: float = 1e-6
    max_iters: int = 200000
    alpha: float = 1.5          # over-relaxation in (0, 2)
    scale: bool = True          # diagonal (Ruiz) equilibration
    check_every: int = 25
    aa_memory: int = 10         # Anderson acceleration window (0 disables)
    indirect: bool = False      # CG instead of the sparse LU factorization
    cg_tol: float = 1e-9
    verbose: bool = False

    def __post_init__(self):
        if min(self.eps_primal, self.eps_dual, self.eps_gap) <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError("over-relaxation parameter must lie in (0, 2)")


#: regression-fixture profile
TIGHT = SolverSettings(eps_primal=1e-8, eps_dual=1e-8, eps_gap=1e-8)


@dataclass
class ConicSolution:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    status: str                 # optimal | infeasible | unbounded | max_iters
    residuals: tuple            # (primal, dual, gap), unscaled
    iterations: int
    primal_objective: float
    dual_objective: float
    solve_time: float


def _ruiz_equilibrate(A, layout: ConeLayout, iters: int = 10):
    """Row/column equilibration; psd-block columns share one scale so the
    cone geometry is preserved.  Cumulative factors are clamped: a near-zero
    (numerically dependent) row would otherwise be amplified without bound,
    and the recovered dual variable along it would swamp the unscaled
    objective while every residual test still passes."""
    m, n = A.shape
    dr = np.ones(m)
    dc = np.ones(n)
    A = A.tocsr()
    M = A.copy()
    for _ in range(iters):
        M2 = M.multiply(M)
        rn = np.sqrt(np.asarray(M2.sum(axis=1)).ravel())
        cn = np.sqrt(np.asarray(M2.sum(axis=0)).ravel())
        rn[rn == 0] = 1.0
        cn[cn == 0] = 1.0
        for kind, p, a, b in layout.offsets:
            if kind == "psd":
                g = np.exp(np.mean(np.log(cn[a:b][cn[a:b] > 0]))) if np.any(cn[a:b] > 0) else 1.0
                cn[a:b] = g if g > 0 else 1.0
        dr = np.clip(dr / np.sqrt(rn), 1e-4, 1e4)
        dc = np.clip(dc / np.sqrt(cn), 1e-4, 1e4)
        M = sp.diags(dr) @ A @ sp.diags(dc)
    return M.tocsc(), dr, dc


class _DirectKKT:
    """Factor M = [[I, -A^T], [A, I]] once; solve via splu."""

    def __init__(self, A):
        m, n = A.shape
        M = sp.bmat([[sp.eye(n), -A.T], [A, sp.eye(m)]], format="csc")
        self.lu = spla.splu(M)
        self.n, self.m = n, m

    def solve2(self, rx, ry):
        z = self.lu.solve(np.concatenate([rx, ry]))
        return z[:self.n], z[self.n:]


class _IndirectKKT:
    """Matrix-free solve of the same system via CG on I + A^T A."""

    def __init__(self, A, tol):
        self.A = A.tocsr()
        self.AT = self.A.T.tocsr()
        self.tol = tol
        n = A.shape[1]
        self.op = spla.LinearOperator(
            (n, n), matvec=lambda z: z + self.AT @ (self.A @ z), dtype=float)
        self.warm = None

    def solve2(self, rx, ry):
        rhs = rx + self.AT @ ry
        z, info = spla.cg(self.op, rhs, rtol=self.tol, atol=0.0, x0=self.warm,
                          maxiter=10000)
        if info != 0:
            raise RuntimeError(f"inner CG failed to converge (info={info})")
        self.warm = z
        zy = ry - self.A @ z
        return z, zy


def _kkt_solver(A, settings):
    if settings.indirect:
        return _IndirectKKT(A, settings.cg_tol)
    try:
        return _DirectKKT(A)
    except (MemoryError, RuntimeError):
        return _IndirectKKT(A, settings.cg_tol)


def solve(prog: ConicProgram, settings: SolverSettings | None = None) -> ConicSolution:
    """Run the splitting iteration; deterministic for fixed inputs."""
    st = settings or SolverSettings()
    layout = ConeLayout(prog.cones)
    t0 = time.perf_counter()

    A0, b0, c0 = prog.A, prog.b, prog.c
    if st.scale:
        A, dr, dc = _ruiz_equilibrate(A0, layout)
        b = dr * b0
        c = dc * c0
    else:
        A, dr, dc = A0.tocsc(), np.ones(prog.m), np.ones(prog.n)
        b, c = b0.copy(), c0.copy()
    # scalar normalization keeps tau well-coupled
    sb = 1.0 / max(np.linalg.norm(b), 1e-6)
    sc = 1.0 / max(np.linalg.norm(c), 1e-6)
    b = b * sb
    c = c * sc

    n, m = prog.n, prog.m
    kkt = _kkt_solver(A, st)
    d_x, d_y = c, -b
    g_x, g_y = kkt.solve2(d_x, d_y)
    denom = 1.0 + d_x @ g_x + d_y @ g_y

    u = np.zeros(n + m + 1)
    v = np.zeros(n + m + 1)
    u[-1] = 1.0
    v[-1] = 1.0

    nrm_b0 = np.linalg.norm(b0)
    nrm_c0 = np.linalg.norm(c0)

    status = "max_iters"
    res = (np.inf, np.inf, np.inf)
    pobj = dobj = np.nan
    best = None

    N = n + m + 1

    def step(w):
        """One splitting iteration from the stacked point w = (u, v)."""
        uu = w[:N]
        vv = w[N:]
        ww = uu + vv
        p_x, p_y = kkt.solve2(ww[:n], ww[n:n + m])
        ztau = (ww[-1] + d_x @ p_x + d_y @ p_y) / denom
        z_x = p_x - ztau * g_x
        z_y = p_y - ztau * g_y
        t_x = st.alpha * z_x + (1 - st.alpha) * uu[:n]
        t_y = st.alpha * z_y + (1 - st.alpha) * uu[n:n + m]
        t_tau = st.alpha * ztau + (1 - st.alpha) * uu[-1]
        u_new = np.empty(N)
        u_new[:n] = layout.project(t_x - vv[:n])
        u_new[n:n + m] = t_y - vv[n:n + m]
        u_new[-1] = max(t_tau - vv[-1], 0.0)
        v_new = vv.copy()
        v_new[:n] += u_new[:n] - t_x
        v_new[n:n + m] += u_new[n:n + m] - t_y
        v_new[-1] += u_new[-1] - t_tau
        return np.concatenate([u_new, v_new]), u_new, v_new

    w = np.concatenate([u, v])
    # The splitting map is positively homogeneous: step(t*w) = t*step(w) for
    # t > 0, so w = 0 is a spurious zero-residual fixed point.  Plain
    # iterations never reach it, but the accelerated step below minimises the
    # residual norm and would happily collapse onto it, taking tau and kappa
    # down together.  Renormalising every iterate to the starting norm leaves
    # the plain trajectory unchanged up to scale (all stopping tests are
    # ratios in tau) and removes the zero ray from the acceleration's reach.
    w_norm = float(np.linalg.norm(w))
    mem_df: list = []
    mem_dg: list = []
    f_prev = g_prev = None
    aa_pending = None           # (reference residual norm, plain fallback point)
    aa_accept = aa_reject = 0
    k = 0
    iters_done = 0
    while iters_done < st.max_iters:
        iters_done += 1
        k = iters_done
        gpt, u, v = step(w)
        gn = float(np.linalg.norm(gpt))
        if gn > 1e-30:
            gpt = gpt * (w_norm / gn)
        f = gpt - w
        fn = float(np.linalg.norm(f))
        if aa_pending is not None:
            fn_ref, fallback = aa_pending
            aa_pending = None
            if not np.isfinite(fn) or fn > fn_ref:
                # accelerated point made the fixed-point residual worse
                aa_reject += 1
                mem_df.clear()
                mem_dg.clear()
                f_prev = g_prev = None
                w = fallback
                continue
            aa_accept += 1
        if f_prev is not None and st.aa_memory > 0:
            mem_df.append(f - f_prev)
            mem_dg.append(gpt - g_prev)
            if len(mem_df) > st.aa_memory:
                mem_df.pop(0)
                mem_dg.pop(0)
        f_prev, g_prev = f, gpt
        if mem_df:
            F = np.stack(mem_df, axis=1)
            G = np.stack(mem_dg, axis=1)
            FtF = F.T @ F
            ridge = 1e-12 * max(np.trace(FtF), 1e-30)
            try:
                theta = np.linalg.solve(FtF + ridge * np.eye(F.shape[1]), F.T @ f)
                w_next = gpt - G @ theta
                wn = float(np.linalg.norm(w_next))
                if wn > 1e-30:
                    w_next = w_next * (w_norm / wn)
                aa_pending = (fn, gpt)
            except np.linalg.LinAlgError:
                w_next = gpt
            w = w_next
        else:
            w = gpt

        if k % st.check_every and k != st.max_iters:
            continue
        tau = u[-1]
        kappa = v[-1]
        if tau > 1e-12 * max(kappa, 1.0):
            x = dc * u[:n] / tau / sb
            y = dr * u[n:n + m] / tau / sc
            s = (v[:n] / dc) / tau / sc
            rp = np.linalg.norm(A0 @ x - b0) / (1.0 + nrm_b0)
            rd = np.linalg.norm(A0.T @ y + s - c0) / (1.0 + nrm_c0)
            po = c0 @ x
            do = b0 @ y
            gap = abs(po - do) / (1.0 + abs(po) + abs(do))
            res = (float(rp), float(rd), float(gap))
            pobj, dobj = float(po), float(do)
            best = (x, y, s)
            if st.verbose and (k % (st.check_every * 40) == 0 or k == st.check_every):
                print(f"  iter {k:6d}  rp {rp:.2e}  rd {rd:.2e}  gap {gap:.2e}"
                      f"  aa +{aa_accept}/-{aa_reject}")
            if rp <= st.eps_primal and rd <= st.eps_dual and gap <= st.eps_gap:
                status = "optimal"
                break
        else:
            # tau collapsed: look for infeasibility/unboundedness certificates
            yc = dr * u[n:n + m] / sc
            xc = dc * u[:n] / sb
            sc_cert = (v[:n] / dc) / sc
            bty = b0 @ yc
            ctx = c0 @ xc
            if bty > 1e-12:
                r = np.linalg.norm(A0.T @ yc + sc_cert) / bty
                if r <= st.eps_primal * max(1.0, nrm_c0):
                    status = "infeasible"
                    best = (xc, yc, sc_cert)
                    res = (np.inf, np.inf, np.inf)
                    break
            if ctx < -1e-12:
                r = np.linalg.norm(A0 @ xc) / (-ctx)
                if r <= st.eps_primal * max(1.0, nrm_b0):
                    status = "unbounded"
                    best = (xc, yc, sc_cert)
                    res = (np.inf, np.inf, np.inf)
                    break

    if best is None:
        tau = max(u[-1], 1e-300)
        best = (dc * u[:n] / tau / sb, dr * u[n:n + m] / tau / sc,
                (v[:n] / dc) / tau / sc)
    x, y, s = best
    return ConicSolution(
        x=x, y=y, s=s, status=status, residuals=res, iterations=k,
        primal_objective=float(pobj), dual_objective=float(dobj),
        solve_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# sparse-triplet JSON dump/load for debugging


def program_to_json(prog: ConicProgram) -> str:
    Acoo = prog.A.tocoo()
    return json.dumps({
        "n": prog.n,
        "m": prog.m,
        "c": prog.c.tolist(),
        "b": prog.b.tolist(),
        "cones": [[k, p] for k, p in prog.cones],
        "A": {"row": Acoo.row.tolist(), "col": Acoo.col.tolist(),
              "val": Acoo.data.tolist()},
    })


def program_from_json(text: str) -> ConicProgram:
    obj = json.loads(text)
    A = sp.coo_matrix((obj["A"]["val"], (obj["A"]["row"], obj["A"]["col"])),
                      shape=(obj["m"], obj["n"])).tocsc()
    return ConicProgram(c=np.array(obj["c"]), A=A, b=np.array(obj["b"]),
                        cones=tuple((k, p) for k, p in obj["cones"]))
