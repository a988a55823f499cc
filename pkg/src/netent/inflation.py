"""Ring-inflation robustness SDPs for triangle and tetrahedron networks.

Whether t*rho + (1-t)*I/D admits a consistent multi-copy extension is a
set of constraints linear in t, so the largest such t is found by a
single SDP per diagram; 1 - t_max is then a certified noise bound below
which the white-noise mixture keeps genuine network entanglement. The
two-copy programs carry a swap symmetry that can be built into the
parametrization (sector blocks instead of the full inflated matrix), and
a local dimension-reduction channel maps dim-4 parties to dim 3 so that
four-party instances stay within memory.

Every marginal-matching, symmetry, and PPT constraint is entered as a
named row group so the transcription can be audited constraint by
constraint, and solutions are re-verified against the named marginals
after the solve.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .conic import (
    BuiltProgram,
    HermitianProgramBuilder,
    SolverSettings,
    hmat,
    hvec,
    hvec_op,
    op_congruence,
    solve,
    vec_partial_trace,
    vec_partial_transpose,
    vec_permutation,
)
from .qcore import DensityMatrix, partial_trace

#: largest inflated matrix dimension accepted without the sector
#: parametrization (two-copy triangle programs)
MAX_FULL_INFLATED = 256
#: largest per-copy dimension accepted with the sector parametrization.
#: 81 admits the symmetric two-copy program for three ququarts (sector
#: sizes 2080/2016) and for four qutrits; building those programs is
#: cheap enough to test, solving them is a long-running job.
MAX_REDUCED_BASE = 81
#: largest local party dimension for the two-copy tetrahedron program
MAX_TETRA_LOCAL = 3
#: largest unreduced inflated dimension for the tetrahedron; above this
#: the marginal operators alone outgrow memory, so the sector route is
#: mandatory (four qutrits land there)
MAX_TETRA_FULL_INFLATED = 4096

_KRAUS_TOL = 1e-12


# ---------------------------------------------------------------------------
# marginal labels
#
# Inflated factors are ordered copy-major: (A1 B1 C1 A2 B2 C2 ...). A
# marginal is named by the labels it keeps, in the kept order.


def _fmt(labels) -> str:
    return "(" + "".join(f"{p}{c}" for p, c in labels) + ")"


def _factor_index(label, letters) -> int:
    p, c = label
    return (c - 1) * len(letters) + letters.index(p)


def _marginal_vec_op(inf_dims, letters, labels):
    """vec-level map keeping the named factors in the named order."""
    idx = [_factor_index(lab, letters) for lab in labels]
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated factor in marginal {_fmt(labels)}")
    keep = sorted(idx)
    op = vec_partial_trace(inf_dims, keep)
    kept = tuple(inf_dims[i] for i in keep)
    perm = tuple(keep.index(i) for i in idx)
    if perm != tuple(range(len(perm))):
        op = vec_permutation(kept, perm) @ op
        kept = tuple(kept[p] for p in perm)
    return op, kept


# ---------------------------------------------------------------------------
# swap sectors


@dataclass(frozen=True)
class SymmetryBlocks:
    """Isometries onto the symmetric/antisymmetric sectors of a two-copy
    space; columns are orthonormal, so Q+^dag Q+ = I and Q-^dag Q- = I."""

    q_plus: sp.csr_matrix
    q_minus: sp.csr_matrix

    @property
    def n_plus(self) -> int:
        return self.q_plus.shape[1]

    @property
    def n_minus(self) -> int:
        return self.q_minus.shape[1]


def swap_isometries(D: int) -> SymmetryBlocks:
    """Sector isometries for the swap of two D-dimensional copies."""
    rt = 1.0 / math.sqrt(2.0)
    rows_p, cols_p, vals_p = [], [], []
    rows_m, cols_m, vals_m = [], [], []
    col_p = 0
    for i in range(D):
        rows_p.append(i * D + i)
        cols_p.append(col_p)
        vals_p.append(1.0)
        col_p += 1
    col_m = 0
    for i in range(D):
        for j in range(i + 1, D):
            rows_p += [i * D + j, j * D + i]
            cols_p += [col_p, col_p]
            vals_p += [rt, rt]
            col_p += 1
            rows_m += [i * D + j, j * D + i]
            cols_m += [col_m, col_m]
            vals_m += [rt, -rt]
            col_m += 1
    n_plus = D * (D + 1) // 2
    n_minus = D * (D - 1) // 2
    qp = sp.csr_matrix((vals_p, (rows_p, cols_p)), shape=(D * D, n_plus))
    qm = sp.csr_matrix((vals_m, (rows_m, cols_m)), shape=(D * D, n_minus))
    return SymmetryBlocks(qp, qm)


# ---------------------------------------------------------------------------
# program assembly


@dataclass(frozen=True)
class _Check:
    kind: str            # "match" | "ppt" | "target"
    name: str
    dim: int
    lhs: tuple           # ((block_name, sparse op into check hvec), ...)
    rhs: tuple = ()


@dataclass
class InflationProgram:
    scenario: str
    level: int
    party_dims: tuple
    rho: DensityMatrix
    reduced: bool
    built: BuiltProgram
    checks: tuple
    state_terms: dict
    symmetry: SymmetryBlocks | None = None

    @property
    def program(self):
        return self.built.program

    @property
    def marginal_rows(self) -> dict:
        """Constraint-row ranges of the named marginal equalities."""
        return {
            name: list(ranges)
            for name, ranges in self.built.row_names.items()
            if name.startswith(("match:", "target:"))
        }

    def inflated_state(self, x: np.ndarray, name: str) -> np.ndarray:
        """Materialize an inflated state from a solution vector."""
        if name not in self.state_terms:
            raise ValueError(f"no inflated state named {name!r}")
        terms = self.state_terms[name]
        out = None
        for block, op in terms:
            v = hvec(self.built.matrix(x, block))
            v = v if op is None else op @ v
            out = v if out is None else out + v
        d = math.isqrt(out.shape[0])
        return hmat(out, d)


class _RingBuilder:
    """Shared assembly for the multi-copy ring programs."""

    def __init__(self, rho: DensityMatrix, letters: str, copies: int):
        self.rho = rho
        self.letters = letters
        self.copies = copies
        self.dims = tuple(rho.dims.dims)
        self.base_D = rho.D
        self.inf_dims = self.dims * copies
        self.D_inf = self.base_D**copies
        self.bld = HermitianProgramBuilder()
        self.checks = []
        self.state_terms = {}
        self.symmetry = None

    def _compose(self, name, op):
        """Terms of a state's hvec image under a hvec-level op."""
        return tuple(
            (block, op if m is None else op @ m)
            for block, m in self.state_terms[name]
        )

    def add_state_full(self, name, perms):
        """One inflated PSD matrix with explicit symmetry rows."""
        self.bld.add_herm_psd(name, self.D_inf)
        self.state_terms[name] = ((name, None),)
        self.bld.add_scalar_equality(
            herm_terms=[(name, np.eye(self.D_inf))],
            rhs=1.0,
            name=f"trace:{name}",
        )
        eye = sp.identity(self.D_inf * self.D_inf, format="csr")
        for tag, perm in perms:
            P = hvec_op(
                vec_permutation(self.inf_dims, perm), self.D_inf, self.D_inf
            )
            self.bld.add_matrix_equality(
                [(name, P - eye)], name=f"sym:{name}{tag}"
            )

    def add_state_sectors(self, name):
        """Two-copy state parametrized by swap-sector blocks; the swap
        symmetry is automatic and the trace splits over the sectors."""
        if self.symmetry is None:
            self.symmetry = swap_isometries(self.base_D)
        iso = self.symmetry
        bp, bm = f"{name}_plus", f"{name}_minus"
        self.bld.add_herm_psd(bp, iso.n_plus)
        self.bld.add_herm_psd(bm, iso.n_minus)
        self.state_terms[name] = (
            (bp, op_congruence(iso.q_plus)),
            (bm, op_congruence(iso.q_minus)),
        )
        self.bld.add_scalar_equality(
            herm_terms=[(bp, np.eye(iso.n_plus)), (bm, np.eye(iso.n_minus))],
            rhs=1.0,
            name=f"trace:{name}",
        )

    def add_noise_scalar(self):
        self.bld.add_nonneg("t", 1)
        self.bld.add_nonneg("t_slack", 1)
        self.bld.add_scalar_equality(
            raw_terms=[("t", [1.0]), ("t_slack", [1.0])],
            rhs=1.0,
            name="t-range",
        )
        self.bld.add_objective_raw("t", [-1.0])

    def add_target_line(self, state):
        """First-copy marginal of `state` equals t rho + (1-t) I/D."""
        first = tuple((p, 1) for p in self.letters)
        op, kept = _marginal_vec_op(self.inf_dims, self.letters, first)
        H = hvec_op(op, self.base_D, self.D_inf)
        terms = list(self._compose(state, H))
        eye = np.eye(self.base_D) / self.base_D
        direction = np.asarray(self.rho.entries) - eye
        tcol = sp.csr_matrix(-hvec(direction).reshape(-1, 1))
        terms.append(("t", tcol))
        name = f"target:{state}{_fmt(first)}"
        self.bld.add_matrix_equality(terms, rhs=eye, name=name)
        self.checks.append(
            _Check("target", name, self.base_D, self._compose(state, H))
        )

    def add_match(self, lhs_state, lhs_labels, rhs_state, rhs_labels):
        opl, dl = _marginal_vec_op(self.inf_dims, self.letters, lhs_labels)
        opr, dr = _marginal_vec_op(self.inf_dims, self.letters, rhs_labels)
        if dl != dr:
            raise ValueError(
                f"marginals {_fmt(lhs_labels)} and {_fmt(rhs_labels)} differ"
                " in dimension"
            )
        d = math.prod(dl)
        L = self._compose(lhs_state, hvec_op(opl, d, self.D_inf))
        R = self._compose(rhs_state, hvec_op(opr, d, self.D_inf))
        name = (
            f"match:{lhs_state}{_fmt(lhs_labels)}"
            f"={rhs_state}{_fmt(rhs_labels)}"
        )
        self.bld.add_matrix_equality(
            list(L) + [(b, -m) for b, m in R], name=name
        )
        self.checks.append(_Check("match", name, d, L, R))

    def add_ppt(self, state, labels, pt_labels):
        """PSD slack pinned to the partial transpose of a named marginal
        (labels=None transposes the full inflated state)."""
        if labels is None:
            kept = self.inf_dims
            positions = [
                _factor_index(lab, self.letters) for lab in pt_labels
            ]
            op = vec_partial_transpose(self.inf_dims, positions)
            name = f"ppt:{state}^T{_fmt(pt_labels)}"
        else:
            if any(lab not in labels for lab in pt_labels):
                raise ValueError("transposed subsystem is not kept")
            op, kept = _marginal_vec_op(self.inf_dims, self.letters, labels)
            positions = [labels.index(lab) for lab in pt_labels]
            op = vec_partial_transpose(kept, positions) @ op
            name = f"ppt:{state}{_fmt(labels)}^T{_fmt(pt_labels)}"
        d = math.prod(kept)
        terms = self._compose(state, hvec_op(op, d, self.D_inf))
        slack = "S" + str(sum(1 for c in self.checks if c.kind == "ppt"))
        self.bld.add_herm_psd(slack, d)
        self.bld.add_matrix_equality(
            list(terms) + [(slack, -sp.identity(d * d, format="csr"))],
            name=name,
        )
        self.checks.append(_Check("ppt", name, d, terms))

    def finish(self, scenario, level, reduced) -> InflationProgram:
        return InflationProgram(
            scenario=scenario,
            level=level,
            party_dims=self.dims,
            rho=self.rho,
            reduced=reduced,
            built=self.bld.build(),
            checks=tuple(self.checks),
            state_terms=dict(self.state_terms),
            symmetry=self.symmetry,
        )


def _ring_windows(letters):
    """Kept-label windows for the two-copy independence constraints: a
    chain of three ring-consecutive nodes plus the node two steps past
    the chain, which shares no source with it and is transposed."""
    k = len(letters)
    ring = [(p, 1) for p in letters] + [(p, 2) for p in letters]
    out = []
    for i in range(k):
        chain = [ring[(i + j) % (2 * k)] for j in range(3)]
        lone = ring[(i + 4) % (2 * k)]
        out.append((tuple(chain + [lone]), (lone,)))
    return out


def _build_ring2(rho, scenario, letters, use_symmetry):
    D = rho.D
    full_cap = (
        MAX_FULL_INFLATED if len(letters) == 3 else MAX_TETRA_FULL_INFLATED
    )
    if not use_symmetry and D * D > full_cap:
        raise ValueError(
            f"inflated dimension {D * D} exceeds the ceiling"
            f" {full_cap}; use the sector parametrization or"
            " reduce local dimensions first"
        )
    if use_symmetry and D > MAX_REDUCED_BASE:
        raise ValueError(
            f"per-copy dimension {D} exceeds the sector ceiling"
            f" {MAX_REDUCED_BASE}"
        )
    rb = _RingBuilder(rho, letters, copies=2)
    k = len(letters)
    swap = tuple(range(k, 2 * k)) + tuple(range(k))
    for sname in ("tau", "gamma"):
        if use_symmetry:
            rb.add_state_sectors(sname)
        else:
            rb.add_state_full(sname, [("(21)", swap)])
    rb.add_noise_scalar()
    rb.add_target_line("tau")
    for i in range(k):
        x, y = letters[i], letters[(i + 1) % k]
        if i < k - 1:
            pair = ((x, 1), (y, 1), (x, 2), (y, 2))
            rb.add_match("gamma", pair, "tau", pair)
        else:
            # the ring closure connects the last party of one copy to the
            # first party of the other, so the matched pairs cross copies
            lhs = ((x, 1), (y, 2), (x, 2), (y, 1))
            rhs = ((x, 1), (y, 1), (x, 2), (y, 2))
            rb.add_match("gamma", lhs, "tau", rhs)
    first = tuple((p, 1) for p in letters)
    rb.add_ppt("tau", None, first)
    for labels, pt in _ring_windows(letters):
        rb.add_ppt("gamma", labels, pt)
    return rb.finish(scenario, 2, use_symmetry)


def build_level2_triangle(
    rho: DensityMatrix, use_symmetry: bool = False
) -> InflationProgram:
    """Two-copy ring inflation of the triangle network."""
    dims = tuple(rho.dims.dims)
    if len(dims) != 3:
        raise ValueError("the triangle program needs a three-party state")
    return _build_ring2(rho, "triangle", "ABC", use_symmetry)


def build_level2_tetrahedron(
    rho: DensityMatrix, use_symmetry: bool = False
) -> InflationProgram:
    """Two-copy ring inflation of the tetrahedron network; only 4-party
    marginals are matched because larger marginals stay connected by the
    fourth party's sources."""
    dims = tuple(rho.dims.dims)
    if len(dims) != 4:
        raise ValueError("the tetrahedron program needs a four-party state")
    if max(dims) > MAX_TETRA_LOCAL:
        raise ValueError(
            f"local dimension {max(dims)} exceeds {MAX_TETRA_LOCAL};"
            " apply reduce_party_dimension first"
        )
    return _build_ring2(rho, "tetrahedron", "ABCD", use_symmetry)


def _lab(text):
    """'B3C3A1' -> ((B,3),(C,3),(A,1)); table shorthand."""
    return tuple((text[i], int(text[i + 1])) for i in range(0, len(text), 2))


_LEVEL3_MATCHES = (
    ("gamma", "B3C3A1B1C1B2C2", "tau", "B2C2A1B1C1B3C3"),
    ("tau", "B1C1B2C2A3B3C3", "sigma", "B1C1B2C2A3B3C3"),
    ("gamma", "A1B1C1A2B2A3B3", "tau", "A1B1C1A2B2A3B3"),
    ("tau", "A1B1A2B2A3B3C3", "sigma", "A1B1A2B2A3B3C3"),
    ("gamma", "C3A1B1C1A2C2A3", "tau", "C2A1B1C1A2C3A3"),
    ("tau", "C1A2C2A1A3B3C3", "sigma", "C1A1C2A2A3B3C3"),
)

_LEVEL3_PPT = (
    ("tau", None, "A3B3C3"),
    ("sigma", None, "A3B3C3"),
    ("gamma", "A1C1A2B2C2A3B3", "A1"),
    ("gamma", "B1A2B2C2A3B3C3", "B1"),
    ("gamma", "C1B2C2A3B3C3A1", "C1"),
    ("gamma", "A1B1C1B2C2A3B3", "A1B1C1"),
    ("gamma", "B1C1A2C2A3B3C3", "B1C1A2"),
    ("gamma", "C1A2B2A3B3C3A1", "C1A2B2"),
    ("tau", "A1C1A2B2A3B3C3", "A1"),
    ("tau", "B1A2B2C2A3B3C3", "B1"),
    ("tau", "C1B2C2A1A3B3C3", "C1"),
    ("tau", "A1C1A2B2A3B3C3", "C1A2B2"),
    ("tau", "B1A2B2C2A3B3C3", "A2B2C2"),
    ("tau", "C1B2C2A1A3B3C3", "B2C2A1"),
)


def build_level3_triangle(rho: DensityMatrix) -> InflationProgram:
    """Three-copy inflation of the triangle network: a 9-ring state, a
    ring-plus-triangle state, and a three-triangle state, tied together
    by cyclic copy symmetries, cross marginals, and independence."""
    dims = tuple(rho.dims.dims)
    if dims != (2, 2, 2):
        raise ValueError("the three-copy program is built for qubit parties")
    rb = _RingBuilder(rho, "ABC", copies=3)
    rb.add_state_full("gamma", [("(231)", (3, 4, 5, 6, 7, 8, 0, 1, 2))])
    rb.add_state_full("tau", [("(213)", (3, 4, 5, 0, 1, 2, 6, 7, 8))])
    rb.add_state_full(
        "sigma",
        [
            ("(213)", (3, 4, 5, 0, 1, 2, 6, 7, 8)),
            ("(132)", (0, 1, 2, 6, 7, 8, 3, 4, 5)),
        ],
    )
    rb.add_noise_scalar()
    rb.add_target_line("sigma")
    for ls, ll, rs, rl in _LEVEL3_MATCHES:
        rb.add_match(ls, _lab(ll), rs, _lab(rl))
    for state, labels, pt in _LEVEL3_PPT:
        rb.add_ppt(state, None if labels is None else _lab(labels), _lab(pt))
    return rb.finish("triangle", 3, False)


def symmetry_reduce(prog: InflationProgram) -> InflationProgram:
    """Rebuild a two-copy program with the sector parametrization."""
    if prog.level != 2:
        raise ValueError(
            "only the two-copy programs carry a single swap symmetry"
        )
    if prog.reduced:
        raise ValueError("program is already symmetry-reduced")
    if prog.scenario == "triangle":
        return build_level2_triangle(prog.rho, use_symmetry=True)
    return build_level2_tetrahedron(prog.rho, use_symmetry=True)


# ---------------------------------------------------------------------------
# dimension reduction channel


@dataclass(frozen=True)
class ReductionChannel:
    """Kraus set keeping a party's three dominant local eigenvectors and
    scattering the fourth uniformly; trace-preserving and sends the
    maximally mixed qudit to the maximally mixed qutrit."""

    party: int
    K: np.ndarray
    qs: tuple

    @property
    def kraus(self) -> tuple:
        return (self.K,) + self.qs

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        dims = tuple(rho.dims.dims)
        if dims[self.party] != 4:
            raise ValueError("party local dimension must be 4")
        before = int(np.prod(dims[: self.party], dtype=np.int64))
        after = int(np.prod(dims[self.party + 1:], dtype=np.int64))
        out = None
        for M in self.kraus:
            big = np.kron(np.kron(np.eye(before), M), np.eye(after))
            term = big @ np.asarray(rho.entries) @ big.conj().T
            out = term if out is None else out + term
        new_dims = dims[: self.party] + (3,) + dims[self.party + 1:]
        return DensityMatrix(out, new_dims)


def reduction_channel(rho: DensityMatrix, party: int) -> ReductionChannel:
    dims = tuple(rho.dims.dims)
    if not 0 <= party < len(dims):
        raise ValueError("party index out of range")
    if dims[party] != 4:
        raise ValueError("party local dimension must be 4")
    local = partial_trace(rho, (party,)).entries
    w, V = np.linalg.eigh(local)
    order = np.argsort(w)[::-1]
    basis = V[:, order]
    K = basis[:, :3].conj().T
    last = basis[:, 3].conj()
    qs = tuple(
        np.outer(np.eye(3)[i], last) / math.sqrt(3.0) for i in range(3)
    )
    total = K.conj().T @ K + sum(q.conj().T @ q for q in qs)
    if np.max(np.abs(total - np.eye(4))) > _KRAUS_TOL:
        raise AssertionError("Kraus set fails the trace-preservation check")
    return ReductionChannel(party=party, K=K, qs=qs)


def reduce_party_dimension(rho: DensityMatrix, party: int) -> DensityMatrix:
    """Map one dim-4 party to dim 3 via its local eigenbasis."""
    return reduction_channel(rho, party).apply(rho)


# ---------------------------------------------------------------------------
# solving and verification


@dataclass
class InflationResult:
    program: InflationProgram
    t_max: float
    status: str
    residuals: tuple
    iterations: int
    solve_time: float
    wall_time: float
    match_violation: float
    target_violation: float
    ppt_floor: float            # smallest eigenvalue over all PPT blocks
    check_details: dict
    x: np.ndarray


def verify_solution(prog: InflationProgram, x: np.ndarray, t: float) -> dict:
    """Recompute every named marginal/PPT condition from the solution."""
    cache = {}

    def value(check):
        out = np.zeros(check.dim * check.dim)
        for block, op in check.lhs:
            if block not in cache:
                cache[block] = hvec(prog.built.matrix(x, block))
            out = out + op @ cache[block]
        return hmat(out, check.dim)

    def rhs_value(check):
        out = np.zeros(check.dim * check.dim)
        for block, op in check.rhs:
            if block not in cache:
                cache[block] = hvec(prog.built.matrix(x, block))
            out = out + op @ cache[block]
        return hmat(out, check.dim)

    details = {}
    for check in prog.checks:
        M = value(check)
        if check.kind == "match":
            details[check.name] = float(np.max(np.abs(M - rhs_value(check))))
        elif check.kind == "target":
            d = check.dim
            want = t * np.asarray(prog.rho.entries) + (1 - t) * np.eye(d) / d
            details[check.name] = float(np.max(np.abs(M - want)))
        else:
            details[check.name] = float(np.linalg.eigvalsh(M)[0])
    return details


def solve_inflation(
    prog: InflationProgram, settings: SolverSettings | None = None
) -> InflationResult:
    if settings is None:
        settings = SolverSettings(
            eps_primal=1e-7, eps_dual=1e-7, eps_gap=1e-7
        )
    start = time.perf_counter()
    sol = solve(prog.program, settings)
    t = float(prog.built.raw(sol.x, "t")[0])
    details = verify_solution(prog, sol.x, t)
    match = [v for k, v in details.items() if k.startswith("match:")]
    target = [v for k, v in details.items() if k.startswith("target:")]
    ppt = [v for k, v in details.items() if k.startswith("ppt:")]
    return InflationResult(
        program=prog,
        t_max=t,
        status=sol.status,
        residuals=sol.residuals,
        iterations=sol.iterations,
        solve_time=sol.solve_time,
        wall_time=time.perf_counter() - start,
        match_violation=max(match, default=0.0),
        target_violation=max(target, default=0.0),
        ppt_floor=min(ppt, default=0.0),
        check_details=details,
        x=sol.x,
    )


def gnme_lower_bound(rho: DensityMatrix, result: InflationResult) -> float:
    """Certified white-noise bound: mixtures with p < 1 - t_max keep
    genuine network entanglement."""
    if result.status != "optimal":
        raise ValueError(
            f"program status is {result.status!r}; the bound needs an"
            " optimal solve"
        )
    prog = result.program
    if tuple(rho.dims.dims) != prog.party_dims or not np.allclose(
        rho.entries, prog.rho.entries, atol=1e-10
    ):
        raise ValueError("state does not match the solved program")
    return float(min(1.0, max(0.0, 1.0 - result.t_max)))


def certification_report(result: InflationResult) -> dict:
    """JSON-ready summary of a solved program and its verification."""
    prog = result.program
    optimal = result.status == "optimal"
    return {
        "scenario": prog.scenario,
        "level": prog.level,
        "party_dims": list(prog.party_dims),
        "symmetry_reduced": prog.reduced,
        "t_max": result.t_max,
        "p_c_lower": (
            float(min(1.0, max(0.0, 1.0 - result.t_max))) if optimal else None
        ),
        "status": result.status,
        "sdp_residuals": {
            "primal": result.residuals[0],
            "dual": result.residuals[1],
            "gap": result.residuals[2],
        },
        "iterations": result.iterations,
        "solve_time": result.solve_time,
        "wall_time": result.wall_time,
        "verification": {
            "max_marginal_mismatch": result.match_violation,
            "max_target_mismatch": result.target_violation,
            "min_ppt_eigenvalue": result.ppt_floor,
            "details": dict(result.check_details),
        },
    }
