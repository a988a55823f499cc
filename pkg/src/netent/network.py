"""Unitary quantum networks and the geometric distance to their convex hull.

A unitary quantum network (UQN) on k qubit-pair parties prepares a pure
state in two layers: resource vectors are placed on (k-1)-party hyperedges,
one subsystem slot per incident party, and each party then applies one
local unitary across all of its slots.  The convex hull of such states over
all resource vectors, local unitaries, and hyperedge diagrams is the
network set this module measures distances to.

Diagram families.  For three parties the family contains seven concrete
diagrams of three types: one bipartite resource with the third party free
("biseparable", three placements), two resources sharing a centre party
("single-link", three placements), and the full "triangle".  For four
parties the family is built from the four faces of the tetrahedron; the
five types keep 0..4 faces ("product", "one-face", "two-face",
"three-face", "tetrahedron"), sixteen concrete diagrams in all.  Parties
not covered by an edge, and slots freed when a diagram drops an edge, are
re-aggregated so the remaining resources act on the largest available
subsystems; uncovered slots carry a fixed |0> that the party unitary turns
into an arbitrary local vector.

Distance algorithm.  ``gilbert_distance`` runs a Gilbert scheme with
memory: starting from the maximally mixed state (the uniform mixture of
computational product states, all of which are realizable), it repeatedly
finds an extreme network state aligned with (rho - rho1) via
``inner_max`` (alternating ascent: exact eigenvector updates for resource
vectors, safeguarded polar-retraction gradient steps for unitaries, best
over restarts and all diagrams of the family), then refits the simplex
weights over the retained pure-state columns by an active-set
nonnegative least-squares with a sum-to-one constraint.  The distance
history is non-increasing and the iterate is always an explicit convex
combination of realized network states.

Certification.  ``certify_network`` turns an achieved distance delta into
the statement that (1-eps) rho + eps I/D is a network state with
eps = delta / (r + delta), r = 1/sqrt(D(D-1)) being the radius of the
separable ball around the maximally mixed state; the result flags inputs
that are not full rank, for which the criterion does not apply.

Restarts inside ``inner_max`` draw from independent spawned RNG streams,
so they can be evaluated in any order or concurrently; the outer Gilbert
loop is sequential and owns its state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .qcore import DensityMatrix, LocalDims, PureState, permute_factors

__all__ = [
    "NetworkTopology",
    "PureNetworkParams",
    "GilbertSettings",
    "GilbertState",
    "GilbertOutcome",
    "InnerMaxResult",
    "CertificationResult",
    "ThresholdFit",
    "SweepPoint",
    "triangle_topology",
    "tetrahedron_topology",
    "family_variants",
    "random_params",
    "realize",
    "inner_max",
    "gilbert_distance",
    "extend_with_ancilla",
    "certify_network",
    "threshold_extrapolate",
    "noise_sweep",
    "write_sweep_csv",
    "save_checkpoint",
    "load_checkpoint",
]

UNITARY_TOL = 1e-10
VECTOR_TOL = 1e-10
FULL_RANK_TOL = 1e-8
_DISTANCE_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# topology


@dataclass(frozen=True)
class NetworkTopology:
    """One concrete network diagram.

    ``party_slots`` lists every party's subsystem slot dimensions (their
    product is the party's Hilbert dimension).  ``edges`` lists the
    resource hyperedges; each edge names k-1 distinct parties together
    with the slot it occupies on each, as ((party, slot), ...) sorted by
    party.  ``variant`` is the diagram type tag.
    """

    party_slots: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[tuple[int, int], ...], ...]
    variant: str

    def __post_init__(self):
        slots = tuple(tuple(int(d) for d in p) for p in self.party_slots)
        object.__setattr__(self, "party_slots", slots)
        edges = tuple(tuple((int(p), int(s)) for p, s in e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        k = len(slots)
        if k not in (3, 4):
            raise ValueError("party count must be 3 or 4")
        for p in slots:
            if not p or any(d < 1 for d in p):
                raise ValueError("slot dimensions must be positive")
        seen: set[tuple[int, int]] = set()
        for e in edges:
            parties = [p for p, _ in e]
            if len(e) != k - 1 or len(set(parties)) != k - 1:
                raise ValueError("each hyperedge must touch k-1 distinct parties")
            for p, s in e:
                if not 0 <= p < k or not 0 <= s < len(slots[p]):
                    raise ValueError("edge refers to a missing party slot")
                if (p, s) in seen:
                    raise ValueError("party slot assigned to two hyperedges")
                seen.add((p, s))
        pd = tuple(math.prod(p) for p in slots)
        object.__setattr__(self, "_party_dims", pd)
        object.__setattr__(self, "_D", math.prod(pd))
        object.__setattr__(
            self,
            "_edge_dims",
            tuple(math.prod(slots[p][s] for p, s in e) for e in edges),
        )
        object.__setattr__(
            self,
            "_uncovered",
            tuple(
                (p, s)
                for p in range(k)
                for s in range(len(slots[p]))
                if (p, s) not in seen
            ),
        )

    @property
    def k(self) -> int:
        return len(self.party_slots)

    @property
    def party_dims(self) -> tuple[int, ...]:
        return self._party_dims

    @property
    def D(self) -> int:
        return self._D

    def edge_dims(self) -> tuple[int, ...]:
        return self._edge_dims

    def uncovered(self) -> tuple[tuple[int, int], ...]:
        return self._uncovered


def _split2(d: int) -> tuple[int, int]:
    """Balanced two-way factor split of d, larger factor first."""
    a = 1
    for c in range(1, int(math.isqrt(d)) + 1):
        if d % c == 0:
            a = c
    return (d // a, a)


def triangle_topology(party_dims: tuple[int, int, int] = (4, 4, 4)) -> NetworkTopology:
    """Three-party triangle; by default each party holds a qubit pair.

    Slot routing follows the edge order AB, BC, CA, each edge taking the
    endpoint's lowest unassigned slot, so Bell resources with identity
    unitaries reproduce the canonical three-Bell-pair triangle state.
    """
    splits = tuple(_split2(d) for d in party_dims)
    return NetworkTopology(
        party_slots=splits,
        edges=(((0, 0), (1, 0)), ((1, 1), (2, 0)), ((2, 1), (0, 1))),
        variant="triangle",
    )


def _three_party_family(party_dims: tuple[int, ...]) -> list[NetworkTopology]:
    out = [triangle_topology(party_dims)]  # type: ignore[arg-type]
    for centre in range(3):
        leaves = [p for p in range(3) if p != centre]
        slots = [(d,) for d in party_dims]
        slots[centre] = _split2(party_dims[centre])
        pairs = sorted((min(centre, q), max(centre, q)) for q in leaves)
        edges = []
        next_slot = 0
        for a, b in pairs:
            ea = (a, next_slot if a == centre else 0)
            eb = (b, next_slot if b == centre else 0)
            if centre in (a, b):
                next_slot += 1
            edges.append((ea, eb))
        out.append(
            NetworkTopology(tuple(tuple(s) for s in slots), tuple(edges), "single-link")
        )
    for a, b in ((0, 1), (0, 2), (1, 2)):
        slots = tuple((d,) for d in party_dims)
        out.append(NetworkTopology(slots, (((a, 0), (b, 0)),), "biseparable"))
    return out


_FACES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
# Perfect matching used to place the trivial slot when a party is covered
# by all three of its faces: party p contributes the 1-dim slot to face p.
_FOUR_TAGS = {0: "product", 1: "one-face", 2: "two-face", 3: "three-face", 4: "tetrahedron"}


def _four_party_variant(faces: tuple[int, ...]) -> NetworkTopology:
    slots: list[list[int]] = [[] for _ in range(4)]
    slot_of: dict[tuple[int, int], int] = {}
    for p in range(4):
        covering = [f for f in faces if p in _FACES[f]]
        if not covering:
            slots[p] = [4]
            continue
        if len(covering) == 1:
            dims = [4]
        elif len(covering) == 2:
            dims = [2, 2]
        else:
            dims = [1 if f == p else 2 for f in covering]
        slots[p] = dims
        for i, f in enumerate(covering):
            slot_of[(p, f)] = i
    edges = tuple(
        tuple((p, slot_of[(p, f)]) for p in _FACES[f]) for f in faces
    )
    return NetworkTopology(
        tuple(tuple(s) for s in slots), edges, _FOUR_TAGS[len(faces)]
    )


def tetrahedron_topology() -> NetworkTopology:
    """Four qubit-pair parties with a resource on every tetrahedron face."""
    return _four_party_variant((0, 1, 2, 3))


def _four_party_family(party_dims: tuple[int, ...]) -> list[NetworkTopology]:
    if party_dims != (4, 4, 4, 4):
        raise ValueError("the four-party family is built for qubit-pair parties")
    from itertools import combinations

    out = []
    for m in (4, 3, 2, 1, 0):
        for faces in combinations(range(4), m):
            out.append(_four_party_variant(faces))
    return out


def family_variants(topo: NetworkTopology) -> tuple[NetworkTopology, ...]:
    """All concrete diagrams sharing topo's party dimensions.

    Seven diagrams for three parties, sixteen for four.  The hull of the
    network set is taken over this whole family; ``inner_max`` searches
    every member.
    """
    dims = topo.party_dims
    fam = _three_party_family(dims) if topo.k == 3 else _four_party_family(dims)
    if topo not in fam:
        fam.insert(0, topo)
    return tuple(fam)


# ---------------------------------------------------------------------------
# parameters and realization


@dataclass(frozen=True)
class PureNetworkParams:
    """Resource vectors (one unit vector per hyperedge) and local unitaries."""

    vectors: tuple[np.ndarray, ...]
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = []
        for v in self.vectors:
            v = np.asarray(v, dtype=complex).reshape(-1)
            if abs(np.linalg.norm(v) - 1.0) > VECTOR_TOL:
                raise ValueError("resource vectors must be unit norm")
            v.setflags(write=False)
            vecs.append(v)
        object.__setattr__(self, "vectors", tuple(vecs))
        mats = []
        for u in self.unitaries:
            u = np.asarray(u, dtype=complex)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise ValueError("unitaries must be square matrices")
            defect = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
            if defect > UNITARY_TOL:
                raise ValueError(f"matrix not unitary: defect {defect:.2e}")
            u.setflags(write=False)
            mats.append(u)
        object.__setattr__(self, "unitaries", tuple(mats))


def _haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_params(topo: NetworkTopology, rng: np.random.Generator) -> PureNetworkParams:
    return PureNetworkParams(
        vectors=tuple(_random_vector(d, rng) for d in topo.edge_dims()),
        unitaries=tuple(_haar_unitary(d, rng) for d in topo.party_dims),
    )


def _slot_layout(topo: NetworkTopology):
    """Global slot ids in party-major order plus per-edge/uncovered data."""
    gid = {}
    dims = []
    for p, slots in enumerate(topo.party_slots):
        for s, d in enumerate(slots):
            gid[(p, s)] = len(dims)
            dims.append(d)
    edge_ids = [tuple(gid[(p, s)] for p, s in e) for e in topo.edges]
    fillers = []
    for p, s in topo.uncovered():
        f = np.zeros(topo.party_slots[p][s], dtype=complex)
        f[0] = 1.0
        f.setflags(write=False)
        fillers.append((gid[(p, s)], f))
    return tuple(dims), edge_ids, fillers


def _apply_axis(u: np.ndarray, t: np.ndarray, axis: int) -> np.ndarray:
    """Matrix u acting on one tensor axis, axis order preserved."""
    return np.moveaxis(np.tensordot(u, t, axes=([1], [axis])), 0, axis)


def _resource_tensor(topo, vectors, layout) -> np.ndarray:
    """Routed resources and |0> fillers, shaped to the party dimensions."""
    dims, edge_ids, fillers = layout
    arr = np.ones((), dtype=complex)
    order: list[int] = []
    for e, ids in enumerate(edge_ids):
        shape = tuple(dims[i] for i in ids)
        arr = np.multiply.outer(arr, np.asarray(vectors[e]).reshape(shape))
        order.extend(ids)
    for i, f in fillers:
        arr = np.multiply.outer(arr, f)
        order.append(i)
    pos = {g: a for a, g in enumerate(order)}
    arr = arr.transpose([pos[g] for g in range(len(dims))])
    return arr.reshape(topo.party_dims)


def _assemble(
    topo: NetworkTopology,
    vectors,
    unitaries,
    layout=None,
) -> np.ndarray:
    """Raw amplitudes of (tensor of unitaries)(resources and |0> fillers)."""
    if layout is None:
        layout = _slot_layout(topo)
    arr = _resource_tensor(topo, vectors, layout)
    for p, u in enumerate(unitaries):
        arr = _apply_axis(u, arr, p)
    return arr.reshape(-1)


def realize(params: PureNetworkParams, topo: NetworkTopology) -> PureState:
    """Realized network state: local unitaries acting on routed resources."""
    ed = topo.edge_dims()
    if len(params.vectors) != len(ed):
        raise ValueError("one resource vector per hyperedge is required")
    for v, d in zip(params.vectors, ed):
        if v.shape[0] != d:
            raise ValueError("resource vector length does not match its slots")
    pd = topo.party_dims
    if len(params.unitaries) != topo.k:
        raise ValueError("one unitary per party is required")
    for u, d in zip(params.unitaries, pd):
        if u.shape != (d, d):
            raise ValueError("unitary shape does not match its party dimension")
    return PureState(_assemble(topo, params.vectors, params.unitaries), LocalDims(pd))


# ---------------------------------------------------------------------------
# inner maximization


@dataclass(frozen=True)
class InnerMaxResult:
    state: PureState
    value: float
    params: PureNetworkParams
    variant_index: int


def _as_matrix(X) -> np.ndarray:
    m = X.entries if isinstance(X, DensityMatrix) else np.asarray(X, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("X must be a square matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-8:
        raise ValueError("X must be Hermitian")
    return 0.5 * (m + m.conj().T)


def _conjugated_slot_tensor(Xm, unitaries, slot_dims):
    """(tensor U)^dag X (tensor U) reshaped onto bra+ket slot axes."""
    U = unitaries[0]
    for u in unitaries[1:]:
        U = np.kron(U, u)
    return (U.conj().T @ Xm @ U).reshape(slot_dims + slot_dims)


def _edge_environment(Z, edge_ids, fillers, vectors, skip, nslots):
    """Contract everything except edge `skip`; matrix on its bra/ket slots."""
    t = Z
    # Axis bookkeeping: keep a live list of which original axes remain.
    live = list(range(2 * nslots))

    def contract(vec, ids):
        nonlocal t, live
        axes = [live.index(i) for i in ids]
        t = np.tensordot(
            t,
            vec.reshape([t.shape[a] for a in axes]),
            axes=(axes, list(range(len(axes)))),
        )
        for a in sorted(axes, reverse=True):
            live.pop(a)

    for e, ids in enumerate(edge_ids):
        if e == skip:
            continue
        vec = np.asarray(vectors[e])
        contract(vec.conj(), list(ids))
        contract(vec, [i + nslots for i in ids])
    for i, f in fillers:
        contract(f, [i])
        contract(f, [i + nslots])
    # Remaining axes: skip-edge bra slots and ket slots, in original order.
    ids = list(edge_ids[skip])
    want = ids + [i + nslots for i in ids]
    perm = [live.index(i) for i in want]
    t = t.transpose(perm)
    d = int(np.prod([t.shape[a] for a in range(len(ids))]))
    return t.reshape(d, d)


def _polar(m: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def _ascend(Xs, topo, params, steps, layout):
    """Alternating ascent of <psi|Xs|psi> from the given starting params.

    Resource vectors take exact leading-eigenvector updates; unitaries take
    a polar-retraction step toward the contraction gradient (monotone for
    the shifted positive-semidefinite Xs), with step-halving backtracking
    as a safeguard.  Returns (value, vectors, unitaries).
    """
    dims, edge_ids, fillers = layout
    nslots = len(dims)
    pd = topo.party_dims
    k = topo.k
    vectors = [np.array(v) for v in params.vectors]
    unitaries = [np.array(u) for u in params.unitaries]

    def val_of(t) -> float:
        flat = t.reshape(-1)
        return float(np.vdot(flat, Xs @ flat).real)

    prev = -np.inf
    for _ in range(steps):
        if edge_ids:
            Z = _conjugated_slot_tensor(Xs, unitaries, dims)
            for e in range(len(edge_ids)):
                M = _edge_environment(Z, edge_ids, fillers, vectors, e, nslots)
                M = 0.5 * (M + M.conj().T)
                _, v = np.linalg.eigh(M)
                vectors[e] = v[:, -1]
        psi_t = _resource_tensor(topo, vectors, layout)
        for p, u in enumerate(unitaries):
            psi_t = _apply_axis(u, psi_t, p)
        for p in range(k):
            # chi is psi with party p's unitary stripped, so the gradient
            # and the retracted state each need a single axis application.
            chi = _apply_axis(unitaries[p].conj().T, psi_t, p)
            A = (Xs @ psi_t.reshape(-1)).reshape(pd)
            rest = [a for a in range(k) if a != p]
            G = np.tensordot(A, chi.conj(), axes=(rest, rest))
            old_val = float(np.vdot(psi_t.reshape(-1), A.reshape(-1)).real)
            cand = _polar(G)
            new_psi = _apply_axis(cand, chi, p)
            new_val = val_of(new_psi)
            if new_val < old_val - 1e-12 * max(1.0, abs(old_val)):
                eta = 1.0
                accepted = False
                for _ in range(6):
                    cand = _polar(unitaries[p] + eta * G)
                    new_psi = _apply_axis(cand, chi, p)
                    new_val = val_of(new_psi)
                    if new_val >= old_val:
                        accepted = True
                        break
                    eta *= 0.5
                if not accepted:
                    cand, new_psi, new_val = unitaries[p], psi_t, old_val
            unitaries[p] = cand
            psi_t = new_psi
        cur = val_of(psi_t)
        if cur - prev < 1e-11 * max(1.0, abs(cur)):
            prev = cur
            break
        prev = cur
    return prev, vectors, unitaries


def inner_max(
    X,
    topo: NetworkTopology,
    restarts: int | None = None,
    rng: np.random.Generator | int | None = None,
    *,
    warm: dict[int, PureNetworkParams] | None = None,
    ascent_steps: int = 50,
    variants: tuple[NetworkTopology, ...] | None = None,
) -> InnerMaxResult:
    """Best extreme network state for the Hermitian form X.

    Searches every diagram of topo's family: `restarts` fresh random
    ascents are spread round-robin over the diagrams (defaults: 8 for
    three parties, 16 for four), and any diagram with an entry in `warm`
    additionally continues from those parameters.  Restart streams are
    spawned independently from `rng`, which must be supplied.
    """
    Xm = _as_matrix(X)
    if rng is None:
        raise ValueError("a seeded Generator (or integer seed) is required")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    fam = variants if variants is not None else family_variants(topo)
    if Xm.shape[0] != topo.D:
        raise ValueError("X dimension does not match the topology")
    if restarts is None:
        restarts = 8 if topo.k == 3 else 16
    evals = np.linalg.eigvalsh(Xm)
    shift = -float(evals[0]) if evals[0] < 0 else 0.0
    Xs = Xm + shift * np.eye(Xm.shape[0])

    layouts = [_slot_layout(v) for v in fam]
    runs: list[tuple[int, PureNetworkParams | None]] = []
    if warm:
        for vi in sorted(warm):
            if 0 <= vi < len(fam):
                runs.append((vi, warm[vi]))
    offset = int(rng.integers(len(fam)))
    for j in range(restarts):
        runs.append(((offset + j) % len(fam), None))
    streams = rng.spawn(len(runs))

    # Fresh restarts are screened with a shorter sweep budget; the overall
    # winner is then polished with the full budget (ascent is monotone, so
    # polishing can only help the screened choice).
    screen = max(8, ascent_steps // 4)
    best = (-np.inf, None, None, -1, False)
    for (vi, start), stream in zip(runs, streams):
        var = fam[vi]
        fresh = start is None
        p0 = random_params(var, stream) if fresh else start
        depth = screen if fresh else ascent_steps
        val, vecs, us = _ascend(Xs, var, p0, depth, layouts[vi])
        if val > best[0]:
            best = (val, vecs, us, vi, fresh)
    val, vecs, us, vi, fresh = best
    if fresh:
        val, vecs, us = _ascend(
            Xs, fam[vi],
            PureNetworkParams(tuple(vecs), tuple(us)),
            ascent_steps, layouts[vi],
        )
    params = PureNetworkParams(tuple(vecs), tuple(us))
    state = realize(params, fam[vi])
    return InnerMaxResult(state, val - shift, params, vi)


# ---------------------------------------------------------------------------
# simplex-constrained least squares (the memory refit)


def _simplex_lsq(G: np.ndarray, c: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Minimize 1/2 x'Gx - c'x subject to x >= 0, sum x = 1.

    Primal active-set method warm-started from the feasible x0; G is the
    (tiny) Gram matrix of the memory columns, so solves are exact.
    """
    n = G.shape[0]
    x = np.array(x0, dtype=float)
    x[x < 0] = 0.0
    s = x.sum()
    x = x / s if s > 0 else np.full(n, 1.0 / n)
    free = x > 0
    if not free.any():
        free[int(np.argmax(c))] = True
    scale = max(1.0, float(np.max(np.abs(G))))

    def kkt(mask):
        idx = np.flatnonzero(mask)
        m = idx.size
        K = np.zeros((m + 1, m + 1))
        K[:m, :m] = G[np.ix_(idx, idx)]
        K[:m, m] = 1.0
        K[m, :m] = 1.0
        rhs = np.zeros(m + 1)
        rhs[:m] = c[idx]
        rhs[m] = 1.0
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            K[:m, :m] += 1e-13 * scale * np.eye(m)
            sol = np.linalg.solve(K, rhs)
        return idx, sol[:m], sol[m]

    for _ in range(50 * (n + 1)):
        idx, xf, nu = kkt(free)
        if xf.min() >= -1e-14:
            xn = np.zeros(n)
            xn[idx] = np.clip(xf, 0.0, None)
            x = xn / xn.sum()
            g = G @ x - c + nu
            g[free] = 0.0
            j = int(np.argmin(g))
            if g[j] >= -1e-10 * scale:
                return x
            free[j] = True
        else:
            xn = np.zeros(n)
            xn[idx] = xf
            d = xn - x
            bad = d < -1e-300
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(bad, -x / d, np.inf)
            alpha = min(1.0, float(np.min(ratios)))
            x = np.clip(x + alpha * d, 0.0, None)
            drop = np.flatnonzero(free & (x <= 1e-14))
            if drop.size:
                free[drop[np.argmin(xn[drop])]] = False
            x = x / x.sum()
    return x


# ---------------------------------------------------------------------------
# Gilbert state and loop


@dataclass
class GilbertSettings:
    """Knobs of the Gilbert loop; `seed` is mandatory.

    `ascent_steps` bounds the alternating sweeps per restart; each sweep
    applies one eigenvector update per resource and one polar-retraction
    step per unitary.  `restarts=None` picks 8 (three parties) or 16
    (four).  The loop stops when the relative distance improvement across
    the trailing `window` iterations falls below `tol_rel`, at
    `max_iters`, or when the preselection cap `preselect_cap` is exhausted
    without finding a positively aligned extreme state.
    """

    seed: int
    memory: int = 64
    restarts: int | None = None
    preselect_cap: int = 200
    tol_rel: float = 1e-6
    window: int = 200
    max_iters: int = 20000
    ascent_steps: int = 50


@dataclass
class GilbertState:
    """Iterate of the Gilbert loop as an explicit convex combination.

    base holds mixed weight accumulated beyond the memory horizon (it
    starts at the maximally mixed state, the uniform mixture of the
    computational product states, and absorbs folded columns, so it stays
    a hull member); columns are the retained pure network states.  The
    iterate is base_weight * base + sum_i weights[i] |col_i><col_i|.
    """

    topology: NetworkTopology
    base: np.ndarray
    base_weight: float
    columns: list[np.ndarray]
    weights: np.ndarray
    history: list[float]
    iterations: int = 0
    converged: bool = False
    boundary: bool = False

    def iterate_matrix(self) -> np.ndarray:
        m = self.base_weight * self.base
        if self.columns:
            V = np.column_stack(self.columns)
            m = m + (V * self.weights) @ V.conj().T
        return 0.5 * (m + m.conj().T)

    def iterate(self, dims=None) -> DensityMatrix:
        d = LocalDims(dims) if dims is not None else LocalDims(self.topology.party_dims)
        return DensityMatrix(self.iterate_matrix(), d)


class GilbertOutcome:
    """Distance value, the closest hull state found, and the loop state."""

    __slots__ = ("value", "closest", "state")

    def __init__(self, value: float, closest: DensityMatrix, state: GilbertState):
        self.value = value
        self.closest = closest
        self.state = state

    def __iter__(self):
        return iter((self.value, self.closest, self.state))


def _fresh_state(topo: NetworkTopology) -> GilbertState:
    D = topo.D
    return GilbertState(
        topology=topo,
        base=np.eye(D, dtype=complex) / D,
        base_weight=1.0,
        columns=[],
        weights=np.zeros(0),
        history=[],
    )


def gilbert_distance(
    rho: DensityMatrix,
    topo: NetworkTopology,
    settings: GilbertSettings,
    *,
    resume=None,
    on_iteration=None,
) -> GilbertOutcome:
    """Upper bound on the Hilbert-Schmidt distance from rho to the hull.

    Each iteration maximizes <psi|rho - rho1|psi> over the extreme network
    states (repeating with fresh randomness, up to the preselection cap,
    until the candidate is positively aligned with the descent direction),
    appends the winner to the memory, and refits the simplex weights over
    all retained columns.  Resume from a checkpoint via `resume`.
    """
    if rho.D != topo.D:
        raise ValueError("state dimension does not match the topology")
    rho_m = rho.entries
    rng_state = None
    if resume is not None and not isinstance(resume, GilbertState):
        resume, rng_state = resume.state, resume.rng_state
    st = resume if resume is not None else _fresh_state(topo)
    rng = np.random.default_rng(settings.seed)
    if rng_state is not None:
        rng.bit_generator.state = rng_state

    tr_rho2 = float(np.vdot(rho_m, rho_m).real)
    n = len(st.columns)
    # Gram bookkeeping: index 0 is the base column, then the pure columns.
    overlaps = np.eye(n, dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            overlaps[i, j] = np.vdot(st.columns[i], st.columns[j])
            overlaps[j, i] = overlaps[i, j].conjugate()
    base_quad = np.array([
        float(np.vdot(col, st.base @ col).real) for col in st.columns
    ])
    base_sq = float(np.vdot(st.base, st.base).real)
    rho_quad = np.array([
        float(np.vdot(col, rho_m @ col).real) for col in st.columns
    ])
    base_rho = float(np.vdot(st.base, rho_m).real)

    def current_weights():
        return np.concatenate(([st.base_weight], st.weights))

    def gram():
        m = len(st.columns)
        G = np.empty((m + 1, m + 1))
        G[0, 0] = base_sq
        G[0, 1:] = G[1:, 0] = base_quad
        G[1:, 1:] = np.abs(overlaps) ** 2
        c = np.concatenate(([base_rho], rho_quad))
        return G, c

    def distance_from(w, G, c):
        d2 = tr_rho2 - 2.0 * float(c @ w) + float(w @ G @ w)
        return math.sqrt(max(d2, 0.0))

    warm: dict[int, PureNetworkParams] = {}
    G, c = gram()
    w = current_weights()
    dist = distance_from(w, G, c)
    if not st.history:
        st.history.append(dist)

    while st.iterations < settings.max_iters:
        if dist < _DISTANCE_FLOOR:
            st.converged = True
            break
        win = settings.window
        if len(st.history) > win:
            old = st.history[-win - 1]
            if old - st.history[-1] < settings.tol_rel * max(old, 1e-30):
                st.converged = True
                break

        rho1 = st.iterate_matrix()
        X = rho_m - rho1
        align_floor = 1e-12 * max(1.0, float(np.linalg.norm(X)))
        trX_rho1 = float(np.vdot(X, rho1).real)
        chosen = None
        for attempt in range(settings.preselect_cap):
            res = inner_max(
                X,
                topo,
                settings.restarts,
                rng,
                warm=warm if attempt == 0 else None,
                ascent_steps=settings.ascent_steps,
            )
            if res.value - trX_rho1 > align_floor:
                chosen = res
                break
        if chosen is None:
            st.boundary = True
            st.converged = True
            break
        warm[chosen.variant_index] = chosen.params

        col = chosen.state.amplitudes
        m = len(st.columns)
        if m:
            new_over = np.array([np.vdot(ci, col) for ci in st.columns])
            overlaps = np.pad(overlaps, ((0, 1), (0, 1)))
            overlaps[:m, m] = new_over
            overlaps[m, :m] = new_over.conj()
            overlaps[m, m] = 1.0
        else:
            overlaps = np.eye(1, dtype=complex)
        base_quad = np.append(base_quad, float(np.vdot(col, st.base @ col).real))
        rho_quad = np.append(rho_quad, float(np.vdot(col, rho_m @ col).real))
        st.columns.append(col)
        st.weights = np.append(st.weights, 0.0)

        G, c = gram()
        w = _simplex_lsq(G, c, current_weights())
        st.base_weight = float(w[0])
        st.weights = w[1:]

        # Trim: drop zero-weight columns; if the memory is still over
        # budget, fold the lightest column into the base (a convex
        # sub-mixture, so the represented set only shrinks and the
        # distance stays non-increasing).
        keep = np.flatnonzero(st.weights > 0.0)
        if keep.size > settings.memory - 1:
            lightest = keep[np.argmin(st.weights[keep])]
            wl = st.weights[lightest]
            tot = st.base_weight + wl
            colv = st.columns[lightest]
            if tot > 0:
                newb = (st.base_weight * st.base
                        + wl * np.outer(colv, colv.conj())) / tot
                base_sq = float(np.vdot(newb, newb).real)
                base_rho = float(np.vdot(newb, rho_m).real)
                base_quad_new = []
                for i, ci in enumerate(st.columns):
                    bq = (st.base_weight * base_quad[i]
                          + wl * abs(np.vdot(colv, ci)) ** 2) / tot
                    base_quad_new.append(bq)
                base_quad = np.array(base_quad_new)
                st.base = newb
                st.base_weight = tot
            keep = keep[keep != lightest]
        if keep.size < len(st.columns):
            st.columns = [st.columns[i] for i in keep]
            st.weights = st.weights[keep]
            overlaps = overlaps[np.ix_(keep, keep)]
            base_quad = base_quad[keep]
            rho_quad = rho_quad[keep]

        G, c = gram()
        w = current_weights()
        dist = min(dist, distance_from(w, G, c))
        st.history.append(dist)
        st.iterations += 1
        if on_iteration is not None:
            on_iteration(st)
    else:
        st.converged = False

    closest = DensityMatrix(st.iterate_matrix(), rho.dims)
    final = float(np.linalg.norm(rho_m - closest.entries, "fro"))
    return GilbertOutcome(final, closest, st)


# ---------------------------------------------------------------------------
# ancilla extension


def extend_with_ancilla(rho: DensityMatrix) -> DensityMatrix:
    """Attach one maximally mixed ancilla qubit to each of three parties.

    The input must be three single-qubit parties; the output interleaves
    qubits as (q0, a0, q1, a1, q2, a2) so consecutive pairs form the
    parties of the six-qubit triangle family.
    """
    if rho.dims.dims != (2, 2, 2):
        raise ValueError("expected a state of three single-qubit parties")
    ext = DensityMatrix(np.kron(rho.entries, np.eye(8) / 8.0), LocalDims((2,) * 6))
    return permute_factors(ext, (0, 3, 1, 4, 2, 5))


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class CertificationResult:
    """Noise level at which the state provably enters the network set.

    If delta bounds the distance from rho to the hull, then mixing
    epsilon = delta/(r + delta) of white noise lands inside it, because
    the ball of radius r = 1/sqrt(D(D-1)) around the maximally mixed state
    is entirely separable.  When rho is not full rank the criterion says
    nothing about rho itself (flagged by full_rank_caveat): the certified
    state rho_eps is then full rank and merely close to rho.
    """

    delta: float
    r: float
    epsilon: float
    certified_state: DensityMatrix
    full_rank_caveat: bool


def certify_network(rho: DensityMatrix, delta: float) -> CertificationResult:
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    D = rho.D
    r = 1.0 / math.sqrt(D * (D - 1))
    eps = delta / (r + delta)
    eye = np.eye(D) / D
    form_a = (1.0 - eps) * rho.entries + eps * eye
    form_b = (r * rho.entries + delta * eye) / (r + delta)
    gap = float(np.max(np.abs(form_a - form_b)))
    if gap > 1e-12:
        raise AssertionError(f"convex forms disagree by {gap:.2e}")
    caveat = bool(np.linalg.eigvalsh(rho.entries)[0] < FULL_RANK_TOL)
    return CertificationResult(
        delta=float(delta),
        r=r,
        epsilon=float(eps),
        certified_state=DensityMatrix(form_a, rho.dims),
        full_rank_caveat=caveat,
    )


# ---------------------------------------------------------------------------
# threshold extrapolation


@dataclass(frozen=True)
class ThresholdFit:
    """Root of a least-squares line through (p, D) samples."""

    p_c: float
    slope: float
    intercept: float
    rms_residual: float
    n_points: int
    p_window: tuple[float, float]


def threshold_extrapolate(samples, window=None) -> ThresholdFit:
    """Linear extrapolation of the distance-vs-noise curve to D = 0.

    `samples` holds (p, D) pairs; `window` optionally restricts the fit to
    a [p_lo, p_hi] range.  Requires at least four points in the window and
    a decreasing trend (small non-monotonic jitter up to 2e-3 from the
    stochastic optimizer is tolerated, but the fitted slope must be
    negative).
    """
    pts = sorted((float(p), float(d)) for p, d in samples)
    if window is not None:
        lo, hi = float(window[0]), float(window[1])
        pts = [(p, d) for p, d in pts if lo <= p <= hi]
    if len(pts) < 4:
        raise ValueError("need at least four samples in the fitted window")
    p = np.array([q for q, _ in pts])
    d = np.array([v for _, v in pts])
    if np.any(np.diff(d) > 2e-3):
        raise ValueError("distance samples are non-decreasing in the window")
    slope, intercept = np.polyfit(p, d, 1)
    if slope >= 0:
        raise ValueError("fitted slope is nonnegative; no threshold to the right")
    fit = slope * p + intercept
    rms = float(np.sqrt(np.mean((fit - d) ** 2)))
    return ThresholdFit(
        p_c=float(-intercept / slope),
        slope=float(slope),
        intercept=float(intercept),
        rms_residual=rms,
        n_points=len(pts),
        p_window=(float(p[0]), float(p[-1])),
    )


# ---------------------------------------------------------------------------
# noise sweeps


@dataclass(frozen=True)
class SweepPoint:
    p: float
    D: float
    iterations: int
    seed: int


def _noise_line(state, p: float) -> DensityMatrix:
    if isinstance(state, PureState):
        state = state.density()
    m = (1.0 - p) * state.entries + p * np.eye(state.D) / state.D
    return DensityMatrix(m, state.dims)


def sweep_seed(base_seed: int, index: int) -> int:
    """Per-point seed: base_seed * 100003 + index (recorded in the CSV)."""
    return int(base_seed) * 100003 + int(index)


def noise_sweep(
    state,
    topo: NetworkTopology,
    p_values,
    settings: GilbertSettings,
    *,
    on_point=None,
) -> list[SweepPoint]:
    """Gilbert distance along the white-noise line (1-p) rho + p I/D.

    Every grid point runs independently with its own derived seed, so
    points are reproducible in isolation and the sweep can be resumed or
    parallelized point by point.
    """
    rows = []
    for i, p in enumerate(p_values):
        seed_i = sweep_seed(settings.seed, i)
        pt = replace(settings, seed=seed_i)
        out = gilbert_distance(_noise_line(state, float(p)), topo, pt)
        rows.append(SweepPoint(float(p), out.value, out.state.iterations, seed_i))
        if on_point is not None:
            on_point(rows[-1])
    return rows


def write_sweep_csv(rows, path) -> None:
    """CSV with columns p, D, iterations, seed (17 significant digits)."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "D", "iterations", "seed"])
        for r in rows:
            w.writerow([f"{r.p:.17g}", f"{r.D:.17g}", r.iterations, r.seed])


# ---------------------------------------------------------------------------
# checkpointing


_CKPT_FORMAT = "gilbert-checkpoint/1"


class Checkpoint:
    __slots__ = ("state", "rng_state")

    def __init__(self, state: GilbertState, rng_state=None):
        self.state = state
        self.rng_state = rng_state


def _complex_to_json(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _complex_from_json(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def save_checkpoint(state: GilbertState, path, rng: np.random.Generator | None = None) -> None:
    """Binary-free JSON snapshot of a Gilbert run (optionally with RNG state)."""
    topo = state.topology
    doc = {
        "format": _CKPT_FORMAT,
        "topology": {
            "party_slots": [list(s) for s in topo.party_slots],
            "edges": [[list(t) for t in e] for e in topo.edges],
            "variant": topo.variant,
        },
        "base": _complex_to_json(state.base),
        "base_weight": state.base_weight,
        "columns": [_complex_to_json(c) for c in state.columns],
        "weights": list(map(float, state.weights)),
        "history": list(map(float, state.history)),
        "iterations": state.iterations,
        "converged": state.converged,
        "boundary": state.boundary,
    }
    if rng is not None:
        doc["rng"] = json.loads(json.dumps(rng.bit_generator.state, default=int))
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path) -> Checkpoint:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _CKPT_FORMAT:
        raise ValueError("not a Gilbert checkpoint file")
    t = doc["topology"]
    topo = NetworkTopology(
        tuple(tuple(s) for s in t["party_slots"]),
        tuple(tuple(tuple(x) for x in e) for e in t["edges"]),
        t["variant"],
    )
    state = GilbertState(
        topology=topo,
        base=_complex_from_json(doc["base"]),
        base_weight=float(doc["base_weight"]),
        columns=[_complex_from_json(c) for c in doc["columns"]],
        weights=np.array(doc["weights"], dtype=float),
        history=[float(x) for x in doc["history"]],
        iterations=int(doc["iterations"]),
        converged=bool(doc["converged"]),
        boundary=bool(doc["boundary"]),
    )
    return Checkpoint(state, doc.get("rng"))
