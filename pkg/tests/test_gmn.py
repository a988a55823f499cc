"""Witness-SDP genuine multiparty negativity: values, invariants, thresholds."""

import numpy as np
import pytest

from conftest import random_density, random_pure

from netent import (
    DensityMatrix,
    canonical_state,
    min_bipartite_negativity,
    permute_factors,
    qubit_split,
    tensor,
    white_noise_mix,
)
from netent.conic import TIGHT, SolverSettings
from netent.gmn import GmnResult, build_gmn_program, gmn, gmn_threshold

SPLIT3 = qubit_split([[0], [1], [2]])
SPLIT6 = qubit_split([[0, 1], [2, 3], [4, 5]])


def _haar_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


# ---------------------------------------------------------------------------
# values on reference states


def test_ghz3_value():
    res = gmn(canonical_state("ghz", 3).density(), SPLIT3)
    assert abs(res.value - 0.5) < 5e-3


def test_w3_value_matches_min_negativity():
    # all three cuts of the pure W state carry negativity sqrt(2)/3 and the
    # witness optimum reaches it
    rho = canonical_state("w", 3).density()
    res = gmn(rho, SPLIT3)
    assert abs(res.value - np.sqrt(2) / 3) < 1e-4
    assert abs(res.value - min_bipartite_negativity(rho, SPLIT3)[0]) < 1e-4


def test_separable_product_zero(rng):
    for _ in range(3):
        psi = tensor(tensor(random_pure(rng, (2,)), random_pure(rng, (2,))),
                     random_pure(rng, (2,)))
        res = gmn(psi.density(), SPLIT3)
        assert res.value < 1e-6


@pytest.mark.slow
def test_ghz6_value():
    res = gmn(canonical_state("ghz", 6).density(), SPLIT6)
    assert abs(res.value - 0.5) < 5e-3


@pytest.mark.slow
def test_double_ghz3_value():
    # two GHZ triples shared so that each party holds one qubit of each
    g3 = canonical_state("ghz", 3)
    psi = permute_factors(tensor(g3, g3), (0, 3, 1, 4, 2, 5))
    res = gmn(psi.density(), SPLIT6)
    assert abs(res.value - 1.5) < 5e-3


@pytest.mark.slow
def test_w6_value():
    res = gmn(canonical_state("w", 6).density(), SPLIT6)
    assert abs(res.value - 0.4714) < 2e-3


# ---------------------------------------------------------------------------
# result structure


def test_witness_decomposition_certificates():
    rho = white_noise_mix(canonical_state("ghz", 3), 0.3)
    res = gmn(rho, SPLIT3, TIGHT)
    assert isinstance(res, GmnResult)
    assert res.value >= 0.0
    assert abs(res.value + np.trace(rho.entries @ res.witness).real) < 1e-6
    _, cuts = build_gmn_program(rho, SPLIT3)
    assert res.cuts == cuts
    # cone memberships and the decomposition W = P + Q^{T_m} for every cut
    from netent.qcore import _pt_raw
    for ci, cut in enumerate(cuts):
        P, Q = res.certificates[ci]
        assert np.linalg.eigvalsh(P)[0] >= -1e-12
        qe = np.linalg.eigvalsh(Q)
        assert qe[0] >= -1e-12 and qe[-1] <= 1.0 + 1e-12
        qt = _pt_raw(Q, rho.dims.dims, cut.parties[1])
        assert np.linalg.norm(res.witness - (P + qt)) < 5e-5


def test_party_count_guard():
    rho = canonical_state("ghz", 2).density()
    with pytest.raises(ValueError):
        gmn(rho, qubit_split([[0], [1]]))


# ---------------------------------------------------------------------------
# monotone/convexity invariants


# Generic mixed states make the witness optimum degenerate and the splitting
# solver crawls through its last accuracy decade on them, so random-mixed
# draws run at 1e-4 tolerances with matching slack while sharply convergent
# families (pure states, noisy canonical states) carry the tight assertions.
LOOSE = SolverSettings(eps_primal=1e-4, eps_dual=1e-4, eps_gap=1e-4)


def test_not_exceeding_min_bipartite_negativity(rng):
    for _ in range(3):
        psi = random_pure(rng, (2, 2, 2))
        rho = psi.density()
        res = gmn(rho, SPLIT3)
        nmin, _ = min_bipartite_negativity(rho, SPLIT3)
        assert res.value <= nmin + 1e-6
    for _ in range(2):
        rho = random_density(rng, (2, 2, 2), rank=int(rng.integers(2, 5)))
        res = gmn(rho, SPLIT3, LOOSE)
        nmin, _ = min_bipartite_negativity(rho, SPLIT3)
        assert res.value <= nmin + 1e-3


def test_convex_under_mixing(rng):
    for _ in range(3):
        a = white_noise_mix(random_pure(rng, (2, 2, 2)), 0.15)
        b = white_noise_mix(random_pure(rng, (2, 2, 2)), 0.3)
        lam = float(rng.uniform(0.2, 0.8))
        mix = DensityMatrix(lam * a.entries + (1 - lam) * b.entries, a.dims)
        va = gmn(a, SPLIT3).value
        vb = gmn(b, SPLIT3).value
        vm = gmn(mix, SPLIT3).value
        assert vm <= lam * va + (1 - lam) * vb + 2e-6


def test_local_unitary_invariance(rng):
    rho = white_noise_mix(canonical_state("w", 3), 0.2)
    base = gmn(rho, SPLIT3, TIGHT).value
    for _ in range(2):
        u = np.eye(1)
        for _ in range(3):
            u = np.kron(u, _haar_unitary(rng, 2))
        rot = DensityMatrix(u @ rho.entries @ u.conj().T, rho.dims)
        assert abs(gmn(rot, SPLIT3, TIGHT).value - base) < 1e-6


def test_loose_profile_still_bounds_value(rng):
    # the 1e-4 profile must agree with the default one to that tolerance
    rho = white_noise_mix(random_pure(rng, (2, 2, 2)), 0.2)
    assert abs(gmn(rho, SPLIT3, LOOSE).value - gmn(rho, SPLIT3).value) < 1e-3


def test_biseparable_mixture_vanishes(rng):
    # mix of states, each a product across one of the three cuts but with an
    # entangled pair inside the two-party side: genuinely multiparty content
    # is absent, so the witness optimum cannot go negative
    bell = canonical_state("ghz", 2)
    parts = []
    for lone in range(3):
        pair = tensor(random_pure(rng, (2,)), bell)
        order = {0: (0, 1, 2), 1: (1, 0, 2), 2: (1, 2, 0)}[lone]
        parts.append(permute_factors(pair, order).density().entries)
    rho = DensityMatrix(sum(parts) / 3.0, (2, 2, 2))
    res = gmn(rho, SPLIT3)
    assert res.value < 1e-6


# ---------------------------------------------------------------------------
# vanishing thresholds


def test_threshold_ghz3():
    res = gmn_threshold(canonical_state("ghz", 3), SPLIT3,
                        p_grid=(0.3, 0.5, 0.7, 0.9))
    assert abs(res.p_c - 0.5715) < 5e-3
    assert res.bracket[1] - res.bracket[0] <= res.resolution + 1e-12


def test_threshold_w3():
    res = gmn_threshold(canonical_state("w", 3), SPLIT3,
                        p_grid=(0.3, 0.5, 0.7))
    assert abs(res.p_c - 0.5211) < 5e-3


def test_threshold_never_vanishing_raises():
    with pytest.raises(ValueError):
        gmn_threshold(canonical_state("ghz", 3), SPLIT3, p_grid=(0.0, 0.1))


@pytest.mark.slow
def test_threshold_w6():
    res = gmn_threshold(canonical_state("w", 6), SPLIT6,
                        p_grid=(0.7, 0.85, 0.95))
    assert abs(res.p_c - 0.8969) < 1e-2
