"""Network realization, the Gilbert loop, certification, and thresholds."""

import json

import numpy as np
import pytest

from netent import qcore as qc
from netent import network as net


def realized_density(params, topo):
    psi = net.realize(params, topo)
    return qc.DensityMatrix(
        np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.dims
    )


# ---------------------------------------------------------------------------
# topology


class TestTopology:
    def test_triangle_preset_shape(self):
        t = net.triangle_topology()
        assert t.k == 3
        assert t.party_dims == (4, 4, 4)
        assert t.D == 64
        assert t.edge_dims() == (4, 4, 4)
        assert t.uncovered() == ()
        assert t.variant == "triangle"

    def test_tetrahedron_preset_shape(self):
        t = net.tetrahedron_topology()
        assert t.k == 4
        assert t.party_dims == (4, 4, 4, 4)
        assert t.edge_dims() == (4, 4, 4, 4)
        assert t.variant == "tetrahedron"

    def test_rejects_wrong_party_count(self):
        with pytest.raises(ValueError):
            net.NetworkTopology(((2,), (2,)), (), "x")

    def test_rejects_edge_with_repeated_party(self):
        with pytest.raises(ValueError):
            net.NetworkTopology(
                ((2, 2), (2,), (2,)), (((0, 0), (0, 1)),), "x"
            )

    def test_rejects_slot_used_twice(self):
        with pytest.raises(ValueError):
            net.NetworkTopology(
                ((2,), (2,), (2,)),
                (((0, 0), (1, 0)), ((0, 0), (2, 0))),
                "x",
            )

    def test_rejects_missing_slot_reference(self):
        with pytest.raises(ValueError):
            net.NetworkTopology(((2,), (2,), (2,)), (((0, 1), (1, 0)),), "x")

    def test_three_party_family(self):
        fam = net.family_variants(net.triangle_topology())
        assert len(fam) == 7
        tags = sorted(t.variant for t in fam)
        assert tags == ["biseparable"] * 3 + ["single-link"] * 3 + ["triangle"]
        for t in fam:
            assert t.party_dims == (4, 4, 4)

    def test_four_party_family(self):
        fam = net.family_variants(net.tetrahedron_topology())
        assert len(fam) == 16
        from collections import Counter

        counts = Counter(t.variant for t in fam)
        assert counts == {
            "tetrahedron": 1,
            "three-face": 4,
            "two-face": 6,
            "one-face": 4,
            "product": 1,
        }
        for t in fam:
            assert t.party_dims == (4, 4, 4, 4)


# ---------------------------------------------------------------------------
# parameters and realization


class TestRealize:
    def test_params_require_unit_vectors(self):
        with pytest.raises(ValueError, match="unit norm"):
            net.PureNetworkParams(
                vectors=(np.array([1.0, 1.0, 0, 0]),),
                unitaries=(np.eye(4),),
            )

    def test_params_require_unitaries(self):
        with pytest.raises(ValueError, match="unitary"):
            net.PureNetworkParams(
                vectors=(), unitaries=(np.ones((4, 4)) / 2,)
            )

    def test_bell_resources_reproduce_canonical_triangle(self):
        topo = net.triangle_topology()
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        params = net.PureNetworkParams(
            vectors=(bell, bell, bell),
            unitaries=tuple(np.eye(4, dtype=complex) for _ in range(3)),
        )
        psi = net.realize(params, topo)
        canon = qc.canonical_state("bell_triangle")
        assert np.max(np.abs(psi.amplitudes - canon.amplitudes)) < 1e-14

    def test_product_resources_give_product_state(self, rng):
        topo = net.triangle_topology()
        vecs = []
        for d in topo.edge_dims():
            a = np.zeros(d, dtype=complex)
            a[int(rng.integers(d))] = 1.0
            vecs.append(a)
        us = tuple(net._haar_unitary(4, rng) for _ in range(3))
        psi = net.realize(net.PureNetworkParams(tuple(vecs), us), topo)
        rho = psi.density()
        for p in range(3):
            marg = qc.partial_trace(rho, (p,))
            purity = float(np.trace(marg.entries @ marg.entries).real)
            assert abs(purity - 1.0) < 1e-10

    def test_biseparable_variant_is_product_across_the_cut(self, rng):
        fam = net.family_variants(net.triangle_topology())
        topo = next(
            t for t in fam
            if t.variant == "biseparable" and t.edges[0][0][0] == 0
            and t.edges[0][1][0] == 1
        )
        params = net.random_params(topo, rng)
        rho = realized_density(params, topo).entries.reshape(16, 4, 16, 4)
        marg_ab = np.trace(rho, axis1=1, axis2=3)
        purity = float(np.trace(marg_ab @ marg_ab).real)
        assert abs(purity - 1.0) < 1e-10

    def test_realized_states_are_normalized(self, rng):
        for topo in net.family_variants(net.triangle_topology()):
            psi = net.realize(net.random_params(topo, rng), topo)
            assert abs(np.linalg.norm(psi.amplitudes) - 1.0) < 1e-12

    def test_wrong_vector_count_rejected(self, rng):
        topo = net.triangle_topology()
        p = net.random_params(topo, rng)
        bad = net.PureNetworkParams(p.vectors[:2], p.unitaries)
        with pytest.raises(ValueError, match="one resource vector"):
            net.realize(bad, topo)

    def test_wrong_unitary_dim_rejected(self, rng):
        topo = net.triangle_topology()
        p = net.random_params(topo, rng)
        bad = net.PureNetworkParams(
            p.vectors, (np.eye(2), np.eye(4), np.eye(4))
        )
        with pytest.raises(ValueError, match="unitary shape"):
            net.realize(bad, topo)


# ---------------------------------------------------------------------------
# inner maximization


class TestInnerMax:
    def test_identity_form_gives_one(self):
        topo = net.triangle_topology()
        res = net.inner_max(np.eye(64), topo, restarts=2, rng=3, ascent_steps=4)
        assert abs(res.value - 1.0) < 1e-12

    def test_requires_rng(self):
        with pytest.raises(ValueError, match="seeded"):
            net.inner_max(np.eye(64), net.triangle_topology())

    def test_rejects_non_hermitian(self):
        X = np.zeros((64, 64))
        X[0, 1] = 1.0
        with pytest.raises(ValueError, match="Hermitian"):
            net.inner_max(X, net.triangle_topology(), rng=0)

    def test_membership_projector_reaches_one(self, rng):
        topo = net.triangle_topology()
        psi = net.realize(net.random_params(topo, rng), topo)
        X = np.outer(psi.amplitudes, psi.amplitudes.conj())
        res = net.inner_max(X, topo, restarts=16, rng=11)
        assert res.value > 1.0 - 1e-6

    def test_biseparable_variant_beats_triangle_alone(self):
        # A maximally entangled pair across two full parties with the third
        # in a product state is an extreme point of the biseparable diagram
        # but lies outside the triangle diagram's reach.
        topo = net.triangle_topology()
        phi4 = np.zeros(16, dtype=complex)
        phi4[[0, 5, 10, 15]] = 0.5
        vec = np.kron(phi4, np.eye(4)[0]).astype(complex)
        X = np.outer(vec, vec.conj())
        full = net.inner_max(X, topo, restarts=14, rng=17)
        tri_only = net.inner_max(
            X, topo, restarts=14, rng=19, variants=(topo,)
        )
        assert full.value > 1.0 - 1e-6
        assert tri_only.value < 0.9
        assert full.value > tri_only.value + 0.05

    def test_result_state_matches_params(self, rng):
        topo = net.triangle_topology()
        X = np.diag(np.linspace(-1, 1, 64))
        res = net.inner_max(X, topo, restarts=4, rng=rng, ascent_steps=10)
        fam = net.family_variants(topo)
        re_psi = net.realize(res.params, fam[res.variant_index])
        assert np.max(np.abs(re_psi.amplitudes - res.state.amplitudes)) < 1e-12
        direct = float(
            np.vdot(res.state.amplitudes, X @ res.state.amplitudes).real
        )
        assert abs(direct - res.value) < 1e-10

    @pytest.mark.slow
    def test_ghz6_overlap_beats_random_sampling(self, rng):
        topo = net.triangle_topology()
        ghz = qc.canonical_state("ghz", 6).amplitudes
        X = np.outer(ghz, ghz.conj())
        res = net.inner_max(X, topo, restarts=24, rng=23)
        fam = net.family_variants(topo)
        best = 0.0
        for i in range(10_000):
            var = fam[i % len(fam)]
            psi = net.realize(net.random_params(var, rng), var)
            best = max(best, abs(np.vdot(ghz, psi.amplitudes)) ** 2)
        assert res.value >= best - 1e-9


# ---------------------------------------------------------------------------
# the simplex refit


class TestSimplexRefit:
    def test_matches_general_purpose_solver(self, rng):
        from scipy.optimize import minimize

        for n in (2, 5, 9):
            A = rng.standard_normal((20, n))
            b = rng.standard_normal(20)
            G, c = A.T @ A, A.T @ b
            x0 = np.full(n, 1.0 / n)
            mine = net._simplex_lsq(G, c, x0)
            ref = minimize(
                lambda x: 0.5 * x @ G @ x - c @ x,
                x0,
                jac=lambda x: G @ x - c,
                bounds=[(0, None)] * n,
                constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1}],
                method="SLSQP",
                options={"ftol": 1e-14, "maxiter": 400},
            )
            assert mine.min() >= 0
            assert abs(mine.sum() - 1) < 1e-12
            f_mine = 0.5 * mine @ G @ mine - c @ mine
            f_ref = 0.5 * ref.x @ G @ ref.x - c @ ref.x
            assert f_mine <= f_ref + 1e-9

    def test_exact_on_interior_combination(self, rng):
        # If b is exactly a simplex combination of the columns, the refit
        # must recover a combination with zero residual.
        A = rng.standard_normal((30, 6))
        w_true = rng.random(6)
        w_true /= w_true.sum()
        b = A @ w_true
        G, c = A.T @ A, A.T @ b
        w = net._simplex_lsq(G, c, np.full(6, 1 / 6))
        assert np.linalg.norm(A @ w - b) < 1e-10


# ---------------------------------------------------------------------------
# the Gilbert loop


class TestGilbert:
    def test_maximally_mixed_is_inside(self):
        topo = net.triangle_topology()
        rho = qc.maximally_mixed((2,) * 6)
        out = net.gilbert_distance(
            rho, topo, net.GilbertSettings(seed=1, max_iters=50)
        )
        assert out.value < 1e-6
        assert out.state.iterations == 0
        assert out.state.converged

    def test_realized_state_has_tiny_distance(self, rng):
        topo = net.triangle_topology()
        rho = realized_density(net.random_params(topo, rng), topo)
        out = net.gilbert_distance(
            rho, topo, net.GilbertSettings(seed=5, max_iters=200, window=40)
        )
        assert out.value < 1e-3

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            net.gilbert_distance(
                qc.maximally_mixed((2, 2, 2)),
                net.triangle_topology(),
                net.GilbertSettings(seed=0),
            )

    def test_history_and_reconstruction_invariants(self):
        topo = net.triangle_topology()
        rho = qc.canonical_state("ghz", 6).density()
        out = net.gilbert_distance(
            rho, topo, net.GilbertSettings(seed=9, max_iters=40, window=10**9)
        )
        st = out.state
        h = np.array(st.history)
        assert np.all(np.diff(h) <= 1e-12)
        w = np.concatenate(([st.base_weight], st.weights))
        assert w.min() >= 0
        assert abs(w.sum() - 1) < 1e-10
        rebuilt = st.base_weight * st.base
        for wi, col in zip(st.weights, st.columns):
            rebuilt = rebuilt + wi * np.outer(col, col.conj())
        assert np.max(np.abs(rebuilt - st.iterate_matrix())) < 1e-10
        assert (
            abs(np.linalg.norm(rho.entries - st.iterate_matrix()) - out.value)
            < 1e-10
        )

    def test_memory_stays_within_budget(self):
        topo = net.triangle_topology()
        rho = qc.canonical_state("w", 6).density()
        s = net.GilbertSettings(seed=13, max_iters=90, window=10**9, memory=12)
        out = net.gilbert_distance(rho, topo, s)
        assert len(out.state.columns) <= 12
        h = np.array(out.state.history)
        assert np.all(np.diff(h) <= 1e-12)

    def test_checkpoint_roundtrip_and_resume(self, tmp_path):
        topo = net.triangle_topology()
        rho = qc.canonical_state("ghz", 6).density()
        s = net.GilbertSettings(seed=21, max_iters=25, window=10**9)
        rng_probe = np.random.default_rng(s.seed)
        out = net.gilbert_distance(rho, topo, s)
        path = tmp_path / "run.json"
        net.save_checkpoint(out.state, path, rng=rng_probe)
        loaded = net.load_checkpoint(path)
        assert (
            np.max(np.abs(loaded.state.iterate_matrix() - out.state.iterate_matrix()))
            < 1e-14
        )
        assert loaded.state.history == out.state.history
        s2 = net.GilbertSettings(seed=21, max_iters=40, window=10**9)
        out2 = net.gilbert_distance(rho, topo, s2, resume=loaded)
        assert out2.state.iterations >= out.state.iterations
        assert out2.value <= out.value + 1e-12
        h = np.array(out2.state.history)
        assert np.all(np.diff(h) <= 1e-12)

    def test_checkpoint_rejects_other_files(self, tmp_path):
        p = tmp_path / "junk.json"
        p.write_text(json.dumps({"format": "something-else"}))
        with pytest.raises(ValueError, match="checkpoint"):
            net.load_checkpoint(p)

    def test_boundary_stop_when_no_extreme_improves(self, monkeypatch):
        # If every preselection attempt fails the alignment test the loop
        # must stop and report a boundary hit rather than spin forever.
        topo = net.triangle_topology()
        psi = net.realize(net.random_params(topo, np.random.default_rng(0)), topo)
        stub = net.InnerMaxResult(
            state=psi,
            value=-1.0,
            params=net.random_params(topo, np.random.default_rng(0)),
            variant_index=0,
        )
        monkeypatch.setattr(net, "inner_max", lambda *a, **k: stub)
        rho = qc.canonical_state("ghz", 6).density()
        out = net.gilbert_distance(
            rho, topo, net.GilbertSettings(seed=6, max_iters=30, preselect_cap=3)
        )
        assert out.state.boundary
        assert out.state.converged
        assert out.state.iterations == 0
        assert abs(out.value - np.linalg.norm(rho.entries - np.eye(64) / 64)) < 1e-12

    def test_outcome_unpacks_as_triple(self):
        topo = net.triangle_topology()
        rho = qc.maximally_mixed((2,) * 6)
        value, closest, state = net.gilbert_distance(
            rho, topo, net.GilbertSettings(seed=2, max_iters=5)
        )
        assert value < 1e-6
        assert isinstance(closest, qc.DensityMatrix)
        assert isinstance(state, net.GilbertState)

    @pytest.mark.slow
    def test_ghz6_distance_window(self):
        topo = net.triangle_topology()
        rho = qc.canonical_state("ghz", 6).density()
        out = net.gilbert_distance(
            rho, topo, net.GilbertSettings(seed=20240817, max_iters=400)
        )
        assert 0.493 <= out.value <= 0.523
        assert out.value > 0.38

    @pytest.mark.slow
    def test_w6_distance_window(self):
        topo = net.triangle_topology()
        rho = qc.canonical_state("w", 6).density()
        out = net.gilbert_distance(
            rho, topo, net.GilbertSettings(seed=31, max_iters=700)
        )
        assert 0.377 <= out.value <= 0.407
        assert out.value > 0.38

    @pytest.mark.slow
    def test_double_ghz3_distance_window(self):
        topo = net.triangle_topology()
        g3 = qc.canonical_state("ghz", 3)
        gg = qc.permute_factors(qc.tensor(g3, g3), (0, 3, 1, 4, 2, 5))
        out = net.gilbert_distance(
            gg.density(), topo, net.GilbertSettings(seed=47, max_iters=700)
        )
        assert 0.49 <= out.value <= 0.52
        assert out.value > 0.38

    @pytest.mark.slow
    def test_noise_monotonicity(self):
        topo = net.triangle_topology()
        ghz = qc.canonical_state("ghz", 6)
        s = net.GilbertSettings(seed=3, max_iters=260, window=60)
        rows = net.noise_sweep(ghz, topo, (0.15, 0.35, 0.55), s)
        ds = [r.D for r in rows]
        assert ds[1] <= ds[0] + 2e-3
        assert ds[2] <= ds[1] + 2e-3


# ---------------------------------------------------------------------------
# ancilla extension


class TestExtendWithAncilla:
    def test_requires_three_qubits(self):
        with pytest.raises(ValueError, match="three single-qubit"):
            net.extend_with_ancilla(qc.maximally_mixed((2, 2)))

    def test_maximally_mixed_extends_to_maximally_mixed(self):
        ext = net.extend_with_ancilla(qc.maximally_mixed((2, 2, 2)))
        assert np.max(np.abs(ext.entries - np.eye(64) / 64)) < 1e-14
        out = net.gilbert_distance(
            ext,
            net.triangle_topology(),
            net.GilbertSettings(seed=4, max_iters=5),
        )
        assert out.value < 1e-6

    def test_qubits_interleave_with_their_ancillas(self):
        rho = qc.canonical_state("ghz", 3).density()
        ext = net.extend_with_ancilla(rho)
        assert ext.dims.dims == (2,) * 6
        back = qc.partial_trace(ext, (0, 2, 4))
        assert np.max(np.abs(back.entries - rho.entries)) < 1e-14
        anc = qc.partial_trace(ext, (1, 3, 5))
        assert np.max(np.abs(anc.entries - np.eye(8) / 8)) < 1e-14

    def test_traceback_of_closest_state_is_a_state(self):
        topo = net.triangle_topology()
        ext = net.extend_with_ancilla(qc.canonical_state("ghz", 3).density())
        out = net.gilbert_distance(
            ext, topo, net.GilbertSettings(seed=8, max_iters=25, window=10**9)
        )
        back = qc.partial_trace(out.closest, (0, 2, 4))
        evals = np.linalg.eigvalsh(back.entries)
        assert evals.min() > -1e-12
        assert abs(np.trace(back.entries).real - 1) < 1e-12

    @pytest.mark.slow
    def test_losr_closure(self):
        # Tracing the ancillas of a hull member and re-attaching fresh
        # maximally mixed ancillas stays in the hull: the ancilla reset is
        # a uniform Pauli twirl, a mixture of local unitaries.
        topo = net.triangle_topology()
        ext = net.extend_with_ancilla(qc.canonical_state("ghz", 3).density())
        probe = net.gilbert_distance(
            ext, topo, net.GilbertSettings(seed=61, max_iters=220, window=10**9)
        )
        back = qc.partial_trace(probe.closest, (0, 2, 4))
        reext = net.extend_with_ancilla(back)
        out = net.gilbert_distance(
            reext, topo, net.GilbertSettings(seed=67, max_iters=4000)
        )
        assert out.value < 1e-6


# ---------------------------------------------------------------------------
# certification


class TestCertifyNetwork:
    def test_zero_distance_gives_zero_epsilon(self):
        res = net.certify_network(qc.maximally_mixed((2,) * 6), 0.0)
        assert res.epsilon == 0.0
        assert res.delta == 0.0
        assert not res.full_rank_caveat

    def test_delta_equal_radius_gives_one_half(self):
        rho = qc.maximally_mixed((2, 2, 2))
        r = 1.0 / np.sqrt(8 * 7)
        res = net.certify_network(rho, r)
        assert abs(res.epsilon - 0.5) < 1e-15

    def test_certified_state_is_the_white_noise_mix(self, rng):
        psi = qc.PureState(
            (lambda v: v / np.linalg.norm(v))(
                rng.standard_normal(64) + 1j * rng.standard_normal(64)
            ),
            (2,) * 6,
        )
        delta = 0.31
        res = net.certify_network(psi.density(), delta)
        eps = res.epsilon
        direct = (1 - eps) * psi.density().entries + eps * np.eye(64) / 64
        assert np.max(np.abs(res.certified_state.entries - direct)) < 1e-12
        assert res.full_rank_caveat  # pure input is rank one

    def test_full_rank_input_has_no_caveat(self):
        rho = qc.white_noise_mix(qc.canonical_state("ghz", 6), 0.5)
        assert not net.certify_network(rho, 0.2).full_rank_caveat

    def test_epsilon_range(self):
        rho = qc.maximally_mixed((2,) * 6)
        for delta in (0.0, 1e-9, 0.1, 3.0, 1e6):
            res = net.certify_network(rho, delta)
            assert 0.0 <= res.epsilon < 1.0
            assert (res.epsilon == 0.0) == (delta == 0.0)

    def test_negative_delta_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            net.certify_network(qc.maximally_mixed((2,) * 6), -0.1)


# ---------------------------------------------------------------------------
# threshold extrapolation


class TestThresholdExtrapolate:
    def test_exact_line_recovers_root(self):
        pts = [(p, 0.4 * (0.7 - p)) for p in (0.1, 0.2, 0.3, 0.4, 0.5)]
        fit = net.threshold_extrapolate(pts)
        assert abs(fit.p_c - 0.7) < 1e-10
        assert abs(fit.slope + 0.4) < 1e-10
        assert fit.rms_residual < 1e-12
        assert fit.n_points == 5

    def test_requires_four_points(self):
        with pytest.raises(ValueError, match="four samples"):
            net.threshold_extrapolate([(0.1, 0.3), (0.2, 0.2), (0.3, 0.1)])

    def test_rejects_increasing_data(self):
        pts = [(0.1, 0.1), (0.2, 0.2), (0.3, 0.3), (0.4, 0.4)]
        with pytest.raises(ValueError, match="non-decreasing"):
            net.threshold_extrapolate(pts)

    def test_window_restricts_the_fit(self):
        # Linear only on [0.3, 0.6]; flat tail outside would bias the root.
        line = [(p, 0.5 * (0.8 - p)) for p in (0.3, 0.4, 0.5, 0.6)]
        tail = [(0.05, 0.9), (0.1, 0.9), (0.7, 0.04), (0.75, 0.04)]
        fit = net.threshold_extrapolate(line + tail, window=(0.25, 0.65))
        assert abs(fit.p_c - 0.8) < 1e-10
        assert fit.n_points == 4
        assert fit.p_window == (0.3, 0.6)

    def test_tolerates_small_jitter(self):
        pts = [(0.1, 0.30), (0.2, 0.3005), (0.3, 0.15), (0.4, 0.05)]
        fit = net.threshold_extrapolate(pts)
        assert fit.slope < 0


# ---------------------------------------------------------------------------
# sweeps


class TestSweep:
    def test_seed_derivation_is_documented_formula(self):
        assert net.sweep_seed(7, 0) == 700021
        assert net.sweep_seed(7, 3) == 700024

    def test_rows_and_csv(self, tmp_path):
        topo = net.triangle_topology()
        ghz = qc.canonical_state("ghz", 6)
        s = net.GilbertSettings(seed=7, max_iters=3, window=10**9)
        rows = net.noise_sweep(ghz, topo, (0.2, 0.8), s)
        assert [r.p for r in rows] == [0.2, 0.8]
        assert [r.seed for r in rows] == [700021, 700022]
        assert all(r.iterations <= 3 for r in rows)
        path = tmp_path / "sweep.csv"
        net.write_sweep_csv(rows, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "p,D,iterations,seed"
        cells = lines[1].split(",")
        assert float(cells[0]) == 0.2
        assert abs(float(cells[1]) - rows[0].D) < 1e-16
        assert cells[2] == str(rows[0].iterations)
        assert cells[3] == "700021"

    def test_csv_keeps_17_significant_digits(self, tmp_path):
        rows = [net.SweepPoint(1 / 3, 2 / 3, 5, 42)]
        path = tmp_path / "s.csv"
        net.write_sweep_csv(rows, path)
        line = path.read_text().strip().splitlines()[1]
        p_txt, d_txt = line.split(",")[:2]
        assert float(p_txt) == 1 / 3
        assert float(d_txt) == 2 / 3
