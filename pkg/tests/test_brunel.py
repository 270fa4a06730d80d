import numpy as np
import pytest

from ncerg.algebra import AlgebraContext, op_norm
from ncerg.brunel import (BrunelWeights, brunel_operator, domination_check,
                          geometric_weights, search_parameters,
                          uniform_box_weights)
from ncerg.dsop import DSMap, DSTuple, verify_ds
from ncerg.sampling import (commuting_unitary_tuple, cyclic_permutation_tuple,
                            random_psd)


def identity_tuple(ctx, d):
    return DSTuple([DSMap.identity(ctx) for _ in range(d)], commuting=True)


class TestWeights:
    def test_point_mass_gives_identity(self, ctx3, rng):
        w = BrunelWeights(2, {(0, 0): 1.0}, 1.0)
        s = brunel_operator(identity_tuple(ctx3, 2), w)
        x = random_psd(rng, ctx3)
        np.testing.assert_allclose(s.apply(x), x, atol=1e-12)

    def test_uniform_box_identities(self, ctx3, rng):
        w = uniform_box_weights(2, 1)
        assert w.deficit == pytest.approx(0.0, abs=1e-12)
        s = brunel_operator(identity_tuple(ctx3, 2), w)
        x = random_psd(rng, ctx3)
        np.testing.assert_allclose(s.apply(x), x, atol=1e-12)

    def test_geometric_unitary_tuple_is_ds(self, ctx3, rng):
        t = commuting_unitary_tuple(rng, ctx3, 2)
        w = geometric_weights(2, 8)
        s = brunel_operator(t, w)
        x = random_psd(rng, ctx3)
        assert ctx3.trace_real(s.apply(x)) <= ctx3.trace_real(x) + 1e-10
        assert verify_ds(s, samples=12, seed=2).passed

    def test_deficit_threshold_enforced(self, ctx3):
        raw = geometric_weights(2, 2, normalize=False)
        assert raw.deficit > 1e-6
        with pytest.raises(ValueError):
            brunel_operator(identity_tuple(ctx3, 2), raw)

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            BrunelWeights(1, {(0,): 0.0}, 1.0)
        with pytest.raises(ValueError):
            BrunelWeights(1, {(0,): 0.7, (1,): 0.7}, 1.0)


class TestDomination:
    def test_degenerate_single_operator_equality(self, ctx3, rng):
        # weights delta_1 make S = T; with n_d = n both sides coincide
        t = cyclic_permutation_tuple(ctx3, [1])
        w = BrunelWeights(1, {(1,): 1.0}, 1.0, nd_map=lambda n: n)
        rep = domination_check(t, w, 5, probes=12, seed=1)
        assert rep.passed
        assert abs(rep.metadata["min_margin"]) < 1e-9

    def test_identities_need_chi_at_least_one(self, ctx3):
        t = identity_tuple(ctx3, 2)
        w_ok = uniform_box_weights(2, 1, chi=1.0)
        assert domination_check(t, w_ok, 3, probes=8, seed=0).passed
        w_bad = BrunelWeights(2, dict(w_ok.a), 0.8)
        assert not domination_check(t, w_bad, 3, probes=8, seed=0).passed

    def test_margin_homogeneous_in_probe_scale(self, ctx3, rng):
        t = commuting_unitary_tuple(rng, ctx3, 2)
        w = geometric_weights(2, 4, chi=8.0)
        s = brunel_operator(t, w)
        from ncerg.brunel import _cube_average_superop, _inner_average_superop
        from ncerg.dsop import unvec, vec
        lhs_sup = _cube_average_superop(t, 3)
        rhs_sup = w.chi * _inner_average_superop(s, w.nd_map(3))
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        x = np.outer(v, v.conj())
        gap = lambda y: np.linalg.eigvalsh(
            (lambda m: (m + m.conj().T) / 2)(unvec((rhs_sup - lhs_sup) @ vec(y), 3)))[0]
        assert gap(4.0 * x) == pytest.approx(4.0 * gap(x), rel=1e-9, abs=1e-12)

    def test_rank_one_passes_imply_mixtures(self, ctx3, rng):
        # spanning rank-one family + positivity of both sides => PSD mixtures
        t = cyclic_permutation_tuple(ctx3, [1, 2])
        w = search_parameters(t, geometric_weights(2, 3).a, [2, 3], probes=12, seed=3)
        s = brunel_operator(t, w)
        from ncerg.brunel import _cube_average_superop, _inner_average_superop
        from ncerg.dsop import unvec, vec
        for n in (2, 3):
            lhs_sup = _cube_average_superop(t, n)
            rhs_sup = w.chi * _inner_average_superop(s, w.nd_map(n))
            for _ in range(10):
                x = random_psd(rng, ctx3)  # PSD mixture of rank-ones
                diff = unvec((rhs_sup - lhs_sup) @ vec(x), 3)
                diff = (diff + diff.conj().T) / 2
                assert np.linalg.eigvalsh(diff)[0] > -1e-8


class TestSearch:
    def test_identities_calibrate_to_one(self, ctx3):
        t = identity_tuple(ctx3, 2)
        w = search_parameters(t, uniform_box_weights(2, 1).a, [2, 4], probes=6,
                              seed=0, safety=1.0)
        assert w.chi == pytest.approx(1.0, abs=1e-6)

    def test_point_mass_small_n_feasible(self, ctx3, rng):
        # S = identity: at n = 1 both sides are x, so chi = 1 suffices
        t = commuting_unitary_tuple(rng, ctx3, 2)
        w = search_parameters(t, {(0, 0): 1.0}, [1], probes=6, seed=0, safety=1.0)
        assert w.chi == pytest.approx(1.0, abs=1e-6)

    def test_shift_orbit_infeasible(self, ctx4):
        # S = identity but the cube average spreads over the shift orbit:
        # no chi can dominate directions outside the probe's span
        t = cyclic_permutation_tuple(ctx4, [1])
        with pytest.raises(RuntimeError):
            search_parameters(t, {(0,): 1.0}, [3], probes=4, seed=0, chi_cap=100.0)

    def test_calibrated_passes_fresh_probes(self, ctx3, rng):
        t = cyclic_permutation_tuple(ctx3, [1, 2])
        w = search_parameters(t, geometric_weights(2, 4).a, [2, 4], probes=16, seed=5)
        s = brunel_operator(t, w)
        for n in (2, 4):
            rep = domination_check(t, w, n, probes=64, seed=99, S=s)
            assert rep.passed, rep.metadata

    def test_unitary_tuple_calibration(self, ctx3, rng):
        t = commuting_unitary_tuple(rng, ctx3, 2)
        w = search_parameters(t, geometric_weights(2, 4).a, [2, 3], probes=12, seed=7)
        s = brunel_operator(t, w)
        rep = domination_check(t, w, 3, probes=32, seed=11, S=s)
        assert rep.passed, rep.metadata
        assert verify_ds(s, samples=8, seed=1).passed
