import csv

import numpy as np
import pytest

from fsmac.channels import gilbert_elliott_mac
from fsmac.errors import SpecError
from fsmac.exponents import (
    DEFAULT_RHO_GRID,
    AchievabilityVerdict,
    ExponentEval,
    F_supadditivity_check,
    concatenate_kernels,
    concatenation_power,
    error_bound,
    exponent_achievability,
    exponent_curve,
    gallager_E,
    gallager_F,
    lemma8_properties,
    save_exponent_curve,
)
from fsmac.probcore import CausalKernel, channel_causal_law


def _uniform_pair(channel, n):
    return (CausalKernel.uniform(1, n, channel.in1, channel.out),
            CausalKernel.uniform(2, n, channel.in2, channel.out))


class TestGallagerE:
    def test_zero_at_rho0(self, bern01_channel):
        Q1, Q2 = _uniform_pair(bern01_channel, 2)
        law = channel_causal_law(bern01_channel, s0=0, n=2)
        for i in (1, 2, 3):
            assert gallager_E(i, 0.0, Q1, Q2, law) == 0.0

    def test_identity_channel_linear(self, identity_channel):
        # noiseless bit pipe with uniform input: E(rho) = rho bits exactly
        Q1, Q2 = _uniform_pair(identity_channel, 1)
        law = channel_causal_law(identity_channel, s0=0, n=1)
        for rho in (0.25, 0.5, 1.0):
            for i in (1, 3):
                assert np.isclose(gallager_E(i, rho, Q1, Q2, law), rho,
                                  atol=1e-12)

    def test_useless_channel_zero(self, useless_channel):
        Q1, Q2 = _uniform_pair(useless_channel, 2)
        law = channel_causal_law(useless_channel, s0=0, n=2)
        for i in (1, 2, 3):
            assert abs(gallager_E(i, 0.7, Q1, Q2, law)) < 1e-12

    def test_type3_at_most_componentwise(self, bern01_channel):
        Q1, Q2 = _uniform_pair(bern01_channel, 2)
        law = channel_causal_law(bern01_channel, s0=0, n=2)
        for rho in (0.3, 1.0):
            e3 = gallager_E(3, rho, Q1, Q2, law)
            assert e3 >= gallager_E(1, rho, Q1, Q2, law) - 1e-12
            assert e3 >= gallager_E(2, rho, Q1, Q2, law) - 1e-12

    def test_invalid_args(self, bern01_channel):
        Q1, Q2 = _uniform_pair(bern01_channel, 1)
        law = channel_causal_law(bern01_channel, s0=0, n=1)
        with pytest.raises(SpecError):
            gallager_E(0, 0.5, Q1, Q2, law)
        with pytest.raises(SpecError):
            gallager_E(1, 1.5, Q1, Q2, law)


class TestFAndBounds:
    def test_F_single_state_equals_E(self, bern01_channel):
        Q1, Q2 = _uniform_pair(bern01_channel, 2)
        law = channel_causal_law(bern01_channel, s0=0, n=2)
        assert np.isclose(gallager_F(1, 0.5, Q1, Q2, bern01_channel, 2),
                          gallager_E(1, 0.5, Q1, Q2, law), atol=1e-14)

    def test_F_penalty(self):
        ch = gilbert_elliott_mac(0.3, 0.2, 0.05, 0.4)
        Q1, Q2 = _uniform_pair(ch, 2)
        F = gallager_F(3, 1.0, Q1, Q2, ch, 2)
        worst = min(gallager_E(3, 1.0, Q1, Q2,
                               channel_causal_law(ch, s0=s, n=2))
                    for s in range(2))
        assert np.isclose(F, worst - 0.5, atol=1e-12)

    def test_error_bound_values(self):
        assert np.isclose(error_bound(1, 4, 0.5, 1.0, 0.75), 2.0 ** (-4 * 0.25))
        assert np.isclose(error_bound(1, 4, 0.5, 1.0, 0.75, n_states=2),
                          2 * 2.0 ** (-4 * 0.25))
        with pytest.raises(SpecError):
            error_bound(1, 4, 0.5, 1.5, 0.75)


class TestCurves:
    def test_curve_shape_and_csv(self, bern01_channel, tmp_path):
        Q1, Q2 = _uniform_pair(bern01_channel, 1)
        ev = exponent_curve(3, Q1, Q2, bern01_channel, 1)
        assert ev.E.shape == (len(DEFAULT_RHO_GRID), 1)
        assert np.isclose(ev.F[0], 0.0)
        assert (np.diff(ev.F) >= -1e-10).all()
        path = tmp_path / "curve.csv"
        save_exponent_curve(ev, str(path))
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["rho", "E_s0_0", "F"]
        assert len(rows) == 1 + len(DEFAULT_RHO_GRID)
        assert float(rows[-1][0]) == 1.0

    def test_curve_rejects_nonzero_E0(self):
        with pytest.raises(SpecError):
            ExponentEval(1, [0.0, 0.5], np.array([[0.1], [0.2]]),
                         np.array([0.1, 0.2]), 1)

    def test_best_rho(self):
        ev = ExponentEval(1, [0.0, 0.5, 1.0],
                          np.array([[0.0], [0.4], [0.6]]),
                          np.array([0.0, 0.4, 0.6]), 1)
        rho, margin = ev.best_rho(0.5)
        assert rho == 0.5 and np.isclose(margin, 0.15)


class TestAchievability:
    def test_low_rate_certified(self, bern01_channel):
        Q1, Q2 = _uniform_pair(bern01_channel, 1)
        v = exponent_achievability(0.05, 0.05, Q1, Q2, bern01_channel, 1)
        assert v.certified and v.rho_star is not None
        assert min(v.margins) > 0

    def test_excessive_rate_rejected(self, bern01_channel):
        Q1, Q2 = _uniform_pair(bern01_channel, 1)
        v = exponent_achievability(1.0, 1.0, Q1, Q2, bern01_channel, 1)
        assert not v.certified and v.rho_star is None

    def test_origin_always_certified(self, useless_channel):
        Q1, Q2 = _uniform_pair(useless_channel, 1)
        v = exponent_achievability(0.0, 0.0, Q1, Q2, useless_channel, 1)
        assert v.certified

    def test_negative_rate_rejected(self, bern01_channel):
        Q1, Q2 = _uniform_pair(bern01_channel, 1)
        with pytest.raises(SpecError):
            exponent_achievability(-0.1, 0.0, Q1, Q2, bern01_channel, 1)


class TestProperties:
    @pytest.mark.parametrize("i", [1, 2, 3])
    def test_lemma8_bern(self, bern01_channel, i):
        rng = np.random.default_rng(i)
        Q1 = CausalKernel.random(1, 2, bern01_channel.in1, bern01_channel.out, rng)
        Q2 = CausalKernel.random(2, 2, bern01_channel.in2, bern01_channel.out, rng)
        rep = lemma8_properties(i, Q1, Q2, bern01_channel, 2)
        assert rep.ok
        assert rep.curvature_sign in (-1, 0)

    def test_lemma8_identity_linear(self, identity_channel):
        Q1, Q2 = _uniform_pair(identity_channel, 1)
        rep = lemma8_properties(3, Q1, Q2, identity_channel, 1)
        assert rep.ok and rep.curvature_sign == 0
        assert np.isclose(rep.dirinfo_per_symbol, 1.0, atol=1e-10)


class TestConcatenation:
    def test_shapes(self, bern01_channel):
        rng = np.random.default_rng(0)
        Qa = CausalKernel.random(1, 2, bern01_channel.in1, bern01_channel.out, rng)
        Qb = CausalKernel.random(1, 1, bern01_channel.in1, bern01_channel.out, rng)
        Qc = concatenate_kernels(Qa, Qb)
        assert Qc.n == 3
        assert Qc.rows[2].shape == (4, 2)
        # the appended step ignores first-block feedback
        assert np.allclose(Qc.rows[2][:2], Qc.rows[2][2:])

    def test_power_iid_is_iid(self, bern01_channel):
        Q = CausalKernel.iid(1, 1, [0.3, 0.7], bern01_channel.out)
        Q3 = concatenation_power(Q, 3)
        T = Q3.causal_tensor()
        ref = CausalKernel.iid(1, 3, [0.3, 0.7], bern01_channel.out).causal_tensor()
        assert np.abs(T - ref).max() < 1e-14
        with pytest.raises(SpecError):
            concatenation_power(Q, 0)

    @pytest.mark.parametrize("i", [1, 2, 3])
    def test_F_supadditive(self, bern01_channel, i):
        rng = np.random.default_rng(20 + i)
        Q1 = CausalKernel.random(1, 1, bern01_channel.in1, bern01_channel.out, rng)
        Q2 = CausalKernel.random(2, 1, bern01_channel.in2, bern01_channel.out, rng)
        margin = F_supadditivity_check(i, Q1, Q2, Q1, Q2, bern01_channel, 0.6)
        assert margin >= -1e-10

    def test_F_supadditive_with_states(self):
        ch = gilbert_elliott_mac(0.3, 0.2, 0.05, 0.4)
        Q1, Q2 = _uniform_pair(ch, 1)
        margin = F_supadditivity_check(3, Q1, Q2, Q1, Q2, ch, 1.0)
        assert margin >= -1e-10
