import json

import numpy as np
import pytest

from fsmac.channels import (
    FeedbackFn,
    LimitedIsiSpec,
    NoiseChain,
    additive_modq_mac,
    channel_from_dict,
    channel_to_dict,
    check_multiplexer,
    erasure_p2p,
    gilbert_elliott_mac,
    indecomposability_diagnostic,
    limited_isi_to_fsmac,
    markov_factorization_check,
    mux_p2p_compose,
    stationary_distribution,
)
from fsmac.errors import SpecError
from fsmac.probcore import Alphabet, CausalKernel, channel_causal_law, joint_law


class TestConstructors:
    def test_additive_noiseless(self):
        ch = additive_modq_mac(2, NoiseChain.iid_bernoulli(0.0))
        out = ch.output_marginal()
        for x1 in range(2):
            for x2 in range(2):
                assert out[x1, x2, 0, x1 ^ x2] == 1.0

    def test_additive_rows_sum(self):
        ch = additive_modq_mac(3, NoiseChain.iid([0.5, 0.3, 0.2]))
        assert np.abs(ch.kernel.sum(axis=(3, 4)) - 1.0).max() < 1e-12

    def test_additive_arity_mismatch(self):
        with pytest.raises(SpecError):
            additive_modq_mac(3, NoiseChain.iid_bernoulli(0.1))

    def test_ge_kernel_flip_probs(self):
        ch = gilbert_elliott_mac(0.1, 0.2, 0.05, 0.4)
        out = ch.output_marginal()
        assert np.isclose(out[0, 1, 0, 1], 0.95)  # good state passes x1^x2
        assert np.isclose(out[0, 1, 1, 0], 0.4)  # bad state flips

    def test_ge_symmetric_stationary(self):
        ch = gilbert_elliott_mac(0.5, 0.5, 0.1, 0.4)
        assert np.allclose(ch.stationary_state_distribution(), [0.5, 0.5])

    def test_ge_noise_marginal_matches_chain(self):
        ch = gilbert_elliott_mac(0.2, 0.3, 0.1, 0.35)
        for n in range(1, 6):
            # noise sequence law from the channel with x1=x2=0, stationary s0
            law = channel_causal_law(ch, n=n, average_over_stationary=True)
            assert np.abs(law.tensor[0, 0] - ch.noise_chain.sequence_pmf(n)
                          ).max() < 1e-10

    def test_erasure_identity_when_pe0(self):
        ch = erasure_p2p(2, np.array([[1.0, 0.0], [1.0, 0.0]]))
        out = ch.output_marginal()
        for x in range(2):
            assert out[x, 0, 0, x] == 1.0

    def test_erasure_always_erases_when_pe1(self):
        ch = erasure_p2p(2, np.array([[0.0, 1.0], [0.0, 1.0]]))
        assert np.allclose(ch.output_marginal()[:, 0, :, 2], 1.0)


class TestMultiplexer:
    def test_xor_accepted(self):
        ok, _ = check_multiplexer(np.array([[0, 1], [1, 0]]), 2)
        assert ok

    def test_and_accepted(self):
        ok, _ = check_multiplexer(np.array([[0, 0], [0, 1]]), 2)
        assert ok

    def test_constant_rejected(self):
        ok, witness = check_multiplexer(np.zeros((2, 2), dtype=int), 2)
        assert not ok and witness is not None

    def test_xor_bsc_equals_additive(self):
        p = 0.15
        bsc_kernel = np.zeros((2, 1, 1, 2, 1))
        for x in range(2):
            bsc_kernel[x, 0, 0, x, 0] = 1 - p
            bsc_kernel[x, 0, 0, 1 - x, 0] = p
        from fsmac.channels import FsMac

        bsc = FsMac(Alphabet(1), Alphabet(2), Alphabet(1), Alphabet(2), bsc_kernel)
        ch = mux_p2p_compose(np.array([[0, 1], [1, 0]]), bsc)
        ref = additive_modq_mac(2, NoiseChain.iid_bernoulli(p))
        assert np.abs(ch.kernel - ref.kernel).max() < 1e-12

    def test_compose_rejects_non_mux(self):
        ch = erasure_p2p(2, np.array([[0.9, 0.1], [0.9, 0.1]]))
        with pytest.raises(SpecError):
            mux_p2p_compose(np.zeros((2, 2), dtype=int), ch)


class TestStationary:
    def test_two_state_hand_value(self):
        pi = stationary_distribution(np.array([[0.8, 0.2], [0.1, 0.9]]))
        assert np.allclose(pi, [1 / 3, 2 / 3])

    def test_identity_rejected(self):
        with pytest.raises(SpecError):
            stationary_distribution(np.eye(2))

    def test_periodic_rejected(self):
        with pytest.raises(SpecError):
            stationary_distribution(np.array([[0.0, 1.0], [1.0, 0.0]]))


class TestDiagnostics:
    def test_ge_is_markov(self):
        ok, v = markov_factorization_check(gilbert_elliott_mac(0.3, 0.4, 0.1, 0.2))
        assert ok and v < 1e-12

    def test_output_driven_state_is_not_markov(self):
        # state = previous output of a noisy additive channel
        kernel = np.zeros((2, 2, 2, 2, 2))
        for x1 in range(2):
            for x2 in range(2):
                for s in range(2):
                    y0 = x1 ^ x2
                    kernel[x1, x2, s, y0, y0] = 0.8
                    kernel[x1, x2, s, 1 - y0, 1 - y0] = 0.2
        from fsmac.channels import FsMac

        ch = FsMac(Alphabet(2), Alphabet(2), Alphabet(2), Alphabet(2), kernel)
        ok, violation = markov_factorization_check(ch)
        assert not ok and violation > 0.1

    def test_indecomposability_single_state(self, bern01_channel):
        ok, spread = indecomposability_diagnostic(bern01_channel, 3)
        assert ok and spread == 0.0

    def test_indecomposability_ge_decays(self):
        ch = gilbert_elliott_mac(0.3, 0.4, 0.1, 0.2)
        spreads = [indecomposability_diagnostic(ch, n)[1] for n in range(1, 9)]
        assert all(b <= a + 1e-12 for a, b in zip(spreads, spreads[1:]))
        assert spreads[-1] < spreads[0]

    def test_indecomposability_disconnected(self):
        ch = gilbert_elliott_mac(0.0, 0.0, 0.0, 0.5)
        ok, spread = indecomposability_diagnostic(ch, 4, eps=1e-2)
        assert not ok and np.isclose(spread, 1.0)


class TestLimitedIsi:
    def test_m0_equals_direct(self):
        chain = np.array([[0.7, 0.3], [0.4, 0.6]])
        rng = np.random.default_rng(0)
        out_kernel = rng.dirichlet(np.ones(2), size=(2, 2, 2))
        spec = LimitedIsiSpec(0, chain, out_kernel, Alphabet(2), Alphabet(2),
                              Alphabet(2))
        ch = limited_isi_to_fsmac(spec)
        assert ch.states.size == 2
        ok, _ = markov_factorization_check(ch)
        assert ok

    def test_delayed_identity_rate(self):
        # y_i = x_{1,i-1}: with m=1 the window carries one input symbol
        out_kernel = np.zeros((1, 4, 4, 2))
        for win in range(4):
            prev = win // 2  # older symbol of (x_{1,i-1}, x_{1,i})
            out_kernel[0, win, :, prev] = 1.0
        spec = LimitedIsiSpec(1, np.ones((1, 1)), out_kernel, Alphabet(2),
                              Alphabet(2), Alphabet(2),
                              init1=np.array([1.0, 0.0]))
        ch = limited_isi_to_fsmac(spec)
        n = 3
        law = channel_causal_law(ch, n=n)
        U1 = CausalKernel.uniform(1, n, ch.in1, ch.out)
        U2 = CausalKernel.uniform(2, n, ch.in2, ch.out)
        from fsmac.dirinfo import directed_info

        total = directed_info(joint_law(U1, U2, law), "x1x2").total
        assert np.isclose(total, n - 1)


class TestSpecFiles:
    def test_round_trip_kernel(self):
        ch = gilbert_elliott_mac(0.25, 0.4, 0.12, 0.3)
        d = channel_to_dict(ch)
        back = channel_from_dict(json.loads(json.dumps(d)))
        assert np.abs(back.kernel - ch.kernel).max() == 0.0

    def test_builder_reconstruction(self):
        d = {"builder": {"kind": "gilbert_elliott", "alpha": 0.2, "beta": 0.3,
                         "p_good": 0.05, "p_bad": 0.4}}
        ch = channel_from_dict(d)
        assert np.abs(ch.kernel - gilbert_elliott_mac(0.2, 0.3, 0.05, 0.4).kernel
                      ).max() == 0.0

    def test_malformed_rejected(self):
        with pytest.raises(SpecError):
            channel_from_dict({"alphabets": {"s": 1, "x1": 2, "x2": 2, "y": 2},
                               "kernel": [0.5, 0.5]})


class TestFeedbackFn:
    def test_perfect_and_null(self):
        out = Alphabet(3)
        assert FeedbackFn.perfect(1, out).map == (0, 1, 2)
        assert FeedbackFn.null(1, out).map == (0, 0, 0)

    def test_quantized(self):
        f = FeedbackFn.quantized(1, Alphabet(4), 2)
        assert f.map == (0, 0, 1, 1)
        assert f.range_size == 2
