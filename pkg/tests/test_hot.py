import numpy as np
import pytest

from fsmac import hot
from fsmac.channels import gilbert_elliott_mac
from fsmac.dirinfo import directed_info, directed_info_cc
from fsmac.hot import _ref
from fsmac.probcore import CausalKernel, channel_causal_law, joint_law

try:
    from fsmac.hot import _fast
except ImportError:
    _fast = None

needs_compiled = pytest.mark.skipif(_fast is None,
                                    reason="compiled backend not built")


def _case(channel, n, seed):
    rng = np.random.default_rng(seed)
    Q1 = CausalKernel.random(1, n, channel.in1, channel.out, rng)
    Q2 = CausalKernel.random(2, n, channel.in2, channel.out, rng)
    law = channel_causal_law(channel, s0=0, n=n)
    q1y = np.ascontiguousarray(Q1.history_tensor_for_output(None, channel.out))
    q2y = np.ascontiguousarray(Q2.history_tensor_for_output(None, channel.out))
    W = np.ascontiguousarray(law.tensor)
    args = (q1y, q2y, W, n, channel.in1.size, channel.in2.size, channel.out.size)
    joint = joint_law(Q1, Q2, law)
    return args, joint


class TestReferenceBackend:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_joint_law(self, bern01_channel, n):
        args, joint = _case(bern01_channel, n, seed=n)
        i1, i2, i12 = _ref.pair_directed_infos(*args)
        assert np.isclose(i1, directed_info_cc(joint, "x1").total, atol=1e-10)
        assert np.isclose(i2, directed_info_cc(joint, "x2").total, atol=1e-10)
        assert np.isclose(i12, directed_info(joint, "x1x2").total, atol=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sum_info_matches_triple(self, bern01_channel, n):
        args, _ = _case(bern01_channel, n, seed=10 + n)
        _, _, i12 = _ref.pair_directed_infos(*args)
        assert np.isclose(_ref.pair_sum_info(*args), i12, atol=1e-12)

    def test_stateful_channel(self):
        ch = gilbert_elliott_mac(0.3, 0.2, 0.05, 0.4)
        args, joint = _case(ch, 2, seed=5)
        i1, _, i12 = _ref.pair_directed_infos(*args)
        assert np.isclose(i1, directed_info_cc(joint, "x1").total, atol=1e-10)
        assert np.isclose(i12, directed_info(joint, "x1x2").total, atol=1e-10)


@needs_compiled
class TestCompiledParity:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_triple_parity(self, bern01_channel, n):
        args, _ = _case(bern01_channel, n, seed=20 + n)
        ref = _ref.pair_directed_infos(*args)
        fast = _fast.pair_directed_infos(*args)
        assert np.abs(np.asarray(ref) - np.asarray(fast)).max() < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sum_parity(self, bern01_channel, n):
        args, _ = _case(bern01_channel, n, seed=30 + n)
        assert abs(_ref.pair_sum_info(*args) - _fast.pair_sum_info(*args)) < 1e-12

    def test_parity_stateful(self):
        ch = gilbert_elliott_mac(0.25, 0.35, 0.1, 0.45)
        args, _ = _case(ch, 3, seed=40)
        ref = _ref.pair_directed_infos(*args)
        fast = _fast.pair_directed_infos(*args)
        assert np.abs(np.asarray(ref) - np.asarray(fast)).max() < 1e-12


def test_active_backend_exported():
    assert hot.BACKEND in ("python", "compiled")
    args, _ = _case(gilbert_elliott_mac(0.2, 0.3, 0.1, 0.4), 2, seed=50)
    active = hot.pair_directed_infos(*args)
    assert np.abs(np.asarray(active) - np.asarray(_ref.pair_directed_infos(*args))
                  ).max() < 1e-12
