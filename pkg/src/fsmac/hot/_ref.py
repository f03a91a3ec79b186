"""Pure-numpy reference implementation of the sweep hot path.

`pair_directed_infos` is the per-policy-pair kernel evaluated many thousands of
times in region and zero-capacity sweeps: build the joint law for one pair of
feedback-mapped input policies and return the three directed informations that
cut out a rate pentagon.
"""
from __future__ import annotations

import numpy as np

_LN2 = np.log(2.0)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def _prefix_entropy(joint, n, a1, a2, b, i1, i2, iy) -> float:
    m = joint.reshape(a1**i1, a1 ** (n - i1), a2**i2, a2 ** (n - i2), b**iy, b ** (n - iy))
    return _entropy(m.sum(axis=(1, 3, 5)))


def pair_sum_info(q1y, q2y, w, n, a1, a2, b):
    """I((X1,X2)->Y) only, in bits; cheaper than the full triple."""
    hist = np.arange(b**n) // b if n > 1 else np.zeros(b, dtype=np.intp)
    joint = q1y[:, hist][:, None, :] * q2y[:, hist][None, :, :] * w
    isum = 0.0
    hy_prev = 0.0
    for i in range(1, n + 1):
        hy_i = _prefix_entropy(joint, n, a1, a2, b, 0, 0, i)
        h12y = _prefix_entropy(joint, n, a1, a2, b, i, i, i)
        h12y_m = _prefix_entropy(joint, n, a1, a2, b, i, i, i - 1)
        isum += (hy_i - hy_prev) - (h12y - h12y_m)
        hy_prev = hy_i
    return isum / _LN2


def pair_directed_infos(q1y, q2y, w, n, a1, a2, b):
    """(I(X1->Y||X2), I(X2->Y||X1), I((X1,X2)->Y)) in bits.

    q1y: (a1**n, b**(n-1) or 1) policy mapped to output-history codes;
    w:   (a1**n, a2**n, b**n) causal channel law.
    """
    hist = np.arange(b**n) // b if n > 1 else np.zeros(b, dtype=np.intp)
    joint = q1y[:, hist][:, None, :] * q2y[:, hist][None, :, :] * w

    hy = [0.0] * (n + 1)
    h1y = [0.0] * (n + 1)
    h1y_m = [0.0] * (n + 1)  # H(X1^i, Y^{i-1})
    h2y = [0.0] * (n + 1)
    h2y_m = [0.0] * (n + 1)
    h12y = [0.0] * (n + 1)
    h12y_m = [0.0] * (n + 1)
    for i in range(1, n + 1):
        hy[i] = _prefix_entropy(joint, n, a1, a2, b, 0, 0, i)
        h1y[i] = _prefix_entropy(joint, n, a1, a2, b, i, 0, i)
        h1y_m[i] = _prefix_entropy(joint, n, a1, a2, b, i, 0, i - 1)
        h2y[i] = _prefix_entropy(joint, n, a1, a2, b, 0, i, i)
        h2y_m[i] = _prefix_entropy(joint, n, a1, a2, b, 0, i, i - 1)
        h12y[i] = _prefix_entropy(joint, n, a1, a2, b, i, i, i)
        h12y_m[i] = _prefix_entropy(joint, n, a1, a2, b, i, i, i - 1)

    i1cc = i2cc = isum = 0.0
    for i in range(1, n + 1):
        cond_y = hy[i] - hy[i - 1]
        cond_1 = h1y[i] - h1y_m[i]
        cond_2 = h2y[i] - h2y_m[i]
        cond_12 = h12y[i] - h12y_m[i]
        i1cc += cond_2 - cond_12
        i2cc += cond_1 - cond_12
        isum += cond_y - cond_12
    return i1cc / _LN2, i2cc / _LN2, isum / _LN2
