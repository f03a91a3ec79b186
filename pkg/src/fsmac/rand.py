"""Seeded random instances for property tests and verification suites."""
from __future__ import annotations

import numpy as np

from .channels import FsMac
from .probcore import Alphabet, CausalKernel


def random_fsmac(rng, S: int = 2, A1: int = 2, A2: int = 2, B: int = 2) -> FsMac:
    rows = rng.dirichlet(np.ones(B * S), size=(A1, A2, S))
    return FsMac(Alphabet(S), Alphabet(A1), Alphabet(A2), Alphabet(B),
                 rows.reshape(A1, A2, S, B, S))


def random_markov_fsmac(rng, S: int = 2, A1: int = 2, A2: int = 2, B: int = 2,
                        mix: float = 0.1) -> FsMac:
    """Random channel whose state evolves independently of the inputs; the
    chain is smoothed toward uniform so it is irreducible and aperiodic."""
    chain = (1 - mix) * rng.dirichlet(np.ones(S), size=S) + mix / S
    out = rng.dirichlet(np.ones(B), size=(A1, A2, S))
    kernel = np.einsum("abso,st->absot", out, chain)
    return FsMac(Alphabet(S), Alphabet(A1), Alphabet(A2), Alphabet(B), kernel)


def random_useless_fsmac(rng, S: int = 2, A1: int = 2, A2: int = 2, B: int = 2) -> FsMac:
    """Output distribution depends only on the state, never on the inputs,
    and the state chain ignores the inputs: zero capacity by construction."""
    per_state = rng.dirichlet(np.ones(B * S), size=S)  # P(y, s' | s)
    kernel = np.broadcast_to(per_state.reshape(1, 1, S, B, S),
                             (A1, A2, S, B, S)).copy()
    return FsMac(Alphabet(S), Alphabet(A1), Alphabet(A2), Alphabet(B), kernel)


def random_policy_pair(rng, n: int, channel: FsMac,
                       feedback_size: int | None = None
                       ) -> tuple[CausalKernel, CausalKernel]:
    Z = Alphabet(channel.out.size if feedback_size is None else feedback_size)
    Q1 = CausalKernel.random(1, n, channel.in1, Z, rng)
    Q2 = CausalKernel.random(2, n, channel.in2, Z, rng)
    return Q1, Q2


def random_no_feedback_pair(rng, n: int, channel: FsMac
                            ) -> tuple[CausalKernel, CausalKernel]:
    Z1 = Alphabet(1)
    Q1 = CausalKernel.random(1, n, channel.in1, Z1, rng)
    Q2 = CausalKernel.random(2, n, channel.in2, Z1, rng)
    return Q1, Q2


def random_polygon(rng, k: int = 8, scale: float = 1.0) -> np.ndarray:
    return rng.random((k, 2)) * scale
