"""Seeded test corpus shared by the norm tests and the acceptance suite."""

import numpy as np

from morreylorentz import StepFunction, VariableExponent


def random_step(rng, max_pieces=64, gap=True) -> StepFunction:
    k = int(rng.integers(1, max_pieces + 1))
    lengths = rng.uniform(0.05, 2.0, k) * 10 ** rng.uniform(-1.5, 1.5)
    values = rng.uniform(0.0, 3.0, k)
    if gap:
        values[rng.uniform(size=k) < 0.15] = 0.0
    return StepFunction(np.cumsum(lengths), values)


def random_exponent(rng, kind: int, lo=1.2, hi=4.0) -> VariableExponent:
    if kind == 0:
        return VariableExponent.constant(rng.uniform(lo, hi))
    if kind == 1:
        return VariableExponent.two_piece(rng.uniform(lo, hi), rng.uniform(lo, hi))
    return VariableExponent.log_interpolant(rng.uniform(lo, hi), rng.uniform(lo, hi))


def norm_corpus(n=200, seed=2024, max_pieces=16):
    """(phi, p, q) triples mixing constant, two-piece and log-interpolant exponents."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        phi = random_step(rng, max_pieces)
        if phi.is_zero():
            phi = StepFunction([1.0], [1.0])
        out.append((phi, random_exponent(rng, i % 3), random_exponent(rng, (i // 3) % 3)))
    return out
