import json
import math

import numpy as np
import pytest
from scipy import integrate, optimize

from morreylorentz import (
    ExponentPair,
    StepFunction,
    VariableExponent,
    WeightExponent,
    lebesgue_norm,
    local_morrey_norm,
    luxemburg_norm,
    modular,
    morrey_lorentz_quasinorm,
    rearrange,
    variable_lorentz_norm,
)
from morreylorentz.errors import DivergenceError, DomainError
from morreylorentz.norms import NormResult

from corpus import norm_corpus, random_step

GOLDEN = (1 + math.sqrt(5)) / 2
C2 = VariableExponent.constant(2.0)


def chi(m, value=1.0):
    return StepFunction.characteristic(m, value)


def quad_modular(phi, p, scale=1.0, weight=None, r=None):
    """Independent oracle: scipy quad over each piece with breaks at 1."""
    end = phi.support_end if r is None else min(r, phi.support_end)
    total = 0.0
    for a, b, v in zip(phi.starts, phi.breakpoints, phi.values):
        if v == 0 or a >= end:
            continue
        b = min(b, end)

        def f(s):
            w = 1.0 if weight is None else s ** weight(s)
            return (v * w / scale) ** p(s)

        pts = [x for x in (1.0,) if a < x < b]
        total += integrate.quad(f, a, b, points=pts or None, epsabs=0, epsrel=1e-12, limit=200)[0]
    return total


def test_modular_closed_forms():
    assert modular(chi(3.0, 2.0), VariableExponent.constant(1.5)) == pytest.approx(2.0**1.5 * 3.0, rel=1e-13)
    assert modular(StepFunction([1.0], [0.0]), C2) == 0.0
    p = VariableExponent.two_piece(1.0, 2.0)
    for lam in (0.5, 1.0, 2.5):
        assert modular(chi(2.0), p, scale=lam) == pytest.approx(1 / lam + 1 / lam**2, rel=1e-13)


def test_modular_truncated():
    p = VariableExponent.constant(3.0)
    assert modular(chi(2.0, 2.0), p, r=0.5) == pytest.approx(8 * 0.5, rel=1e-13)


def test_modular_variable_matches_quad():
    rng = np.random.default_rng(11)
    p = VariableExponent.log_interpolant(3.0, 1.5)
    for _ in range(10):
        phi = random_step(rng, 6)
        got = modular(phi, p, scale=1.7)
        assert got == pytest.approx(quad_modular(phi, p, 1.7), rel=1e-8)


def test_luxemburg_golden_values():
    assert luxemburg_norm(chi(2.0), VariableExponent.two_piece(1.0, 2.0)).value == pytest.approx(GOLDEN, rel=1e-12)
    rng = np.random.default_rng(1)
    for _ in range(50):
        c, m, p = rng.uniform(0.1, 10), rng.uniform(0.1, 10), rng.uniform(0.5, 6)
        got = luxemburg_norm(chi(m, c), VariableExponent.constant(p)).value
        assert got == pytest.approx(c * m ** (1 / p), rel=1e-12)
    assert luxemburg_norm(StepFunction([], []), C2).value == 0.0


def test_luxemburg_post_verification():
    p = VariableExponent.log_interpolant(1.3, 3.1)
    for phi, _, _ in norm_corpus(30, seed=4):
        n = luxemburg_norm(phi, p).value
        assert modular(phi, p, scale=n) <= 1.0
        assert modular(phi, p, scale=n * (1 - 1e-6)) > 1.0


def test_luxemburg_matches_brentq_oracle():
    p = VariableExponent.log_interpolant(2.5, 1.5)
    phi = StepFunction([0.3, 1.4, 2.0], [2.0, 0.5, 1.0])
    oracle = optimize.brentq(lambda lam: quad_modular(phi, p, lam) - 1.0, 0.01, 100.0, xtol=1e-14)
    assert luxemburg_norm(phi, p).value == pytest.approx(oracle, rel=1e-8)


def test_truncated_norm_monotone_in_r():
    p = VariableExponent.log_interpolant(1.5, 3.0)
    phi = StepFunction([0.5, 1.5, 4.0], [1.0, 3.0, 0.5])
    vals = [luxemburg_norm(phi, p, r).value for r in np.geomspace(0.01, 10, 40)]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(vals, vals[1:]))


def test_local_morrey_examples():
    for q in (1.5, 2.0, 4.0):
        for lam in (0.1, 0.5, 0.9):
            got = local_morrey_norm(chi(1.0), VariableExponent.constant(q), lam).value
            assert got == pytest.approx(1.0, rel=1e-12)
    phi = StepFunction([0.5, 2.0], [3.0, 1.0])
    q = VariableExponent.log_interpolant(1.5, 3.0)
    assert local_morrey_norm(phi, q, 0.0).value == pytest.approx(luxemburg_norm(phi, q).value, rel=1e-10)
    assert local_morrey_norm(StepFunction([], []), C2, 0.5).value == 0.0


def test_local_morrey_brute_force_sup():
    phi = StepFunction([0.2, 0.7, 3.0], [4.0, 1.0, 2.0])
    q = VariableExponent.two_piece(3.0, 1.5)
    lam = 0.4
    rs = np.geomspace(1e-4, 1e3, 3000)
    brute = max(r ** (-lam / (3.0 if r < 1 else 1.5)) * luxemburg_norm(phi, q, r).value for r in rs)
    got = local_morrey_norm(phi, q, lam).value
    assert got >= brute * (1 - 1e-9)
    assert got == pytest.approx(brute, rel=1e-3)


def test_local_morrey_divergence():
    # weight t^-0.6 with q = 2, lambda = 0: kappa = -0.6 + 0.5 < 0
    with pytest.raises(DivergenceError):
        local_morrey_norm(chi(1.0), C2, 0.0, weight=WeightExponent.constant(-0.6))


def test_lorentz_closed_form():
    for p, q in ((2.0, 3.0), (3.0, 1.5), (1.2, 2.0)):
        got = variable_lorentz_norm(chi(1.0), VariableExponent.constant(p), VariableExponent.constant(q)).value
        assert got == pytest.approx((p / q) ** (1 / q), rel=1e-12)


def test_lorentz_equals_lebesgue_when_p_equals_q():
    f = StepFunction([1.0, 2.0, 2.5], [1.0, 3.0, 2.0])
    p = VariableExponent.constant(2.5)
    assert variable_lorentz_norm(f, p, p).value == pytest.approx(lebesgue_norm(rearrange(f), p).value, rel=1e-12)


def test_quasinorm_examples():
    pair = ExponentPair(VariableExponent.constant(3.0), VariableExponent.constant(2.0), 0.5)
    assert morrey_lorentz_quasinorm(chi(1.0), pair).value == pytest.approx(1.5**0.5, rel=1e-12)
    pair0 = ExponentPair(VariableExponent.constant(3.0), VariableExponent.constant(2.0), 0.0)
    f = StepFunction([1.0, 1.5], [2.0, 1.0])
    assert morrey_lorentz_quasinorm(f, pair0).value == pytest.approx(
        variable_lorentz_norm(f, pair0.p, pair0.q).value, rel=1e-10)
    assert morrey_lorentz_quasinorm(StepFunction([], []), pair).value == 0.0


def test_quasinorm_small_p_minus():
    pair = ExponentPair(VariableExponent.constant(0.5), VariableExponent.constant(2.0), 0.2)
    assert morrey_lorentz_quasinorm(chi(1.0), pair).value == pytest.approx(2.0 ** -0.0 * (0.5 / 2.0) ** 0.5, rel=1e-12)


def test_norm_result_serialization():
    r = NormResult(1.25, 1e-12, 3)
    assert json.loads(r.to_json()) == {"value": 1.25, "relError": 1e-12, "refinements": 3}
    assert r.to_csv_row() == "1.25,1e-12,3"
    assert NormResult(math.inf).to_dict()["value"] == "infinite"
    with pytest.raises(DomainError):
        NormResult(-1.0)
