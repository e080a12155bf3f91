import math

import numpy as np
import pytest

from morreylorentz import StepFunction, VariableExponent
from morreylorentz.errors import DomainError, HypothesisError, PreconditionError
from morreylorentz.operators import (
    ApproxKernel,
    OmegaKernel,
    bochner_majorant_operator,
    bochner_riesz_first_form,
    bochner_riesz_majorant,
    calderon_S,
    dominated_convolution,
    hardy_calH,
    hardy_H,
    hilbert_step,
    identity_approx,
    identity_sup,
    marcinkiewicz_F,
    marcinkiewicz_mu,
    maximal_1d,
    maximal_2d,
    omega_check,
)
from morreylorentz.signal import GridFunction2D, LineStep, double_star, rearrange

from corpus import random_step
from oracles import maximal_oracle

CHI = StepFunction.characteristic(1.0)
ZERO = StepFunction([1.0], [0.0])
LCHI = LineStep.characteristic(0.0, 1.0)
COS = OmegaKernel("cos")


# -- Hardy and Calderon ------------------------------------------------------------


@pytest.mark.parametrize("beta", [-0.5, 0.0, 0.3, 0.9])
def test_hardy_H_characteristic(beta):
    for t in (0.01, 0.5, 1.0):
        assert hardy_H(CHI, beta, t) == pytest.approx(1 / (1 - beta), rel=1e-12)


def test_hardy_H_examples():
    assert hardy_H(ZERO, 0.2, 0.7) == 0.0
    assert hardy_H(CHI, 0.0, 2.0) == pytest.approx(0.5, rel=1e-14)


def test_hardy_H_beta_zero_is_double_star():
    rng = np.random.default_rng(3)
    ts = np.geomspace(1e-3, 1e3, 50)
    for _ in range(20):
        fs = rearrange(random_step(rng, 12))
        np.testing.assert_allclose(hardy_H(fs, 0.0, ts), double_star(fs, ts), rtol=1e-12, atol=0)


def test_hardy_H_matches_quadrature():
    from scipy import integrate

    phi = StepFunction([0.5, 1.0, 3.0], [2.0, 1.0, 0.5])
    beta = VariableExponent.two_piece(0.3, 0.6)
    for t in (0.3, 2.0, 5.0):
        pts = [x for x in (0.5, 1.0, 3.0) if x < t]
        val = integrate.quad(lambda s: phi(s) * s ** -beta(s), 0, t, points=pts, limit=200)[0]
        assert hardy_H(phi, beta, t) == pytest.approx(t ** (beta(t) - 1) * val, rel=1e-8)


def test_hardy_calH_examples():
    for beta in (0.25, 1.0, 2.0):
        for t in (0.1, 0.5, 0.9):
            assert hardy_calH(CHI, beta, t) == pytest.approx((1 - t**beta) / beta, rel=1e-12)
    assert hardy_calH(CHI, 0.5, 3.0) == 0.0
    assert hardy_calH(CHI, 0.0, 0.5) == pytest.approx(math.log(2), rel=1e-14)


def test_hardy_rejects_nonpositive_t():
    with pytest.raises(DomainError):
        hardy_H(CHI, 0.0, 0.0)


def test_calderon_examples():
    assert calderon_S(CHI, 0.5) == pytest.approx(0.5 + math.log(2), rel=1e-14)
    assert calderon_S(CHI, 1.0) == pytest.approx(1.0)
    assert calderon_S(CHI, 7.0) == pytest.approx(1.0)
    assert calderon_S(StepFunction([], []), 0.3) == 0.0


def test_calderon_averaged_is_hardy_sum():
    fs = rearrange(StepFunction([0.5, 1.0, 2.0], [3.0, 1.0, 2.0]))
    ts = np.geomspace(0.01, 10, 30)
    np.testing.assert_allclose(calderon_S(fs, ts, averaged=True),
                               hardy_H(fs, 0.0, ts) + hardy_calH(fs, 0.0, ts), rtol=1e-12)


# -- maximal, Hilbert, dominated ------------------------------------------------------


def test_maximal_1d_examples():
    assert maximal_1d(LCHI, 0.5) == pytest.approx(1.0)
    assert maximal_1d(LCHI, 2.0) == pytest.approx(0.25, rel=1e-14)
    assert maximal_1d(LineStep([0.0, 1.0], [0.0]), 0.3) == 0.0
    xs = np.array([1.5, 3.0, -4.0])
    np.testing.assert_allclose(maximal_1d(LCHI, xs), 1 / (2 * np.where(xs > 1, xs, 1 - xs)), rtol=1e-13)


def test_maximal_1d_matches_oracle():
    rng = np.random.default_rng(9)
    for _ in range(15):
        f = random_step(rng, 10).to_line()
        xs = rng.uniform(-2, f.support[1] + 2, 20)
        got = maximal_1d(f, xs)
        for x, g in zip(xs, got):
            crit = np.abs(x - f.edges)
            radii = np.union1d(crit[crit > 0], np.geomspace(1e-4, 1e3, 2000))
            want = maximal_oracle(f.edges, f.values, x, radii)
            assert g >= want * (1 - 1e-9)
            assert g == pytest.approx(want, rel=1e-3)


def test_hilbert_examples():
    assert hilbert_step(LCHI, 2.0) == pytest.approx(math.log(2) / math.pi, rel=1e-14)
    assert hilbert_step(LCHI, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert hilbert_step(LCHI, -1.0) == pytest.approx(-math.log(2) / math.pi, rel=1e-14)
    with pytest.raises(DomainError):
        hilbert_step(LCHI, 1.0)


def test_hilbert_matches_principal_value_quadrature():
    from scipy import integrate

    f = LineStep([-1.0, 0.5, 2.0], [2.0, -1.0])
    x = 0.2
    pv = sum(v * integrate.quad(lambda y: 1.0, a, b, weight="cauchy", wvar=x)[0]
             for a, b, v in ((-1.0, 0.5, 2.0), (0.5, 2.0, -1.0)))
    assert hilbert_step(f, x) == pytest.approx(-pv / math.pi, rel=1e-10)


def test_dominated_1d():
    assert dominated_convolution(LCHI, 2.0) == pytest.approx(math.log(2), rel=1e-14)
    assert dominated_convolution(LCHI, 2.0, omega=3.0, c0=0.5) == pytest.approx(1.5 * math.log(2))
    assert dominated_convolution(LineStep([0.0, 1.0], [0.0]), 0.5) == 0.0
    with pytest.raises(DomainError):
        dominated_convolution(LCHI, 0.5)
    with pytest.raises(DomainError):
        dominated_convolution(LCHI, 1.2, exclusion=0.5)


@pytest.mark.parametrize("R", [10.0, 20.0, 50.0])
def test_dominated_2d_far_field(R):
    g = GridFunction2D.characteristic_square(1.0)
    got = dominated_convolution(g, np.array([0.5 + R, 0.5]))
    assert got == pytest.approx(1.0 / R**2, rel=0.1)


def test_dominated_2d_inside_support_raises():
    g = GridFunction2D.characteristic_square(1.0)
    with pytest.raises(DomainError):
        dominated_convolution(g, np.array([0.5, 0.5]))


# -- identity approximation and Bochner-Riesz ----------------------------------------


def test_identity_approx_examples():
    P = ApproxKernel("poisson")
    assert identity_approx(LCHI, P, 1.0, 0.5) == pytest.approx(2 / math.pi * math.atan(0.5), rel=1e-14)
    assert identity_approx(LCHI, P, 1e-9, 0.5) == pytest.approx(1.0, abs=1e-8)
    assert identity_approx(LineStep([0.0, 1.0], [0.0]), P, 1.0, 0.5) == 0.0
    G = ApproxKernel("gaussian")
    assert identity_approx(LCHI, G, 1.0, 0.5) == pytest.approx(math.erf(0.5 / math.sqrt(2)), rel=1e-13)
    with pytest.raises(DomainError):
        identity_approx(LCHI, P, 0.0, 0.5)


@pytest.mark.parametrize("family", ["poisson", "gaussian"])
def test_kernel_unit_mass(family):
    k = ApproxKernel(family)
    assert float(k.mass(-np.inf, np.inf)) == pytest.approx(1.0, abs=1e-12)


def test_identity_sup_below_maximal():
    f = LineStep([0.0, 0.3, 1.0, 2.5], [1.0, 4.0, 0.5])
    xs = np.linspace(-3, 5, 41) + 1e-3
    for fam in ("poisson", "gaussian"):
        ratio = identity_sup(f, ApproxKernel(fam), xs) / maximal_1d(f, xs)
        assert ratio.max() < 2.0


def test_bochner_examples():
    rng = np.random.default_rng(0)
    r = rng.uniform(0.01, 10, 1000)
    x = rng.uniform(0.01, 10, 1000)
    n = rng.integers(1, 5, 1000)
    d = (n - 1) / 2 + rng.uniform(0.01, 3, 1000)
    v = bochner_riesz_majorant(r, x, d, n)
    assert np.all(v <= x ** (-n.astype(float)))
    np.testing.assert_allclose(v, bochner_riesz_first_form(r, x, d, n), rtol=1e-12)
    for n_, d_ in ((1, 0.5), (2, 1.0), (3, 2.5)):
        assert bochner_riesz_majorant(2.0, 2.0, d_, n_) == pytest.approx(
            2.0 ** -(d_ + (n_ + 1) / 2) * 2.0**-n_, rel=1e-13)
    big = 1e8
    e = 1.5 - 0.5
    assert bochner_riesz_majorant(1.0, big, 1.5, 2) * big ** (2 + e) == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(HypothesisError):
        bochner_riesz_majorant(1.0, 1.0, 0.5, 2)


def test_bochner_operator_bounded_by_dominated():
    f = LineStep.characteristic(0.0, 1.0)
    xs = np.array([2.0, 3.0, -5.0])
    assert np.all(bochner_majorant_operator(f, xs, 0.5) <= dominated_convolution(f, xs) * (1 + 1e-12))
    with pytest.raises(HypothesisError):
        bochner_majorant_operator(f, xs, 0.0)


# -- Omega ---------------------------------------------------------------------------


def test_omega_check_examples():
    rep = omega_check(COS, 1024)
    assert rep.mean_zero and rep.lipschitz and rep.passed
    assert rep.lip_estimate <= 1 + 1e-6
    one = omega_check(OmegaKernel("constant", (1.0,)))
    assert not one.mean_zero and abs(one.mean_value - 1.0) < 1e-12
    for g in (1.0, 0.5, 0.1):
        jump = omega_check(OmegaKernel("sign-split", (1.0, -1.0), lip_gamma=g, lip_constant=100.0))
        assert jump.mean_zero and not jump.lipschitz
    with pytest.raises(DomainError):
        omega_check(COS, 8)


def test_mean_nonzero_omega_is_refused():
    g = GridFunction2D.characteristic_square(1.0)
    with pytest.raises(PreconditionError):
        marcinkiewicz_mu(g, OmegaKernel("constant", (1.0,)), np.array([3.0, 0.5]))


# -- Marcinkiewicz -------------------------------------------------------------------


def _F_oracle(x, t, n=200000):
    """Polar rule with exact ray/square intersection for chi of the unit square, Omega = cos."""
    th = 2 * np.pi * (np.arange(n) + 0.5) / n
    dx, dy = -np.cos(th), -np.sin(th)  # y = x + rho * (dx, dy), angle of x - y is th
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.full(n, 0.0)
        hi = np.full(n, t)
        for c, d in ((x[0], dx), (x[1], dy)):
            a1 = (0.0 - c) / d
            a2 = (1.0 - c) / d
            inner_lo = np.where(d != 0, np.minimum(a1, a2), np.where((c > 0) & (c < 1), -np.inf, np.inf))
            inner_hi = np.where(d != 0, np.maximum(a1, a2), np.where((c > 0) & (c < 1), np.inf, -np.inf))
            lo = np.maximum(lo, inner_lo)
            hi = np.minimum(hi, inner_hi)
    length = np.maximum(hi - lo, 0.0)
    return float((np.cos(th) * length).sum() * 2 * np.pi / n)


@pytest.mark.parametrize("x,t", [((2.5, 0.5), 2.0), ((2.5, 0.5), 5.0), ((-1.0, 2.0), 3.0)])
def test_marcinkiewicz_F_matches_oracle(x, t):
    g = GridFunction2D.characteristic_square(1.0, m=4)
    got = marcinkiewicz_F(g, COS, t, np.array(x))
    want = _F_oracle(np.array(x), t)
    assert got == pytest.approx(want, rel=0.01)


def test_marcinkiewicz_zero_and_symmetric():
    z = GridFunction2D((0.0, 0.0), 1.0, np.zeros((4, 4)))
    assert marcinkiewicz_mu(z, COS, np.array([3.0, 0.0])) == 0.0
    # a ring of cells symmetric about the centre cell
    v = np.ones((5, 5))
    v[2, 2] = 0.0
    g = GridFunction2D((0.0, 0.0), 5.0, v)
    centre = np.array([2.5, 2.5])
    far = marcinkiewicz_F(g, COS, 10.0, np.array([8.0, 2.5]))
    assert abs(marcinkiewicz_F(g, COS, 10.0, centre)) <= 0.01 * abs(far)


def test_marcinkiewicz_homogeneity_and_domination():
    rng = np.random.default_rng(5)
    g = GridFunction2D((0.0, 0.0), 1.0, rng.uniform(-1, 1, (4, 4)))
    pts = np.array([[2.0, 0.3], [-1.5, 1.5], [0.5, 4.0]])
    mu = marcinkiewicz_mu(g, COS, pts)
    np.testing.assert_allclose(marcinkiewicz_mu(g.scaled(3.5), COS, pts), 3.5 * mu, rtol=1e-6)
    dom = dominated_convolution(g.scaled(1.0), pts, omega=COS)
    assert np.all(mu <= 10 * dom)


def test_maximal_2d_examples():
    c = GridFunction2D((0.0, 0.0), 1.0, np.full((6, 6), 2.5))
    np.testing.assert_allclose(maximal_2d(c), 2.5, rtol=1e-14)
    v = np.zeros((7, 7))
    v[3, 3] = 4.0
    assert maximal_2d(GridFunction2D((0.0, 0.0), 1.0, v), (3, 3)) == pytest.approx(4.0)


def test_maximal_2d_refinement_monotone():
    rng = np.random.default_rng(2)
    g = GridFunction2D((0.0, 0.0), 1.0, rng.uniform(0, 1, (12, 12)))
    coarse = maximal_2d(g)
    fine = maximal_2d(g, refine=1)
    assert np.all(fine >= coarse)
    assert np.all(coarse >= np.abs(g.values) - 1e-15)
