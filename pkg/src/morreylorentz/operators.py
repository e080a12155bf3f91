"""Operators acting on step functions and grid functions.

One-dimensional operators take a :class:`LineStep` (a :class:`StepFunction`
is promoted to one on [0, inf)) and are vectorized over evaluation points.
Everything with a closed form uses it; the planar singular integrals go
through the ray kernels in :mod:`._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import ndtr

from . import _kernels
from ._quad import FLOOR_RATIO, gauss_legendre, power_integral
from .errors import DivergenceError, DomainError, HypothesisError, PreconditionError
from .exponent import VariableExponent, WeightExponent
from .signal import GridFunction2D, LineStep, StepFunction, as_line, split_pieces

MEAN_ZERO_TOL = 1e-8
QUAD_RTOL_2D = 0.01
DOMINATED_RTOL = 0.005
BASE_ANGLES = 256
BASE_TSTEPS = 128
MAX_2D_REFINE = 5


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


# -- angular kernels -----------------------------------------------------------------

OMEGA_KINDS = ("cos", "sin", "cos-k", "sign-split", "constant", "tabulated")


@dataclass(frozen=True)
class OmegaKernel:
    """Degree-zero homogeneous Omega on the plane, stored as a function of angle.

    kinds: ``cos``, ``sin``, ``cos-k`` (params=(k,)), ``sign-split``
    (params=(c_plus, c_minus) on cos > 0 and cos <= 0), ``constant``
    (params=(c,)) and ``tabulated`` (values at equispaced angles, periodic
    linear interpolation).
    """

    kind: str = "cos"
    params: tuple = ()
    lip_gamma: float = 1.0
    lip_constant: float = 1.0
    dimension: int = 2
    table: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in OMEGA_KINDS:
            raise DomainError(f"unknown Omega kind {self.kind!r}")
        if self.dimension != 2:
            raise DomainError("Omega kernels are implemented on the circle only")
        if not (0.0 < self.lip_gamma <= 1.0) or self.lip_constant <= 0:
            raise DomainError("need 0 < lip_gamma <= 1 and lip_constant > 0")
        if self.kind == "tabulated" and len(self.table) < 4:
            raise DomainError("tabulated Omega needs at least 4 samples")

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        if self.kind == "cos":
            out = np.cos(th)
        elif self.kind == "sin":
            out = np.sin(th)
        elif self.kind == "cos-k":
            out = np.cos(self.params[0] * th)
        elif self.kind == "sign-split":
            cp, cm = self.params
            out = np.where(np.cos(th) > 0, cp, cm)
        elif self.kind == "constant":
            out = np.full(th.shape, float(self.params[0]))
        else:
            tab = np.asarray(self.table, dtype=float)
            n = tab.size
            x = np.mod(th, 2 * np.pi) * n / (2 * np.pi)
            i = np.floor(x).astype(int) % n
            frac = x - np.floor(x)
            out = (1 - frac) * tab[i] + frac * tab[(i + 1) % n]
        return _scalar_or_array(out, th)

    def ray_factors(self, n_angles: int, centered: bool = True) -> np.ndarray:
        """Omega(theta_a + pi) for rays at theta_a = 2 pi a / n.

        With ``centered`` the discrete mean is removed so the quadrature rule
        annihilates constants exactly.
        """
        ang = 2 * np.pi * np.arange(n_angles) / n_angles + np.pi
        vals = np.asarray(self(ang), dtype=float)
        return vals - vals.mean() if centered else vals

    def to_config(self) -> dict:
        out = {"kind": self.kind, "lip_gamma": repr(self.lip_gamma),
               "lip_constant": repr(self.lip_constant)}
        if self.params:
            out["params"] = ",".join(repr(float(p)) for p in self.params)
        if self.table:
            out["table"] = ",".join(repr(float(p)) for p in self.table)
        return out


class OmegaReport(NamedTuple):
    homogeneous: bool
    mean_value: float
    mean_zero: bool
    lip_estimate: float
    continuous: bool
    lipschitz: bool

    @property
    def passed(self) -> bool:
        return self.homogeneous and self.mean_zero and self.lipschitz


def omega_check(omega: OmegaKernel, samples: int = 1024) -> OmegaReport:
    """Mean-zero, homogeneity and Lip_gamma checks for an angular kernel.

    Homogeneity holds structurally.  The mean uses the periodic trapezoid rule.
    The Lipschitz estimate is the largest |dOmega| / chord^gamma over all sample
    pairs and over pairs straddling each sample at dyadic separations down to
    2^-40; differences that refuse to shrink with the separation mark a jump.
    """
    if samples < 16:
        raise DomainError("omega_check needs at least 16 samples")
    th = 2 * np.pi * np.arange(samples) / samples
    vals = np.asarray(omega(th), dtype=float)
    mean = float(vals.mean())
    g = omega.lip_gamma
    sub = th[:: max(1, samples // 256)]
    sv = np.asarray(omega(sub), dtype=float)
    d = np.abs(sub[:, None] - sub[None, :])
    chord = 2 * np.sin(0.5 * d)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(chord > 0, np.abs(sv[:, None] - sv[None, :]) / chord**g, 0.0)
    lip = float(ratio.max())
    jumps = 0.0
    for k in range(4, 41, 4):
        delta = 2.0**-k
        a = np.asarray(omega(th - 0.5 * delta), dtype=float)
        b = np.asarray(omega(th + 0.5 * delta), dtype=float)
        diff = np.abs(a - b)
        ch = 2 * math.sin(0.5 * delta)
        lip = max(lip, float(diff.max()) / ch**g)
        jumps = float(diff.max())
    continuous = jumps < 1e-6
    return OmegaReport(True, mean, abs(mean) < MEAN_ZERO_TOL, lip, continuous,
                       continuous and lip <= omega.lip_constant * (1 + 1e-6))


def _require_mean_zero(omega: OmegaKernel):
    rep = omega_check(omega, 1024)
    if not rep.mean_zero:
        raise PreconditionError(
            f"Omega violates the mean-zero condition on the circle (mean {rep.mean_value:.3e})"
        )


@dataclass(frozen=True)
class ApproxKernel:
    """Unit-mass kernel a(y) in one dimension: ``gaussian`` or ``poisson``."""

    family: str = "poisson"
    dimension: int = 1

    def __post_init__(self):
        if self.family not in ("gaussian", "poisson"):
            raise DomainError(f"unknown approximation kernel {self.family!r}")
        if self.dimension != 1:
            raise DomainError("approximation kernels are one-dimensional")

    def density(self, y):
        y = np.asarray(y, dtype=float)
        if self.family == "poisson":
            out = 1.0 / (np.pi * (1.0 + y * y))
        else:
            out = np.exp(-0.5 * y * y) / math.sqrt(2 * np.pi)
        return _scalar_or_array(out, y)

    def mass(self, u, w):
        """Integral of a over (u, w] for arrays u <= w, without cancellation."""
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        if self.family == "poisson":
            return (np.arctan(w) - np.arctan(u)) / np.pi
        # use the upper tail when both ends are positive
        pos = u > 0
        return np.where(pos, ndtr(-u) - ndtr(-w), ndtr(w) - ndtr(u))


# -- weighted Hardy operators ----------------------------------------------------------


def _as_weight(beta) -> WeightExponent:
    if isinstance(beta, WeightExponent):
        return beta
    if isinstance(beta, VariableExponent):
        if beta.is_constant:
            return WeightExponent.constant(beta.p0)
        return beta
    return WeightExponent.constant(float(beta))


def _is_piecewise_constant(beta) -> bool:
    if isinstance(beta, WeightExponent):
        if beta.kind == "constant":
            return True
        return all(e.kind in ("constant", "two-piece") or e.is_constant for e in (beta.p, beta.q))
    return beta.kind in ("constant", "two-piece") or beta.is_constant


class _PowerCells:
    """Cells of phi(s) * s^e(s) with exact head and tail integrals.

    Closed cells carry a constant power; the others use 16-point
    Gauss-Legendre rules in log s, with a frozen power on (0, FLOOR_RATIO * b].
    """

    _WIDTH = 0.5

    def __init__(self, phi: StepFunction, expo, shift: float):
        self.expo = expo
        self.shift = shift
        lo, hi, v = split_pieces(phi, tuple(expo.breakpoints()) + (1.0,))
        if _is_piecewise_constant(expo):
            mid = 0.5 * (lo + hi)
            pw = self._power(mid) if lo.size else lo
            closed = np.ones(lo.size, dtype=bool)
        else:
            cl, ch, cv, cp, cc = [], [], [], [], []
            for a, b, val in zip(lo, hi, v):
                if a == 0.0:
                    floor = b * FLOOR_RATIO
                    cl.append(0.0), ch.append(floor), cv.append(val)
                    cp.append(float(self._power(np.array([floor]))[0])), cc.append(True)
                    a = floor
                k = max(1, int(math.ceil(math.log(b / a) / self._WIDTH - 1e-12)))
                e = np.exp(np.linspace(math.log(a), math.log(b), k + 1))
                e[0], e[-1] = a, b
                cl.extend(e[:-1]), ch.extend(e[1:]), cv.extend([val] * k)
                cp.extend([0.0] * k), cc.extend([False] * k)
            lo, hi, v = np.array(cl), np.array(ch), np.array(cv)
            pw, closed = np.array(cp), np.array(cc, dtype=bool)
        self.lo, self.hi, self.v, self.pw, self.closed = lo, hi, v, pw, closed
        self.full = self._integral(np.arange(lo.size), lo, hi)

    def _power(self, t):
        return -np.asarray(self.expo(t), dtype=float).reshape(np.shape(t)) + self.shift

    def _integral(self, idx, a, b):
        out = np.zeros(idx.size)
        if not idx.size:
            return out
        c = self.closed[idx]
        if np.any(c):
            out[c] = self.v[idx[c]] * power_integral(a[c], b[c], self.pw[idx[c]])
        o = ~c
        if np.any(o):
            x, w = gauss_legendre(16)
            ua = np.log(a[o])[:, None]
            ub = np.log(b[o])[:, None]
            half = 0.5 * (ub - ua)
            u = ua + half * (x[None, :] + 1.0)
            t = np.exp(u)
            vals = np.exp((self._power(t) + 1.0) * u)
            out[o] = self.v[idx[o]] * np.sum(half * w[None, :] * vals, axis=1)
        return out

    def head(self, t):
        """Integral over (0, t] for an array of t > 0."""
        t = np.asarray(t, dtype=float)
        if not self.lo.size:
            return np.zeros(t.shape)
        if not np.isfinite(self.full[0]):
            raise DivergenceError("Hardy integral diverges at 0: s^(-beta(s)) is not integrable")
        cum = np.concatenate(([0.0], np.cumsum(self.full)))
        nfull = np.searchsorted(self.hi, t, side="right")
        out = cum[nfull]
        j = np.minimum(nfull, self.lo.size - 1)
        part = (nfull < self.lo.size) & (self.lo[j] < t)
        if np.any(part):
            out = out.copy()
            out[part] += self._integral(j[part], self.lo[j[part]], t[part])
        return out

    def tail(self, t):
        """Integral over (t, inf) for an array of t > 0."""
        t = np.asarray(t, dtype=float)
        if not self.lo.size:
            return np.zeros(t.shape)
        full = np.where(np.isfinite(self.full), self.full, 0.0)
        suffix = np.concatenate((np.cumsum(full[::-1])[::-1], [0.0]))
        first = np.searchsorted(self.lo, t, side="left")
        out = suffix[first].copy()
        j = first - 1
        part = (j >= 0) & (self.hi[np.maximum(j, 0)] > t)
        if np.any(part):
            jj = j[part]
            out[part] += self._integral(jj, t[part], self.hi[jj])
        return out


def hardy_H(phi: StepFunction, beta, t):
    """t^(beta(t) - 1) * integral_0^t phi(s) s^(-beta(s)) ds."""
    w = _as_weight(beta)
    tt = np.asarray(t, dtype=float)
    if np.any(~(tt > 0)):
        raise DomainError("Hardy operators are evaluated at t > 0")
    cells = _PowerCells(phi, w, 0.0)
    flat = tt.ravel()
    out = cells.head(flat) * np.exp((np.asarray(w(flat)).reshape(flat.shape) - 1.0) * np.log(flat))
    return _scalar_or_array(out.reshape(tt.shape), tt)


def hardy_calH(phi: StepFunction, beta, t):
    """t^beta(t) * integral_t^inf phi(s) s^(-beta(s) - 1) ds."""
    w = _as_weight(beta)
    tt = np.asarray(t, dtype=float)
    if np.any(~(tt > 0)):
        raise DomainError("Hardy operators are evaluated at t > 0")
    cells = _PowerCells(phi, w, -1.0)
    flat = tt.ravel()
    out = cells.tail(flat) * np.exp(np.asarray(w(flat)).reshape(flat.shape) * np.log(flat))
    return _scalar_or_array(out.reshape(tt.shape), tt)


def calderon_S(fstar: StepFunction, t, averaged: bool = False):
    """integral_0^t f* + integral_t^inf f*(s) ds / s.

    With ``averaged`` the head term is the running average f**(t), the form
    in which the two terms become the Hardy operators with beta = 0.
    """
    tt = np.asarray(t, dtype=float)
    if np.any(~(tt > 0)):
        raise DomainError("the Calderon operator is evaluated at t > 0")
    flat = tt.ravel()
    head = np.asarray(fstar.integral(flat), dtype=float).reshape(flat.shape)
    if averaged:
        head = head / flat
    a, b, v = fstar.starts, fstar.breakpoints, fstar.values
    lo = np.maximum(a[None, :], flat[:, None])
    with np.errstate(divide="ignore"):
        tail = np.where(b[None, :] > lo, v[None, :] * np.log(b[None, :] / lo), 0.0).sum(axis=1)
    return _scalar_or_array((head + tail).reshape(tt.shape), tt)


# -- one-dimensional operators on the line -----------------------------------------------


def maximal_1d(f, x):
    """Centered Hardy-Littlewood maximal function, exact for step functions."""
    line = as_line(f)
    xx = np.asarray(x, dtype=float)
    out = _kernels.maximal_1d_many(line.edges, np.abs(line.values), xx.ravel()) if line.values.size \
        else np.zeros(xx.size)
    return _scalar_or_array(out.reshape(xx.shape), xx)


def _nonzero_pieces(line: LineStep):
    nz = line.values != 0
    return line.edges[:-1][nz], line.edges[1:][nz], line.values[nz]


def hilbert_step(f, x):
    """Principal-value Hilbert transform, sum of v/pi * ln|x - a|/|x - b|."""
    line = as_line(f)
    xx = np.asarray(x, dtype=float)
    a, b, v = _nonzero_pieces(line)
    if not v.size:
        return _scalar_or_array(np.zeros(xx.shape), xx)
    # fuse touching pieces so only true jumps are singular
    edges = np.unique(np.concatenate((a, b)))
    vals = np.asarray(line(0.5 * (edges[:-1] + edges[1:])), dtype=float)
    jump = np.concatenate(([True], vals[1:] != vals[:-1], [True]))
    edges = edges[jump]
    vals = np.asarray(line(0.5 * (edges[:-1] + edges[1:])), dtype=float)
    out = _kernels.hilbert_many(edges, vals, xx.ravel())
    if np.any(np.isnan(out)):
        raise DomainError("the Hilbert transform of a step function is singular at its jumps")
    return _scalar_or_array(out.reshape(xx.shape), xx)


def _check_exclusion_1d(line: LineStep, xs: np.ndarray, exclusion: float):
    a, b, _ = _nonzero_pieces(line)
    d = np.maximum(a[None, :] - xs[:, None], xs[:, None] - b[None, :])
    closest = d.min(axis=1) if a.size else np.full(xs.size, np.inf)
    if np.any(closest <= exclusion):
        if exclusion > 0:
            raise DomainError("f does not vanish on the declared neighbourhood of x")
        raise DomainError("x lies in the closed support of f; declare a vanishing neighbourhood")


def dominated_convolution(f, x, omega=None, c0: float = 1.0, exclusion: float = 0.0,
                          refine: int = 0):
    """c0 * integral |Omega(x - y)| / |x - y|^n |f(y)| dy for x away from supp f.

    One dimension: exact, ``omega`` is a constant (default 1).  Two dimensions:
    ``f`` is a :class:`GridFunction2D`, ``x`` an (..., 2) array and ``omega``
    an :class:`OmegaKernel` or constant; the polar rule is exact along rays and
    the angular count doubles until the value moves less than 0.5%.
    """
    if isinstance(f, GridFunction2D):
        return _dominated_2d(f, x, omega, c0, exclusion, refine)
    line = as_line(f)
    xx = np.asarray(x, dtype=float)
    flat = xx.ravel()
    scale = 1.0 if omega is None else abs(float(omega))
    _check_exclusion_1d(line, flat, exclusion)
    a, b, v = _nonzero_pieces(line)
    da = np.abs(flat[:, None] - a[None, :])
    db = np.abs(flat[:, None] - b[None, :])
    out = c0 * scale * (np.abs(v)[None, :] * np.abs(np.log(da / db))).sum(axis=1)
    return _scalar_or_array(out.reshape(xx.shape), xx)


def _omega_abs_factors(omega, n_angles: int) -> np.ndarray:
    if omega is None:
        return np.ones(n_angles)
    if isinstance(omega, OmegaKernel):
        return np.abs(omega.ray_factors(n_angles, centered=False))
    return np.full(n_angles, abs(float(omega)))


def _support_distance(g: GridFunction2D, pts: np.ndarray) -> np.ndarray:
    box = g.support_box()
    if box is None:
        return np.full(pts.shape[0], np.inf)
    dx = np.maximum(np.maximum(box[0] - pts[:, 0], pts[:, 0] - box[1]), 0.0)
    dy = np.maximum(np.maximum(box[2] - pts[:, 1], pts[:, 1] - box[3]), 0.0)
    return np.hypot(dx, dy)


def _dominated_2d(g, x, omega, c0, exclusion, refine):
    pts = np.asarray(x, dtype=float)
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, 2)
    if g.support_box() is None:
        return _scalar_or_array(np.zeros(shape), np.zeros(shape))
    n = BASE_ANGLES * 2**refine
    prev = None
    tg = np.ones((pts.shape[0], 1))
    for _ in range(MAX_2D_REFINE + 1):
        _, dom = _kernels.polar_profiles(g.values, g.origin[0], g.origin[1], g.h, pts,
                                         _omega_abs_factors(omega, n), tg)
        if not np.all(np.isfinite(dom)):
            raise DomainError("x lies in the closed support of g; the kernel integral diverges")
        if prev is not None and np.all(np.abs(dom - prev) <= DOMINATED_RTOL * np.abs(dom)):
            break
        prev = dom
        n *= 2
    if exclusion > 0 and np.any(_support_distance(g, pts) <= exclusion):
        raise DomainError("g does not vanish on the declared neighbourhood of x")
    out = c0 * dom
    return float(out[0]) if shape == () else out.reshape(shape)


def identity_approx(f, kernel: ApproxKernel, eps: float, x):
    """A_eps f(x) = sum over pieces of v * mass of a over ((x-b)/eps, (x-a)/eps]."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    line = as_line(f)
    xx = np.asarray(x, dtype=float)
    flat = xx.ravel()
    a, b, v = _nonzero_pieces(line)
    u = (flat[:, None] - b[None, :]) / eps
    w = (flat[:, None] - a[None, :]) / eps
    out = (kernel.mass(u, w) * v[None, :]).sum(axis=1)
    return _scalar_or_array(out.reshape(xx.shape), xx)


def default_eps_grid(f, n: int = 16) -> np.ndarray:
    """Log-spaced eps from 1e-3 to 1e3 times the support length."""
    a, b = as_line(f).support
    s = max(b - a, 1e-300)
    return s * np.logspace(-3.0, 3.0, n)


def identity_sup(f, kernel: ApproxKernel, x, eps_grid=None):
    """max over the eps-grid of |A_eps f(x)|."""
    grid = default_eps_grid(f) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    xx = np.asarray(x, dtype=float)
    best = np.zeros(xx.size)
    for e in grid:
        best = np.maximum(best, np.abs(np.asarray(identity_approx(f, kernel, float(e), xx.ravel()))))
    return _scalar_or_array(best.reshape(xx.shape), xx)


# -- Bochner-Riesz kernel majorant ----------------------------------------------------


def bochner_riesz_majorant(r, xnorm, delta, n: int):
    """(r/(r+|x|))^(delta-(n-1)/2) * (r+|x|)^(-n)."""
    r = np.asarray(r, dtype=float)
    xn = np.asarray(xnorm, dtype=float)
    d = np.asarray(delta, dtype=float)
    nn = np.asarray(n, dtype=float)
    if np.any(d <= (nn - 1) / 2):
        raise HypothesisError("the Bochner-Riesz majorant needs delta > (n - 1)/2")
    if np.any(r <= 0) or np.any(xn <= 0):
        raise DomainError("r and |x| must be positive")
    s = r + xn
    out = np.exp((d - (nn - 1) / 2) * np.log(r / s) - nn * np.log(s))
    return float(out) if out.ndim == 0 else out


def bochner_riesz_first_form(r, xnorm, delta, n: int):
    """r^(-n) (1 + |x|/r)^(-(delta + (n+1)/2)), the majorant's other closed form."""
    r = np.asarray(r, dtype=float)
    xn = np.asarray(xnorm, dtype=float)
    out = np.exp(-n * np.log(r) - (delta + (n + 1) / 2) * np.log1p(xn / r))
    return float(out) if out.ndim == 0 else out


def bochner_majorant_operator(f, x, delta: float, r_grid=None):
    """sup over r of the 1D majorant convolved with |f|.

    In one dimension the kernel is r^delta (r + |y|)^(-delta-1), whose
    integral over a piece at distances [u1, u2] from x is
    ((r/(r+u1))^delta - (r/(r+u2))^delta) / delta.
    """
    if delta <= 0:
        raise HypothesisError("the one-dimensional majorant needs delta > 0")
    line = as_line(f)
    grid = default_eps_grid(f) if r_grid is None else np.asarray(r_grid, dtype=float)
    xx = np.asarray(x, dtype=float)
    flat = xx.ravel()
    a, b, v = _nonzero_pieces(line)
    # distances of each piece from x, split where x lies inside a piece
    u1 = np.maximum(0.0, np.maximum(a[None, :] - flat[:, None], flat[:, None] - b[None, :]))
    far = np.maximum(np.abs(flat[:, None] - a[None, :]), np.abs(flat[:, None] - b[None, :]))
    inside = (flat[:, None] > a[None, :]) & (flat[:, None] < b[None, :])
    near = np.minimum(np.abs(flat[:, None] - a[None, :]), np.abs(flat[:, None] - b[None, :]))
    av = np.abs(v)[None, :]
    best = np.zeros(flat.size)
    for r in grid:
        def mass(p, q):
            return ((r / (r + p)) ** delta - (r / (r + q)) ** delta) / delta

        side = np.where(inside, mass(0.0, near) + mass(0.0, far), mass(u1, far))
        best = np.maximum(best, (av * side).sum(axis=1))
    return _scalar_or_array(best.reshape(xx.shape), xx)


# -- planar operators -------------------------------------------------------------------


def maximal_2d(g: GridFunction2D, cell=None, per_octave: int = 4, refine: int = 0):
    """Discrete centered maximal function over lattice disks.

    Radii run over h * 2^(k / per_octave) from one cell width up to the
    grid diameter; ``refine`` doubles per_octave, which only adds radii.
    """
    po = per_octave * 2**refine
    diam = math.sqrt(2.0) * g.m
    kmax = int(math.ceil(po * math.log2(diam))) + 1
    radii = 2.0 ** (np.arange(kmax + 1) / po)
    out = _kernels.disk_maxima(g.values, radii)
    if cell is None:
        return out
    i, j = cell
    return float(out[i, j])


def _mu_tgrid(g: GridFunction2D, pts: np.ndarray, nt: int):
    """Per-point log t-grid on [t0, T] and the window ends.

    Below t0 every ray still sits in x's own cell (or has not reached the
    support), so F vanishes there; above T every disk covers the support.
    """
    box = g.support_box()
    x0, y0 = g.origin
    h = g.h
    d_support = _support_distance(g, pts)
    fx = (pts[:, 0] - x0) / h
    fy = (pts[:, 1] - y0) / h
    in_dom = (fx > 0) & (fx < g.m) & (fy > 0) & (fy < g.m)
    d_cell = h * np.minimum(np.minimum(fx - np.floor(fx), np.ceil(fx) - fx),
                            np.minimum(fy - np.floor(fy), np.ceil(fy) - fy))
    t0 = np.where(d_support > 0, d_support, np.where(in_dom, d_cell, 0.0))
    if np.any(t0 <= 0):
        raise DomainError("x lies on a grid line of g inside its support; the square function diverges")
    cx = np.array([box[0], box[1], box[0], box[1]])
    cy = np.array([box[2], box[2], box[3], box[3]])
    T = np.hypot(pts[:, :1] - cx[None, :], pts[:, 1:] - cy[None, :]).max(axis=1)
    T = np.maximum(T, t0 * (1 + 1e-9))
    frac = np.linspace(0.0, 1.0, nt)
    tg = np.exp(np.log(t0)[:, None] + np.log(T / t0)[:, None] * frac[None, :])
    return tg, T


def _mu_from_profile(F: np.ndarray, tg: np.ndarray, T: np.ndarray) -> np.ndarray:
    """sqrt of the integral of F^2 / t^3 with F linear between grid points."""
    t1, t2 = tg[:, :-1], tg[:, 1:]
    f1, f2 = F[:, :-1], F[:, 1:]
    b = (f2 - f1) / (t2 - t1)
    a = f1 - b * t1
    seg = (0.5 * a * a * (1.0 / t1**2 - 1.0 / t2**2) + 2.0 * a * b * (1.0 / t1 - 1.0 / t2)
           + b * b * np.log(t2 / t1))
    total = seg.sum(axis=1) + F[:, -1] ** 2 / (2.0 * T**2)
    return np.sqrt(np.maximum(total, 0.0))


def marcinkiewicz_F(g: GridFunction2D, omega: OmegaKernel, t, x, refine: int = 0):
    """F_t(x) = integral over |x-y| <= t of Omega(x-y)/|x-y| g(y) dy (n = 2)."""
    _require_mean_zero(omega)
    pts = np.asarray(x, dtype=float).reshape(-1, 2)
    tt = np.broadcast_to(np.asarray(t, dtype=float), (pts.shape[0],)).reshape(-1, 1)
    if np.any(tt <= 0):
        raise DomainError("t must be positive")
    n = BASE_ANGLES * 2**refine
    prev = None
    for _ in range(MAX_2D_REFINE + 1):
        F, _ = _kernels.polar_profiles(g.values, g.origin[0], g.origin[1], g.h, pts,
                                       omega.ray_factors(n), tt)
        cur = F[:, 0]
        scale = np.max(np.abs(cur)) if cur.size else 0.0
        if prev is not None and np.all(np.abs(cur - prev) <= QUAD_RTOL_2D * max(scale, 1e-300)):
            break
        prev = cur
        n *= 2
    out = cur
    return float(out[0]) if np.ndim(x) == 1 else out


def marcinkiewicz_mu(g: GridFunction2D, omega: OmegaKernel, x, refine: int = 0,
                     return_dominated: bool = False):
    """Square function (integral of |F_t|^2 dt / t^3)^(1/2) at points x.

    Angles and t-steps double together until every value moves less than 1%.
    With ``return_dominated`` the matching |Omega| / |x-y|^2 integral from the
    same rays is returned as well.
    """
    _require_mean_zero(omega)
    pts = np.asarray(x, dtype=float)
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, 2)
    if g.support_box() is None:
        mu = np.zeros(shape)
        out = float(mu) if shape == () else mu
        return (out, out) if return_dominated else out
    na = BASE_ANGLES * 2**refine
    nt = BASE_TSTEPS * 2**refine
    prev = None
    for _ in range(MAX_2D_REFINE + 1):
        tg, T = _mu_tgrid(g, pts, nt)
        F, dom = _kernels.polar_profiles(g.values, g.origin[0], g.origin[1], g.h, pts,
                                         omega.ray_factors(na), tg)
        mu = _mu_from_profile(F, tg, T)
        scale = np.max(mu) if mu.size else 0.0
        if prev is not None and np.all(np.abs(mu - prev) <= QUAD_RTOL_2D * max(scale, 1e-300)):
            break
        prev = mu
        na *= 2
        nt *= 2
    if shape == ():
        return (float(mu[0]), float(dom[0])) if return_dominated else float(mu[0])
    return (mu.reshape(shape), dom.reshape(shape)) if return_dominated else mu.reshape(shape)
