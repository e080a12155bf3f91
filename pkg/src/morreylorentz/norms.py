"""Modulars, Luxemburg norms and the Morrey-type suprema built on them.

Every modular is assembled as a list of log-terms ``(L_j, E_j)`` with

    J(phi / exp(s)) = sum_j exp(L_j - E_j * s),

one term per piece where the exponents are constant there (closed-form power
integral) and one term per Gauss-Legendre node elsewhere.  The Luxemburg norm
is exp(s*) at the root of logsumexp(L - E s) = 0, a convex decreasing function
of s, solved by Newton from the left.  Truncations (0, r] for many r reuse the
same terms as nested prefixes plus one partial cell.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from ._quad import FLOOR_RATIO, gauss_legendre, log_power_integral
from .errors import DivergenceError, DomainError
from .exponent import ExponentPair, VariableExponent, WeightExponent
from .signal import StepFunction, rearrange, split_pieces

MORREY_POINTS = 4096
MORREY_PER_DECADE = 256
MORREY_RTOL = 1e-3
MORREY_MAX_REFINE = 6
LUX_RTOL = 1e-10
# breakpoints of the integrand join the r-grid when there are at most this many
EXACT_BREAK_LIMIT = 128
_GL_MAX = 16
_MAX_NUDGE = 64


@dataclass(frozen=True)
class NormResult:
    value: float
    rel_error: float = 0.0
    refinements: int = 0

    def __post_init__(self):
        if not (self.value >= 0) or not (self.rel_error >= 0):
            raise DomainError("norm values and error estimates are nonnegative")

    def __float__(self) -> float:
        return float(self.value)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> dict:
        value = repr(self.value) if not self.finite else self.value
        return {"value": "infinite" if not self.finite else value,
                "relError": self.rel_error, "refinements": self.refinements}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv_row(self) -> str:
        v = "infinite" if not self.finite else repr(float(self.value))
        return f"{v},{self.rel_error!r},{self.refinements}"


# -- exponent shape helpers -------------------------------------------------------


def _piecewise_constant(expo) -> bool:
    if expo is None:
        return True
    if isinstance(expo, WeightExponent):
        return expo.kind == "constant" or (
            _piecewise_constant(expo.p) and _piecewise_constant(expo.q)
        )
    return expo.kind in ("constant", "two-piece") or expo.is_constant


def _eval(expo, t: np.ndarray) -> np.ndarray:
    if expo is None:
        return np.zeros(t.shape)
    return np.asarray(expo(t), dtype=float).reshape(t.shape)


def _breaks(*expos) -> np.ndarray:
    pts = {1.0}
    for e in expos:
        if e is not None:
            pts.update(e.breakpoints())
    return np.array(sorted(pts))


# -- term assembly ---------------------------------------------------------------


class _Cells(NamedTuple):
    lo: np.ndarray
    hi: np.ndarray
    logv: np.ndarray
    closed: np.ndarray      # bool: one closed-form term
    qc: np.ndarray          # exponent on closed cells
    sc: np.ndarray          # power of t (gamma * q) on closed cells
    nodes: np.ndarray       # Gauss-Legendre order on open cells
    offset: np.ndarray      # first term index of each cell
    L: np.ndarray
    E: np.ndarray


def _gl_order(width_u: np.ndarray) -> np.ndarray:
    return np.where(width_u > 0.25, 16, np.where(width_u > 0.03, 8, 4))


def _gl_terms(lo, hi, logv, order, q, gamma):
    """Log-terms of Gauss-Legendre nodes on the given cells (any orders)."""
    count = order.astype(np.int64)
    total = int(count.sum())
    L = np.empty(total)
    E = np.empty(total)
    pos = np.concatenate(([0], np.cumsum(count)[:-1]))
    for n in np.unique(count):
        sel = np.flatnonzero(count == n)
        x, w = gauss_legendre(int(n))
        ulo = np.log(lo[sel])[:, None]
        uhi = np.log(hi[sel])[:, None]
        half = 0.5 * (uhi - ulo)
        u = ulo + half * (x[None, :] + 1.0)
        t = np.exp(u)
        qt = _eval(q, t)
        gt = _eval(gamma, t)
        with np.errstate(divide="ignore"):
            lw = np.log(half * w[None, :]) + u
        idx = pos[sel][:, None] + np.arange(n)[None, :]
        L[idx] = lw + qt * (logv[sel][:, None] + gt * u)
        E[idx] = qt
    return L, E


def _closed_terms(lo, hi, logv, qc, sc):
    return qc * logv + log_power_integral(lo, hi, sc), qc


def _build_cells(phi: StepFunction, q: VariableExponent, gamma, width: float) -> _Cells:
    lo, hi, v = split_pieces(phi, _breaks(q, gamma))
    logv = np.log(v) if v.size else v
    if _piecewise_constant(q) and _piecewise_constant(gamma):
        mid = 0.5 * (lo + hi)
        qc = _eval(q, mid) if lo.size else lo
        sc = qc * _eval(gamma, mid) if lo.size else lo
        closed = np.ones(lo.size, dtype=bool)
        nodes = np.zeros(lo.size, dtype=np.int64)
    else:
        # a piece touching 0 gets a frozen-exponent head on (0, FLOOR_RATIO * hi]
        head = lo.size and lo[0] == 0.0
        heads = []
        if head:
            floor = hi[0] * FLOOR_RATIO
            tq = np.array([floor])
            heads = [(0.0, floor, logv[0], float(_eval(q, tq)[0]),
                      float(_eval(q, tq)[0] * _eval(gamma, tq)[0]))]
            lo = lo.copy()
            lo[0] = floor
        lg = np.log(hi / lo)
        k = np.maximum(1, np.ceil(lg / width - 1e-12)).astype(np.int64)
        rep = np.repeat(np.arange(lo.size), k)
        step = np.arange(rep.size) - np.repeat(np.cumsum(k) - k, k)
        ulo = np.log(lo)[rep] + lg[rep] * step / k[rep]
        uhi = np.log(lo)[rep] + lg[rep] * (step + 1) / k[rep]
        clo = np.exp(ulo)
        chi = np.exp(uhi)
        # glue exact piece ends so prefixes line up with phi's breakpoints
        first = step == 0
        last = step == k[rep] - 1
        clo[first] = lo[rep][first]
        chi[last] = hi[rep][last]
        cl = logv[rep]
        nodes = _gl_order(uhi - ulo)
        closed = np.zeros(rep.size, dtype=bool)
        qc = np.zeros(rep.size)
        sc = np.zeros(rep.size)
        if heads:
            h = heads[0]
            clo = np.concatenate(([h[0]], clo))
            chi = np.concatenate(([h[1]], chi))
            cl = np.concatenate(([h[2]], cl))
            closed = np.concatenate(([True], closed))
            qc = np.concatenate(([h[3]], qc))
            sc = np.concatenate(([h[4]], sc))
            nodes = np.concatenate(([0], nodes))
        lo, hi, logv = clo, chi, cl
    count = np.where(closed, 1, nodes)
    offset = np.concatenate(([0], np.cumsum(count)))
    L = np.empty(int(offset[-1]))
    E = np.empty(int(offset[-1]))
    if np.any(closed):
        c = np.flatnonzero(closed)
        Lc, Ec = _closed_terms(lo[c], hi[c], logv[c], qc[c], sc[c])
        L[offset[c]] = Lc
        E[offset[c]] = Ec
    if not np.all(closed):
        o = np.flatnonzero(~closed)
        Lo, Eo = _gl_terms(lo[o], hi[o], logv[o], nodes[o], q, gamma)
        n = nodes[o]
        idx = np.repeat(offset[o], n) + np.arange(int(n.sum())) - np.repeat(np.cumsum(n) - n, n)
        L[idx] = Lo
        E[idx] = Eo
    if np.any(L == np.inf):
        raise DivergenceError("modular diverges: the weighted integrand is not integrable at 0")
    return _Cells(lo, hi, logv, closed, qc, sc, nodes, offset, L, E)


def _prefix_terms(cells: _Cells, radii: np.ndarray, q, gamma):
    """Term counts and padded partial-cell terms for truncations (0, r]."""
    radii = np.asarray(radii, dtype=float)
    full = np.searchsorted(cells.hi, radii, side="right")
    counts = cells.offset[full]
    Lp = np.full((radii.size, _GL_MAX), -np.inf)
    Ep = np.ones((radii.size, _GL_MAX))
    nc = cells.lo.size
    j = np.minimum(full, nc - 1)
    part = (full < nc) & (cells.lo[j] < radii) if nc else np.zeros(radii.size, dtype=bool)
    idx = np.flatnonzero(part)
    if idx.size:
        cj = j[idx]
        closed = cells.closed[cj]
        ci = idx[closed]
        if ci.size:
            c = cj[closed]
            Lc, Ec = _closed_terms(cells.lo[c], radii[ci], cells.logv[c], cells.qc[c], cells.sc[c])
            Lp[ci, 0] = Lc
            Ep[ci, 0] = Ec
        oi = idx[~closed]
        if oi.size:
            c = cj[~closed]
            order = cells.nodes[c]
            Lo, Eo = _gl_terms(cells.lo[c], radii[oi], cells.logv[c], order, q, gamma)
            pos = np.concatenate(([0], np.cumsum(order)[:-1]))
            for k, row in enumerate(oi):
                n = int(order[k])
                Lp[row, :n] = Lo[pos[k]:pos[k] + n]
                Ep[row, :n] = Eo[pos[k]:pos[k] + n]
    return counts, Lp, Ep


def _closed_root(lse, e0: float):
    return np.asarray(lse / e0, dtype=float)


def _roots(cells: _Cells, radii, q, gamma) -> np.ndarray:
    counts, Lp, Ep = _prefix_terms(cells, radii, q, gamma)
    e0 = cells.E[0] if cells.E.size else 1.0
    live = Lp > -np.inf
    if np.all(cells.E == e0) and np.all(Ep[live] == e0):
        # one exponent everywhere: the root is a prefix logsumexp over e0
        cum = np.concatenate(([-np.inf], np.logaddexp.accumulate(cells.L)))
        part = np.logaddexp.reduce(Lp, axis=1) if Lp.shape[1] else np.full(radii.size, -np.inf)
        return _closed_root(np.logaddexp(cum[counts], part), e0)
    return _kernels.prefix_roots(cells.L, cells.E, counts, Lp, Ep)


def _full_root(cells: _Cells) -> float:
    n = cells.L.size
    if n and np.all(cells.E == cells.E[0]):
        return float(_closed_root(np.logaddexp.reduce(cells.L), cells.E[0]))
    return float(_kernels.prefix_roots(cells.L, cells.E, np.array([n]),
                                       np.full((1, 1), -np.inf), np.ones((1, 1)))[0])


def _adaptive_cells(phi: StepFunction, q, gamma):
    """Cells whose full-line Luxemburg root is stable to LUX_RTOL under halving."""
    width = 1.0
    cells = _build_cells(phi, q, gamma, width)
    if _piecewise_constant(q) and _piecewise_constant(gamma):
        return cells, 0.0, 0
    prev = _full_root(cells)
    change = math.inf
    k = 0
    for k in range(1, 9):
        width *= 0.5
        finer = _build_cells(phi, q, gamma, width)
        cur = _full_root(finer)
        change = abs(math.expm1(cur - prev)) if math.isfinite(cur) else 0.0
        cells, prev = finer, cur
        if change <= LUX_RTOL:
            break
    return cells, change, k


# -- public functions --------------------------------------------------------------


def modular(phi: StepFunction, p: VariableExponent, r: Optional[float] = None,
            scale: float = 1.0, weight=None) -> float:
    """J(phi / scale) = integral of |phi(s) s^weight(s) / scale|^p(s) over (0, r]."""
    if scale <= 0:
        raise DomainError("modular scale must be positive")
    if r is not None and r <= 0:
        raise DomainError("truncation radius must be positive")
    cells, _, _ = _adaptive_cells(phi, p, weight)
    if not cells.L.size:
        return 0.0
    return _cells_modular(cells, p, r, scale, weight)


def _cells_modular(cells: _Cells, p, r, scale: float, weight) -> float:
    ls = math.log(scale)
    if r is None:
        z = cells.L - cells.E * ls
    else:
        counts, Lp, Ep = _prefix_terms(cells, np.array([float(r)]), p, weight)
        z = np.concatenate((cells.L[:counts[0]] - cells.E[:counts[0]] * ls, Lp[0] - Ep[0] * ls))
    m = z.max()
    if m == -np.inf:
        return 0.0
    return float(math.exp(m) * np.sum(np.exp(z - m)))


def luxemburg_norm(phi: StepFunction, p: VariableExponent, r: Optional[float] = None,
                   weight=None) -> NormResult:
    """Luxemburg norm of phi (times t^weight(t)) over (0, r] or (0, inf)."""
    if r is not None and r <= 0:
        raise DomainError("truncation radius must be positive")
    cells, change, k = _adaptive_cells(phi, p, weight)
    if not cells.L.size:
        return NormResult(0.0, 0.0, k)
    s = _full_root(cells) if r is None else float(_roots(cells, np.array([float(r)]), p, weight)[0])
    if s == -np.inf:
        return NormResult(0.0, change, k)
    value = math.exp(s)
    # the exp/log round trip can leave J(phi / value) an ulp or two above 1
    for _ in range(_MAX_NUDGE):
        if _cells_modular(cells, p, r, value, weight) <= 1.0:
            break
        value = math.nextafter(value, math.inf)
    return NormResult(value, change, k)


def _morrey_grid(lo: float, hi: float, n: int, extra) -> np.ndarray:
    g = np.geomspace(lo, hi, n)
    extra = np.asarray([x for x in extra if lo <= x <= hi], dtype=float)
    return np.union1d(g, extra)


def _golden_max(fun, a: float, b: float, iters: int = 60) -> float:
    """Max of fun on [a, b] in log-coordinates by golden-section search."""
    ua, ub = math.log(a), math.log(b)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = ub - phi * (ub - ua)
    d = ua + phi * (ub - ua)
    fc, fd = fun(math.exp(c)), fun(math.exp(d))
    best = max(fc, fd)
    for _ in range(iters):
        if fc >= fd:
            ub, d, fd = d, c, fc
            c = ub - phi * (ub - ua)
            fc = fun(math.exp(c))
        else:
            ua, c, fc = c, d, fd
            d = ua + phi * (ub - ua)
            fd = fun(math.exp(d))
        best = max(best, fc, fd)
        if ub - ua < 1e-12:
            break
    return best


def local_morrey_norm(phi: StepFunction, q: VariableExponent, lam: float,
                      weight=None) -> NormResult:
    """sup over r > 0 of r^(-lam/q*(r)) times the Luxemburg norm on (0, r].

    ``weight`` multiplies phi by t^weight(t) first, which turns this into the
    Morrey-Lorentz functional when phi is a rearrangement.
    """
    if not (0.0 <= lam < 1.0):
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    cells, change, _ = _adaptive_cells(phi, q, weight)
    if not cells.L.size:
        return NormResult(0.0, 0.0, 0)
    support = float(cells.hi[-1])
    if cells.lo[0] == 0.0:
        # near 0 the truncated norm behaves like r^(gamma0 + 1/q0)
        g0 = 0.0 if weight is None else weight.at_zero
        kappa = g0 + (1.0 - lam) / q.at_zero
        if kappa < 0.0:
            raise DivergenceError(
                f"Morrey supremum is infinite: r^{kappa:.6g} blows up as r -> 0"
            )
    q0, qinf = q.at_zero, q.at_inf

    def weight_log(r):
        return -lam * np.log(r) / np.where(r < 1.0, q0, qinf)

    def profile(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        order = np.argsort(r, kind="stable")
        s = np.empty(r.size)
        s[order] = _roots(cells, r[order], q, weight)
        with np.errstate(invalid="ignore"):
            out = np.exp(s + weight_log(r))
        return np.where(s == -np.inf, 0.0, out)

    # first radius where the truncated norm is nonzero
    first = float(cells.hi[0])
    lo = 1e-6 * first
    decades = math.log10(support / lo)
    n = max(MORREY_POINTS, int(math.ceil(MORREY_PER_DECADE * decades)))
    extra = [1.0, support]
    if cells.lo.size <= EXACT_BREAK_LIMIT:
        extra.extend(np.concatenate((cells.lo[cells.lo > 0], cells.hi)).tolist())
    prev = None
    refinements = 0
    rel = 0.0
    for refinements in range(MORREY_MAX_REFINE + 1):
        grid = _morrey_grid(lo, support, n, extra)
        vals = profile(grid)
        i = int(np.argmax(vals))
        cur = float(vals[i])
        if prev is not None:
            rel = abs(cur - prev) / cur if cur > 0 else 0.0
            if rel < MORREY_RTOL:
                break
        prev = cur
        n *= 2
    # polish between the neighbours of the best grid point
    if 0 < i < grid.size - 1:
        polished = _golden_max(lambda r: float(profile(r)[0]), grid[i - 1], grid[i + 1])
        cur = max(cur, polished)
    return NormResult(cur, max(rel, change), refinements)


def weighted_rearrangement_exponent(p: VariableExponent, q: VariableExponent) -> WeightExponent:
    return WeightExponent.lorentz(p, q)


def variable_lorentz_norm(f, p: VariableExponent, q: VariableExponent) -> NormResult:
    """Luxemburg norm in q(.) of t^(1/p(t) - 1/q(t)) f*(t) over (0, inf)."""
    fstar = f if isinstance(f, StepFunction) and f.is_nonincreasing() and f == f.canonical() else rearrange(f)
    return luxemburg_norm(fstar, q, None, weight=WeightExponent.lorentz(p, q))


def morrey_lorentz_quasinorm(f, pair: ExponentPair) -> NormResult:
    """Morrey supremum of the power-weighted rearrangement of f."""
    fstar = f if isinstance(f, StepFunction) and f.is_nonincreasing() and f == f.canonical() else rearrange(f)
    return local_morrey_norm(fstar, pair.q, pair.lam, weight=pair.beta)


def lebesgue_norm(f, p: VariableExponent) -> NormResult:
    """Variable Lebesgue norm of a function on (0, inf)."""
    return luxemburg_norm(f, p)
