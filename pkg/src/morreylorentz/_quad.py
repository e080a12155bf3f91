"""Closed-form power integrals and Gauss-Legendre rules in log variables."""

from functools import lru_cache

import numpy as np

# Below this fraction of a piece's right end the exponent is frozen and the
# remaining integral over (0, floor] is taken in closed form.
FLOOR_RATIO = 1e-12
ADAPT_RTOL = 1e-10


@lru_cache(maxsize=8)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def power_integral(a, b, s):
    """Integral of t**s over (a, b], vectorized, a >= 0.

    Returns inf where a == 0 and s <= -1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    a, b, s = np.broadcast_arrays(a, b, s)
    out = np.zeros(a.shape)
    e = s + 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zero = a == 0.0
        div = zero & (e <= 0.0)
        out[div] = np.inf
        ok0 = zero & (e > 0.0)
        out[ok0] = np.exp(e[ok0] * np.log(b[ok0])) / e[ok0]
        pos = ~zero & (b > a)
        lg = np.log(b[pos] / a[pos])
        ep = e[pos]
        flat = ep == 0.0
        safe = np.where(flat, 1.0, ep)
        val = np.exp(ep * np.log(a[pos])) * np.expm1(ep * lg) / safe
        out[pos] = np.where(flat, lg, val)
    return out if out.ndim else float(out)


def log_power_integral(a, b, s):
    """log of the integral of t**s over (a, b], vectorized, a >= 0.

    -inf for empty intervals, +inf where a == 0 and s <= -1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    a, b, s = np.broadcast_arrays(a, b, s)
    out = np.full(a.shape, -np.inf)
    e = s + 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        zero = (a == 0.0) & (b > 0.0)
        safe_e = np.where(e > 0.0, e, 1.0)
        out = np.where(zero & (e <= 0.0), np.inf, out)
        out = np.where(zero & (e > 0.0), e * np.log(b) - np.log(safe_e), out)
        pos = (a > 0.0) & (b > a)
        la = np.log(np.where(pos, a, 1.0))
        lb = np.log(np.where(pos, b, 2.0))
        lg = lb - la
        x = e * lg
        flat = e == 0.0
        ee = np.where(flat, 1.0, e)
        # log(a**e * expm1(x) / e), arranged to avoid overflow for large |x|
        up = e * lb + np.log(-np.expm1(-x) / ee)
        down = e * la + np.log(np.expm1(x) / ee)
        val = np.where(flat, np.log(lg), np.where(x > 0.0, up, down))
        out = np.where(pos, val, out)
    return out if out.ndim else float(out)


def log_subintervals(a: float, b: float, breaks=(), width: float = 1.0) -> np.ndarray:
    """Split [a, b] (a > 0) at interior breaks and into pieces of log-width <= width."""
    pts = [a, b]
    pts.extend(x for x in breaks if a < x < b)
    pts = np.unique(np.asarray(pts, dtype=float))
    u = np.log(pts)
    out = [u[:1]]
    for lo, hi in zip(u[:-1], u[1:]):
        k = max(1, int(np.ceil((hi - lo) / width)))
        out.append(np.linspace(lo, hi, k + 1)[1:])
    return np.concatenate(out)


def log_nodes(edges_u: np.ndarray, n: int = 16):
    """Gauss-Legendre nodes t_k and weights dt_k over consecutive log-edges."""
    x, w = gauss_legendre(n)
    lo = edges_u[:-1, None]
    hi = edges_u[1:, None]
    half = 0.5 * (hi - lo)
    u = lo + half * (x[None, :] + 1.0)
    t = np.exp(u)
    wt = half * w[None, :] * t
    return t.ravel(), wt.ravel()


def variable_power_integral(a: float, b: float, expo, breaks=(), coef=None) -> float:
    """Integral of coef(t) * t**expo(t) over (a, b] with adaptive log splitting.

    ``expo`` (and optional ``coef``) are vectorized callables.  For a == 0
    the stretch (0, b*FLOOR_RATIO] uses the exponent frozen at its right end.
    """
    if b <= a:
        return 0.0
    total = 0.0
    lo = a
    if a == 0.0:
        lo = b * FLOOR_RATIO
        e0 = float(expo(np.asarray([lo]))[0])
        c0 = 1.0 if coef is None else float(coef(np.asarray([lo]))[0])
        tail = power_integral(0.0, lo, e0)
        total += c0 * tail

    def integrate(width):
        edges = log_subintervals(lo, b, breaks, width)
        t, wt = log_nodes(edges)
        val = np.exp(expo(t) * np.log(t))
        if coef is not None:
            val = val * coef(t)
        return float(np.sum(wt * val))

    width = 1.0
    prev = integrate(width)
    for _ in range(8):
        width *= 0.5
        cur = integrate(width)
        if abs(cur - prev) <= ADAPT_RTOL * abs(cur):
            prev = cur
            break
        prev = cur
    return total + prev
