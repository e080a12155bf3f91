"""Hot loops, each in a numba version and a vectorized numpy version.

The public wrappers at the bottom dispatch on :func:`_accel.use_numba`.
Numba kernels are plain serial loops so results never depend on scheduling.
"""

import math

import numpy as np

from ._accel import njit, use_numba

# -- exact centered maximal function of a line step function -----------------


@njit(cache=True)
def _cumulative_at(knots, cum, y):
    n = knots.size
    if y <= knots[0]:
        return 0.0
    if y >= knots[n - 1]:
        return cum[n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if knots[mid] <= y:
            lo = mid
        else:
            hi = mid
    frac = (y - knots[lo]) / (knots[hi] - knots[lo])
    return cum[lo] + frac * (cum[hi] - cum[lo])


@njit(cache=True)
def _value_at(edges, vals, y, right):
    # right=True gives f(y+), otherwise f(y-)
    n = vals.size
    if right:
        if y < edges[0] or y >= edges[n]:
            return 0.0
    else:
        if y <= edges[0] or y > edges[n]:
            return 0.0
    lo = 0
    hi = n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if edges[mid] < y or (right and edges[mid] == y):
            lo = mid
        else:
            hi = mid
    return vals[lo]


@njit(cache=True)
def _maximal_1d_numba(edges, vals, cum, xs):
    out = np.empty(xs.size)
    for i in range(xs.size):
        x = xs[i]
        best = 0.5 * (_value_at(edges, vals, x, True) + _value_at(edges, vals, x, False))
        for e in edges:
            r = abs(x - e)
            if r > 0.0:
                avg = (_cumulative_at(edges, cum, x + r) - _cumulative_at(edges, cum, x - r)) / (2.0 * r)
                if avg > best:
                    best = avg
        out[i] = best
    return out


def _maximal_1d_numpy(edges, vals, cum, xs, chunk=4096):
    out = np.empty(xs.size)
    padded = np.concatenate(([0.0], vals, [0.0]))
    for lo in range(0, xs.size, chunk):
        x = xs[lo:lo + chunk]
        right = padded[np.searchsorted(edges, x, side="right")]
        left = padded[np.searchsorted(edges, x, side="left")]
        best = 0.5 * (right + left)
        r = np.abs(x[:, None] - edges[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            avg = (np.interp(x[:, None] + r, edges, cum) - np.interp(x[:, None] - r, edges, cum)) / (2.0 * r)
        avg = np.where(r > 0.0, avg, 0.0)
        out[lo:lo + chunk] = np.maximum(best, avg.max(axis=1))
    return out


def maximal_1d_many(edges, absvals, xs):
    """Centered maximal function of |f| at every x.

    Between consecutive critical radii |x - e_j| the ball average is
    A/(2r) + B/2 for constants A, B, hence monotone; the sup is the larger
    of the r -> 0 limit (f(x+) + f(x-))/2 and the averages at critical radii.
    """
    edges = np.ascontiguousarray(edges, dtype=float)
    absvals = np.ascontiguousarray(absvals, dtype=float)
    xs = np.ascontiguousarray(xs, dtype=float)
    if absvals.size == 0:
        return np.zeros(xs.size)
    cum = np.concatenate(([0.0], np.cumsum(absvals * np.diff(edges))))
    if use_numba():
        return _maximal_1d_numba(edges, absvals, cum, xs)
    return _maximal_1d_numpy(edges, absvals, cum, xs)


# -- Hilbert transform of a line step function -----------------------------------


@njit(cache=True)
def _hilbert_numba(edges, vals, xs):
    out = np.empty(xs.size)
    for i in range(xs.size):
        x = xs[i]
        acc = 0.0
        for k in range(vals.size):
            a = edges[k]
            b = edges[k + 1]
            if x == a or x == b:
                acc = np.nan
                break
            if x > b:
                term = math.log1p((b - a) / (x - b))
            elif x < a:
                term = -math.log1p((b - a) / (a - x))
            else:
                term = math.log((x - a) / (b - x))
            acc += vals[k] * term
        out[i] = acc / math.pi
    return out


def _hilbert_numpy(edges, vals, xs, chunk=4096):
    out = np.empty(xs.size)
    a = edges[:-1][None, :]
    b = edges[1:][None, :]
    for lo in range(0, xs.size, chunk):
        x = xs[lo:lo + chunk, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            above = np.log1p((b - a) / (x - b))
            below = -np.log1p((b - a) / (a - x))
            inside = np.log((x - a) / (b - x))
        term = np.where(x > b, above, np.where(x < a, below, inside))
        term = np.where((x == a) | (x == b), np.nan, term)
        out[lo:lo + chunk] = (term @ vals) / math.pi
    return out


def hilbert_many(edges, vals, xs):
    """sum_k v_k/pi * ln|x - a_k|/|x - b_k|; NaN where x hits an edge."""
    edges = np.ascontiguousarray(edges, dtype=float)
    vals = np.ascontiguousarray(vals, dtype=float)
    xs = np.ascontiguousarray(xs, dtype=float)
    if vals.size == 0:
        return np.zeros(xs.size)
    if use_numba():
        return _hilbert_numba(edges, vals, xs)
    return _hilbert_numpy(edges, vals, xs)


# -- Luxemburg roots over nested prefixes -----------------------------------------
#
# A modular is stored as log-terms: J(exp(s)) = sum_j exp(L_j - E_j * s), so the
# Luxemburg norm is exp(s) where the convex decreasing function
# g(s) = logsumexp(L - E s) crosses zero.  Newton from any point with g >= 0
# increases monotonically to the root.

_NEWTON_MAX = 200
# log-modular target just below zero so J(phi / norm) <= 1 survives rounding
_MARGIN = -1e-15


@njit(cache=True)
def _g_and_slope(L, E, n, Lp, Ep, s):
    m = -np.inf
    for j in range(n):
        v = L[j] - E[j] * s
        if v > m:
            m = v
    for j in range(Lp.size):
        v = Lp[j] - Ep[j] * s
        if v > m:
            m = v
    if m == -np.inf:
        return -np.inf, 0.0
    tot = 0.0
    slope = 0.0
    for j in range(n):
        w = math.exp(L[j] - E[j] * s - m)
        tot += w
        slope += E[j] * w
    for j in range(Lp.size):
        w = math.exp(Lp[j] - Ep[j] * s - m)
        tot += w
        slope += Ep[j] * w
    return m + math.log(tot), -slope / tot


@njit(cache=True)
def _solve_one(L, E, n, Lp, Ep, start):
    s = start
    lo = -np.inf
    for j in range(n):
        if L[j] > -np.inf:
            v = L[j] / E[j]
            if v > lo:
                lo = v
    for j in range(Lp.size):
        if Lp[j] > -np.inf:
            v = Lp[j] / Ep[j]
            if v > lo:
                lo = v
    if lo == -np.inf:
        return -np.inf
    if not (s > lo):
        s = lo
    g, d = _g_and_slope(L, E, n, Lp, Ep, s)
    if g < 0.0:
        s = lo
        g, d = _g_and_slope(L, E, n, Lp, Ep, s)
    for _ in range(_NEWTON_MAX):
        step = -g / d
        s_new = s + step
        if s_new <= s:
            break
        s = s_new
        g, d = _g_and_slope(L, E, n, Lp, Ep, s)
        if g <= 0.0 or step <= 1e-15 * max(1.0, abs(s)):
            break
    # nudge up until the modular is safely at most one
    for _ in range(64):
        if g <= _MARGIN:
            break
        s += max((g - _MARGIN) / max(1e-300, -d), 2.3e-16 * max(1.0, abs(s)))
        g, d = _g_and_slope(L, E, n, Lp, Ep, s)
    return s


@njit(cache=True)
def _prefix_roots_numba(L, E, counts, Lp, Ep):
    out = np.empty(counts.size)
    prev = -np.inf
    for i in range(counts.size):
        s = _solve_one(L, E, counts[i], Lp[i], Ep[i], prev)
        out[i] = s
        if s > -np.inf:
            prev = s
    return out


def _solve_one_numpy(L, E, start):
    finite = L > -np.inf
    if not np.any(finite):
        return -np.inf
    L, E = L[finite], E[finite]
    lo = float(np.max(L / E))

    def g_and_slope(s):
        z = L - E * s
        m = z.max()
        w = np.exp(z - m)
        tot = w.sum()
        return m + math.log(tot), -float(E @ w) / tot

    s = start if start > lo else lo
    g, d = g_and_slope(s)
    if g < 0.0:
        s = lo
        g, d = g_and_slope(s)
    for _ in range(_NEWTON_MAX):
        step = -g / d
        s_new = s + step
        if s_new <= s:
            break
        s = s_new
        g, d = g_and_slope(s)
        if g <= 0.0 or step <= 1e-15 * max(1.0, abs(s)):
            break
    for _ in range(64):
        if g <= _MARGIN:
            break
        s += max((g - _MARGIN) / max(1e-300, -d), 2.3e-16 * max(1.0, abs(s)))
        g, d = g_and_slope(s)
    return s


def prefix_roots(L, E, counts, Lp, Ep):
    """Root s_i of logsumexp over L[:counts[i]] together with row i of Lp.

    ``counts`` must be non-decreasing (nested prefixes); the previous root
    then serves as a valid Newton start for the next one.
    """
    L = np.ascontiguousarray(L, dtype=float)
    E = np.ascontiguousarray(E, dtype=float)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    Lp = np.ascontiguousarray(Lp, dtype=float).reshape(counts.size, -1)
    Ep = np.ascontiguousarray(Ep, dtype=float).reshape(counts.size, -1)
    if use_numba():
        return _prefix_roots_numba(L, E, counts, Lp, Ep)
    out = np.empty(counts.size)
    prev = -np.inf
    for i in range(counts.size):
        s = _solve_one_numpy(
            np.concatenate((L[:counts[i]], Lp[i])), np.concatenate((E[:counts[i]], Ep[i])), prev
        )
        out[i] = s
        if s > -np.inf:
            prev = s
    return out


# -- discrete 2D maximal function over lattice disks --------------------------------


def disk_offsets(max_r2: float):
    """Lattice offsets with di^2 + dj^2 < max_r2, sorted by squared distance."""
    k = int(math.ceil(math.sqrt(max_r2)))
    di, dj = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
    d2 = (di * di + dj * dj).ravel()
    keep = d2 < max_r2
    order = np.argsort(d2[keep], kind="stable")
    return di.ravel()[keep][order], dj.ravel()[keep][order], d2[keep][order]


@njit(cache=True)
def _disk_max_numba(vals, di, dj, d2, r2):
    m = vals.shape[0]
    out = np.zeros((m, m))
    nk = r2.size
    for i in range(m):
        for j in range(m):
            acc = 0.0
            best = 0.0
            k = 0
            for o in range(di.size):
                while k < nk and d2[o] >= r2[k]:
                    if o > 0:
                        avg = acc / o
                        if avg > best:
                            best = avg
                    k += 1
                if k >= nk:
                    break
                ii = i + di[o]
                jj = j + dj[o]
                if 0 <= ii < m and 0 <= jj < m:
                    acc += vals[ii, jj]
            if k < nk and di.size > 0:
                avg = acc / di.size
                if avg > best:
                    best = avg
            out[i, j] = best
    return out


def _disk_max_numpy(vals, di, dj, d2, r2):
    from scipy.signal import fftconvolve

    m = vals.shape[0]
    best = np.zeros((m, m))
    for thr in r2:
        keep = d2 < thr
        if not np.any(keep):
            continue
        k = int(max(np.abs(di[keep]).max(), np.abs(dj[keep]).max()))
        mask = np.zeros((2 * k + 1, 2 * k + 1))
        mask[di[keep] + k, dj[keep] + k] = 1.0
        s = fftconvolve(vals, mask[::-1, ::-1], mode="full")[k:k + m, k:k + m]
        best = np.maximum(best, s / keep.sum())
    return best


def disk_maxima(vals, radii_cells):
    """Max over the given radii (in cell units) of open-disk lattice averages.

    Cells outside the grid count as zero; the divisor is the number of lattice
    points in the disk, the discrete stand-in for its area.
    """
    vals = np.ascontiguousarray(np.abs(vals), dtype=float)
    r2 = np.sort(np.asarray(radii_cells, dtype=float) ** 2)
    di, dj, d2 = disk_offsets(float(r2[-1]))
    if use_numba():
        return _disk_max_numba(vals, di.astype(np.int64), dj.astype(np.int64), d2.astype(np.float64), r2)
    return _disk_max_numpy(vals, di, dj, d2, r2)


# -- rays through a grid: truncated singular integrals in polar form -----------------


@njit(cache=True)
def _ray_segments(vals, x0, y0, h, px, py, c, s, rho, val):
    """Fill rho[0..k] and val[0..k-1] with the cells met by the ray; return k."""
    m = vals.shape[0]
    side = m * h
    lo = 0.0
    hi = np.inf
    if abs(c) > 1e-300:
        a = (x0 - px) / c
        b = (x0 + side - px) / c
        lo = max(lo, min(a, b))
        hi = min(hi, max(a, b))
    elif not (x0 <= px <= x0 + side):
        return 0
    if abs(s) > 1e-300:
        a = (y0 - py) / s
        b = (y0 + side - py) / s
        lo = max(lo, min(a, b))
        hi = min(hi, max(a, b))
    elif not (y0 <= py <= y0 + side):
        return 0
    if not (hi > lo):
        return 0
    n = 0
    rho[n] = lo
    n += 1
    if abs(c) > 1e-300:
        for i in range(m + 1):
            r = (x0 + i * h - px) / c
            if lo < r < hi:
                rho[n] = r
                n += 1
    if abs(s) > 1e-300:
        for i in range(m + 1):
            r = (y0 + i * h - py) / s
            if lo < r < hi:
                rho[n] = r
                n += 1
    rho[n] = hi
    n += 1
    rho[:n] = np.sort(rho[:n])
    k = 0
    for t in range(n - 1):
        a = rho[t]
        b = rho[t + 1]
        if b > a:
            mid = 0.5 * (a + b)
            col = int(math.floor((px + mid * c - x0) / h))
            row = int(math.floor((py + mid * s - y0) / h))
            col = min(max(col, 0), m - 1)
            row = min(max(row, 0), m - 1)
            rho[k] = a
            val[k] = vals[row, col]
            rho[k + 1] = b
            k += 1
    return k


@njit(cache=True)
def _polar_numba(vals, x0, y0, h, pts, cosv, sinv, wts, absw, tgrid):
    """For each point: F(t) on its t-grid row and the |Omega|-weighted 1/rho integral."""
    m = vals.shape[0]
    npts = pts.shape[0]
    nt = tgrid.shape[1]
    F = np.zeros((npts, nt))
    dom = np.zeros(npts)
    rho = np.empty(2 * m + 8)
    val = np.empty(2 * m + 8)
    for p in range(npts):
        px = pts[p, 0]
        py = pts[p, 1]
        for a in range(cosv.size):
            k = _ray_segments(vals, x0, y0, h, px, py, cosv[a], sinv[a], rho, val)
            if k == 0:
                continue
            g = 0.0
            seg = 0
            for it in range(nt):
                t = tgrid[p, it]
                while seg < k and rho[seg + 1] <= t:
                    g += val[seg] * (rho[seg + 1] - rho[seg])
                    seg += 1
                part = g
                if seg < k and t > rho[seg]:
                    part += val[seg] * (t - rho[seg])
                F[p, it] += wts[a] * part
            d = 0.0
            for q in range(k):
                if val[q] != 0.0:
                    if rho[q] <= 0.0:
                        d = np.inf
                        break
                    d += abs(val[q]) * math.log(rho[q + 1] / rho[q])
            dom[p] += absw[a] * d
    return F, dom


def _ray_segments_numpy(vals, x0, y0, h, px, py, c, s):
    """Vectorized over angles: padded (rho, val) arrays with NaN-free padding."""
    m = vals.shape[0]
    side = m * h
    tiny = 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        cx = np.where(np.abs(c) > tiny, c, np.nan)
        sy = np.where(np.abs(s) > tiny, s, np.nan)
        ax, bx = (x0 - px) / cx, (x0 + side - px) / cx
        ay, by = (y0 - py) / sy, (y0 + side - py) / sy
    inx = x0 <= px <= x0 + side
    iny = y0 <= py <= y0 + side
    lox = np.where(np.isnan(ax), 0.0 if inx else np.inf, np.fmin(ax, bx))
    hix = np.where(np.isnan(ax), np.inf if inx else -np.inf, np.fmax(ax, bx))
    loy = np.where(np.isnan(ay), 0.0 if iny else np.inf, np.fmin(ay, by))
    hiy = np.where(np.isnan(ay), np.inf if iny else -np.inf, np.fmax(ay, by))
    lo = np.maximum(0.0, np.maximum(lox, loy))
    hi = np.minimum(hix, hiy)
    hit = hi > lo
    lines = np.arange(m + 1) * h
    with np.errstate(divide="ignore", invalid="ignore"):
        rx = (x0 + lines[None, :] - px) / cx[:, None]
        ry = (y0 + lines[None, :] - py) / sy[:, None]
    cand = np.concatenate((rx, ry), axis=1)
    inside = (cand > lo[:, None]) & (cand < hi[:, None])
    cand = np.where(inside, cand, np.inf)
    loc = np.where(hit, lo, 0.0)
    hic = np.where(hit, hi, 0.0)
    rho = np.sort(np.concatenate((loc[:, None], cand, hic[:, None]), axis=1), axis=1)
    # push the closing hi into place: entries beyond it are inf
    rho = np.where(rho > hic[:, None], hic[:, None], rho)
    a, b = rho[:, :-1], rho[:, 1:]
    mid = 0.5 * (a + b)
    col = np.clip(np.floor((px + mid * c[:, None] - x0) / h), 0, m - 1).astype(np.intp)
    row = np.clip(np.floor((py + mid * s[:, None] - y0) / h), 0, m - 1).astype(np.intp)
    val = np.where(b > a, vals[row, col], 0.0)
    return rho, val


def _polar_numpy(vals, x0, y0, h, pts, cosv, sinv, wts, absw, tgrid):
    npts = pts.shape[0]
    F = np.zeros((npts, tgrid.shape[1]))
    dom = np.zeros(npts)
    for p in range(npts):
        rho, val = _ray_segments_numpy(vals, x0, y0, h, pts[p, 0], pts[p, 1], cosv, sinv)
        seglen = np.diff(rho, axis=1)
        cum = np.concatenate((np.zeros((rho.shape[0], 1)), np.cumsum(val * seglen, axis=1)), axis=1)
        t = tgrid[p]
        # G(t) = cum at the segment holding t plus the partial piece
        idx = np.clip(np.array([np.searchsorted(r, t, side="right") - 1 for r in rho]), 0, rho.shape[1] - 2)
        r0 = np.take_along_axis(rho, idx, axis=1)
        c0 = np.take_along_axis(cum, idx, axis=1)
        v0 = np.take_along_axis(val, idx, axis=1)
        r1 = np.take_along_axis(rho, idx + 1, axis=1)
        g = c0 + v0 * (np.minimum(t[None, :], r1) - r0)
        g = np.where(t[None, :] <= rho[:, :1], 0.0, g)
        g = np.where(t[None, :] >= rho[:, -1:], cum[:, -1:], g)
        F[p] = wts @ g
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.where(val != 0.0, np.abs(val) * np.log(rho[:, 1:] / rho[:, :-1]), 0.0)
        dom[p] = absw @ np.where(np.isnan(lr), 0.0, lr).sum(axis=1)
    return F, dom


def polar_profiles(vals, x0, y0, h, pts, omega_vals, tgrid):
    """Truncated singular integrals F(t) and the dominating 1/rho integral.

    ``omega_vals[a]`` is the angular factor for rays at angle 2 pi a / N.
    Returns F with one row per point evaluated on that point's ``tgrid`` row,
    and the integral of |Omega| |g| / rho over the plane.
    """
    omega_vals = np.ascontiguousarray(omega_vals, dtype=float)
    na = omega_vals.size
    ang = 2.0 * np.pi * np.arange(na) / na
    cosv, sinv = np.cos(ang), np.sin(ang)
    w = 2.0 * np.pi / na
    wts = w * omega_vals
    absw = w * np.abs(omega_vals)
    vals = np.ascontiguousarray(vals, dtype=float)
    pts = np.ascontiguousarray(pts, dtype=float).reshape(-1, 2)
    tgrid = np.ascontiguousarray(tgrid, dtype=float).reshape(pts.shape[0], -1)
    if use_numba():
        return _polar_numba(vals, float(x0), float(y0), float(h), pts, cosv, sinv, wts, absw, tgrid)
    return _polar_numpy(vals, float(x0), float(y0), float(h), pts, cosv, sinv, wts, absw, tgrid)
