"""Test-function carriers and exact rearrangement machinery.

A :class:`StepFunction` lives on (0, inf) with pieces between consecutive
breakpoints (implicit left end 0).  A :class:`LineStep` is the same thing on
the whole real line with explicit edges, used as input to the operators.
Rearrangements are returned in canonical form (values strictly decreasing,
no zero pieces), so two rearrangements can be compared for exact equality.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


class StepFunction:
    """Nonnegative piecewise-constant function on (0, inf) with finite support.

    ``values[i]`` is taken on the piece between ``breakpoints[i-1]`` (or 0)
    and ``breakpoints[i]``; the function vanishes past the last breakpoint.
    Point evaluation is right-continuous, matching the infimum definition of
    the decreasing rearrangement.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints, values):
        bp = _frozen(breakpoints)
        vals = _frozen(values)
        if bp.ndim != 1 or vals.shape != bp.shape:
            raise DomainError("breakpoints and values must be 1-d arrays of equal length")
        if bp.size:
            if not np.all(np.isfinite(bp)) or bp[0] <= 0 or np.any(np.diff(bp) <= 0):
                raise DomainError("breakpoints must be positive, finite and strictly increasing")
            if not np.all(np.isfinite(vals)) or np.any(vals < 0):
                raise DomainError("step values must be finite and nonnegative")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("StepFunction is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls([], [])

    @classmethod
    def characteristic(cls, length: float, value: float = 1.0, start: float = 0.0) -> "StepFunction":
        """value * indicator of (start, start + length]."""
        if length <= 0:
            raise DomainError("characteristic interval needs positive length")
        if start > 0:
            return cls([start, start + length], [0.0, value])
        return cls([length], [value])

    @classmethod
    def from_pieces(cls, values, lengths) -> "StepFunction":
        lengths = np.asarray(lengths, dtype=float)
        keep = lengths > 0
        return cls(np.cumsum(lengths[keep]), np.asarray(values, dtype=float)[keep])

    # -- basic properties -----------------------------------------------------

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints, prepend=0.0)

    @property
    def support_end(self) -> float:
        return float(self.breakpoints[-1]) if self.breakpoints.size else 0.0

    @property
    def starts(self) -> np.ndarray:
        return np.concatenate(([0.0], self.breakpoints[:-1]))

    def is_zero(self) -> bool:
        return not np.any(self.values > 0)

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))

    def __len__(self) -> int:
        return int(self.breakpoints.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints) and np.array_equal(
            self.values, other.values
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"StepFunction(breakpoints={self.breakpoints.tolist()}, values={self.values.tolist()})"

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, arr, side="right")
        padded = np.append(self.values, 0.0)
        out = np.where(arr >= 0, padded[idx], 0.0)
        return float(out) if out.ndim == 0 else out

    def integral(self, upto=None):
        """Integral over (0, upto] (whole line if None), vectorized in upto."""
        if upto is None:
            return float(np.sum(self.values * self.lengths))
        t = np.asarray(upto, dtype=float)
        cum = np.concatenate(([0.0], np.cumsum(self.values * self.lengths)))
        knots = np.concatenate(([0.0], self.breakpoints))
        out = np.interp(np.maximum(t, 0.0), knots, cum) if knots.size > 1 else np.zeros(t.shape)
        return float(out) if out.ndim == 0 else out

    # -- transformations ------------------------------------------------------

    def canonical(self) -> "StepFunction":
        """Merge equal neighbours and drop trailing zero pieces."""
        if not self.breakpoints.size:
            return self
        v = self.values
        keep = np.append(v[1:] != v[:-1], True)
        bp, v = self.breakpoints[keep], v[keep]
        nz = np.flatnonzero(v > 0)
        end = nz[-1] + 1 if nz.size else 0
        return StepFunction(bp[:end], v[:end])

    def scaled(self, c: float) -> "StepFunction":
        if c < 0:
            raise DomainError("scale factor must be nonnegative")
        return StepFunction(self.breakpoints, self.values * c)

    def dilated(self, s: float) -> "StepFunction":
        """t -> f(t / s)."""
        if s <= 0:
            raise DomainError("dilation factor must be positive")
        return StepFunction(self.breakpoints * s, self.values)

    def to_line(self) -> "LineStep":
        return LineStep(np.concatenate(([0.0], self.breakpoints)), self.values)

    # -- serialization ----------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["breakpoint", "value"])
        for b, v in zip(self.breakpoints, self.values):
            w.writerow([repr(float(b)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if rows and rows[0][0].strip() == "breakpoint":
            rows = rows[1:]
        return cls([float(r[0]) for r in rows], [float(r[1]) for r in rows])


class LineStep:
    """Piecewise-constant function on the real line.

    ``values[i]`` is taken between ``edges[i]`` and ``edges[i+1]``; values may
    be signed (operators that need magnitudes take absolute values).
    """

    __slots__ = ("edges", "values")

    def __init__(self, edges, values):
        e = _frozen(edges)
        v = _frozen(values)
        if e.ndim != 1 or v.ndim != 1 or (e.size != v.size + 1 and not (e.size == 0 == v.size)):
            raise DomainError("a LineStep needs len(edges) == len(values) + 1")
        if e.size and (not np.all(np.isfinite(e)) or np.any(np.diff(e) <= 0)):
            raise DomainError("edges must be finite and strictly increasing")
        if v.size and not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("LineStep is immutable")

    @classmethod
    def characteristic(cls, a: float, b: float, value: float = 1.0) -> "LineStep":
        return cls([a, b], [value])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def support(self) -> tuple:
        nz = np.flatnonzero(self.values != 0)
        if not nz.size:
            return (0.0, 0.0)
        return (float(self.edges[nz[0]]), float(self.edges[nz[-1] + 1]))

    def is_zero(self) -> bool:
        return not np.any(self.values != 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LineStep):
            return NotImplemented
        return np.array_equal(self.edges, other.edges) and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self) -> str:
        return f"LineStep(edges={self.edges.tolist()}, values={self.values.tolist()})"

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if not self.values.size:
            out = np.zeros(arr.shape)
        else:
            idx = np.searchsorted(self.edges, arr, side="right") - 1
            inside = (idx >= 0) & (idx < self.values.size)
            out = np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def abs(self) -> "LineStep":
        return LineStep(self.edges, np.abs(self.values))

    def scaled(self, c: float) -> "LineStep":
        return LineStep(self.edges, self.values * c)

    def __add__(self, other: "LineStep") -> "LineStep":
        """Pointwise sum on the common refinement of the two edge sets."""
        if not isinstance(other, LineStep):
            return NotImplemented
        if not self.values.size:
            return other
        if not other.values.size:
            return self
        e = np.union1d(self.edges, other.edges)
        mid = 0.5 * (e[:-1] + e[1:])
        return LineStep(e, self(mid) + other(mid))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["edge", "value"])
        for e, v in zip(self.edges, np.append(self.values, 0.0)):
            w.writerow([repr(float(e)), repr(float(v))])
        return buf.getvalue()


Function1D = Union[StepFunction, LineStep]


def as_line(f: Function1D) -> LineStep:
    return f.to_line() if isinstance(f, StepFunction) else f


def _pieces(f) -> tuple:
    """(magnitudes, lengths) of the pieces of any supported carrier."""
    if isinstance(f, StepFunction):
        return f.values, f.lengths
    if isinstance(f, LineStep):
        return np.abs(f.values), f.lengths
    if isinstance(f, GridFunction2D):
        v = np.abs(f.values).ravel()
        return v, np.full(v.shape, f.cell_area)
    raise TypeError(f"unsupported function type {type(f).__name__}")


def split_pieces(phi: StepFunction, breaks) -> tuple:
    """Positive pieces of phi split at extra break points: (lo, hi, value)."""
    starts, ends, vals = phi.starts, phi.breakpoints, phi.values
    keep = vals > 0
    starts, ends, vals = starts[keep], ends[keep], vals[keep]
    if not vals.size:
        return np.empty(0), np.empty(0), np.empty(0)
    breaks = np.asarray(breaks, dtype=float)
    inner = breaks[(breaks > 0) & (breaks < ends[-1])]
    edges = np.union1d(np.concatenate((starts, ends)), inner)
    lo, hi = edges[:-1], edges[1:]
    v = np.asarray(phi(0.5 * (lo + hi)), dtype=float)
    keep = v > 0
    return lo[keep], hi[keep], v[keep]


# -- distribution and rearrangement -------------------------------------------


def distribution(f, level):
    """Measure of {|f| > level}, vectorized in level."""
    lv = np.asarray(level, dtype=float)
    if np.any(lv < 0):
        raise DomainError("distribution levels must be nonnegative")
    v, ln = _pieces(f)
    out = np.sum(np.where(v[None, :] > lv.reshape(-1, 1), ln[None, :], 0.0), axis=1)
    out = out.reshape(lv.shape)
    return float(out) if out.ndim == 0 else out


def rearrange_pieces(values, lengths, cell_measure=None) -> StepFunction:
    """Canonical decreasing rearrangement of pieces with given magnitudes.

    Equal values merge into one piece.  With ``cell_measure`` every piece has
    that common length and merged lengths are count * cell_measure.
    """
    v = np.abs(np.asarray(values, dtype=float)).ravel()
    if cell_measure is None:
        ln = np.asarray(lengths, dtype=float).ravel()
        keep = (v > 0) & (ln > 0)
        v, ln = v[keep], ln[keep]
    else:
        v = v[v > 0]
        ln = None
    if not v.size:
        return StepFunction.zero()
    order = np.argsort(-v, kind="stable")
    sv = v[order]
    starts = np.flatnonzero(np.concatenate(([True], sv[1:] != sv[:-1])))
    if cell_measure is None:
        glen = np.add.reduceat(ln[order], starts)
    else:
        counts = np.diff(np.append(starts, sv.size))
        glen = counts * float(cell_measure)
    ends = np.cumsum(glen)
    # pieces too short to move the running end in floating point carry no measure
    grow = np.concatenate(([True], ends[1:] > ends[:-1]))
    return StepFunction(ends[grow], sv[starts][grow])


def rearrange(f) -> StepFunction:
    """Right-continuous non-increasing rearrangement f* in canonical form."""
    if isinstance(f, GridFunction2D):
        return rasterize(f)
    v, ln = _pieces(f)
    return rearrange_pieces(v, ln)


def double_star(fstar: StepFunction, t):
    """f**(t) = (1/t) * integral of f* over (0, t], computed piecewise exactly."""
    if not fstar.is_nonincreasing():
        raise DomainError("double_star expects a non-increasing step function")
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("f** is defined for t > 0")
    out = np.asarray(fstar.integral(arr)) / arr
    return float(out) if out.ndim == 0 else out


# -- radial functions ------------------------------------------------------------


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n via omega_n = 2*pi/n * omega_{n-2}."""
    if n < 0 or int(n) != n:
        raise DomainError("dimension must be a nonnegative integer")
    n = int(n)
    vol = 1.0 if n % 2 == 0 else 2.0
    for k in range(2 if n % 2 == 0 else 3, n + 1, 2):
        vol *= 2.0 * math.pi / k
    return vol


@dataclass(frozen=True)
class PowerProfile:
    """rho -> coef * rho**(-alpha) on [0, radius), zero outside."""

    coef: float
    alpha: float
    radius: float


@dataclass(frozen=True)
class PowerLaw:
    """t -> coef * t**(-exponent) on (0, support], zero outside."""

    coef: float
    exponent: float
    support: float

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where((arr > 0) & (arr < self.support), self.coef * arr ** (-self.exponent), 0.0)
        return float(out) if out.ndim == 0 else out

    def to_step(self, pieces: int = 64, decades: float = 8.0) -> StepFunction:
        """Step function with the exact piece averages on a geometric grid."""
        if self.exponent >= 1:
            raise DomainError("power law is not locally integrable")
        s = self.support
        bp = s * np.logspace(-decades, 0.0, pieces)
        lo = np.concatenate(([0.0], bp[:-1]))
        e = 1.0 - self.exponent
        avg = self.coef * (bp**e - lo**e) / (e * (bp - lo))
        return StepFunction(bp, avg)


@dataclass(frozen=True)
class RadialFunction:
    dimension: int
    profile: Union[StepFunction, PowerProfile]

    def __post_init__(self):
        if self.dimension < 1:
            raise DomainError("dimension must be at least 1")
        if self.dimension > 10:
            raise DomainError("dimensions above 10 are not supported")


def radial_rearrange(f: RadialFunction):
    """f*(t) = g((t/omega_n)**(1/n)) for a non-increasing radial profile g.

    Step profiles give a StepFunction (each shell (a, b] carries measure
    omega_n (b^n - a^n)); power profiles give a :class:`PowerLaw`.
    """
    n = f.dimension
    wn = unit_ball_volume(n)
    g = f.profile
    if isinstance(g, PowerProfile):
        if g.alpha < 0 or g.coef < 0:
            raise DomainError("power profile must be non-increasing and nonnegative")
        return PowerLaw(g.coef * wn ** (g.alpha / n), g.alpha / n, wn * g.radius**n)
    if not g.is_nonincreasing():
        raise DomainError("radial profile must be non-increasing; rearrange it in 1D first")
    shells = wn * np.diff(g.breakpoints**n, prepend=0.0)
    return rearrange_pieces(g.values, shells)


# -- 2D grids ----------------------------------------------------------------------


class GridFunction2D:
    """m x m cell values on the square [x0, x0+side] x [y0, y0+side].

    Row i covers y in [y0 + i h, y0 + (i+1) h], column j covers x likewise.
    """

    __slots__ = ("origin", "side", "values")

    def __init__(self, origin, side: float, values):
        vals = _frozen(values)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise DomainError("grid values must form a square m x m array")
        if vals.shape[0] < 2:
            raise DomainError("grid resolution must be at least 2")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid cells must be finite")
        if side <= 0:
            raise DomainError("grid side must be positive")
        object.__setattr__(self, "origin", (float(origin[0]), float(origin[1])))
        object.__setattr__(self, "side", float(side))
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction2D is immutable")

    @classmethod
    def characteristic_square(cls, side: float, m: int = 2, origin=(0.0, 0.0), value: float = 1.0):
        return cls(origin, side, np.full((m, m), float(value)))

    @property
    def m(self) -> int:
        return int(self.values.shape[0])

    @property
    def h(self) -> float:
        return self.side / self.m

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def center(self) -> tuple:
        return (self.origin[0] + 0.5 * self.side, self.origin[1] + 0.5 * self.side)

    def cell_centers(self):
        c = (np.arange(self.m) + 0.5) * self.h
        return self.origin[0] + c, self.origin[1] + c

    def support_box(self):
        """Bounding box (xmin, xmax, ymin, ymax) of the nonzero cells, or None."""
        rows, cols = np.nonzero(self.values)
        if not rows.size:
            return None
        x0, y0 = self.origin
        h = self.h
        return (x0 + cols.min() * h, x0 + (cols.max() + 1) * h,
                y0 + rows.min() * h, y0 + (rows.max() + 1) * h)

    def scaled(self, c: float) -> "GridFunction2D":
        return GridFunction2D(self.origin, self.side, self.values * c)

    def __add__(self, other: "GridFunction2D") -> "GridFunction2D":
        if (other.origin, other.side, other.m) != (self.origin, self.side, self.m):
            raise DomainError("grid functions must share origin, side and resolution")
        return GridFunction2D(self.origin, self.side, self.values + other.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([repr(self.origin[0]), repr(self.origin[1]), repr(self.side), str(self.m)])
        for row in self.values:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction2D":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        x0, y0, side, m = float(rows[0][0]), float(rows[0][1]), float(rows[0][2]), int(rows[0][3])
        vals = np.array([[float(v) for v in r] for r in rows[1:]])
        if vals.shape != (m, m):
            raise DomainError(f"grid CSV declares m={m} but holds {vals.shape}")
        return cls((x0, y0), side, vals)


def rasterize(g: GridFunction2D) -> StepFunction:
    """Rearrangement of a grid function: cells sorted by value, measure h^2 each."""
    return rearrange_pieces(g.values, None, cell_measure=g.cell_area)
