"""Meshes on which operator outputs are sampled before rearrangement.

Outputs of the operators are not step functions.  They are sampled at cell
midpoints of a mesh and each sample carries its cell's measure, which turns
the output into a step function whose rearrangement approximates the true
one.  Meshes are dense near the input, geometrically graded around its
discontinuities and out into the far field.
"""

import math

import numpy as np

from .signal import GridFunction2D, LineStep

LINE_CELLS = 4096
LINE_HALF_WIDTH = 8.0       # uniform window half-width, in support radii
LINE_FAR_FACTOR = 1024.0    # far-field extent, in uniform-window half-widths
EDGE_LEVELS = 10
HALFLINE_RANGE = (1e-9, 1e9)


def _geometric_tail(start: float, stop: float, per_octave: int) -> np.ndarray:
    if stop <= start:
        return np.empty(0)
    k = int(math.ceil(per_octave * math.log2(stop / start)))
    return start * 2.0 ** (np.arange(1, k + 1) / per_octave)


def line_mesh(f: LineStep, refine: int = 0, extent: float = None):
    """Cell midpoints and lengths covering [c - E, c + E] around supp f."""
    a, b = f.support
    if b <= a:
        a, b = -0.5, 0.5
    c = 0.5 * (a + b)
    radius = 0.5 * (b - a)
    half = LINE_HALF_WIDTH * radius
    n = LINE_CELLS * 2**refine
    far = LINE_FAR_FACTOR * half if extent is None else max(float(extent), 2.0 * half)
    h = 2.0 * half / n
    pts = [c + np.linspace(-half, half, n + 1), f.edges]
    offs = h * 2.0 ** -np.arange(1, EDGE_LEVELS + refine + 1)
    pts.append((f.edges[:, None] + offs[None, :]).ravel())
    pts.append((f.edges[:, None] - offs[None, :]).ravel())
    tail = _geometric_tail(half, far, 16 * 2**refine)
    pts.append(c + tail)
    pts.append(c - tail)
    edges = np.unique(np.concatenate(pts[:1] + pts[2:]))
    # keep mesh points clear of the jumps so no midpoint rounds onto one
    near = np.abs(edges[:, None] - f.edges[None, :]).min(axis=1) < 0.5 * offs[-1]
    edges = np.union1d(edges[~near], f.edges)
    return 0.5 * (edges[:-1] + edges[1:]), np.diff(edges)


def halfline_mesh(refine: int = 0, breaks=()):
    """Sample points and lengths on (0, T] for functions on the half-line.

    A fixed absolute window keeps every member of a family on the same mesh;
    the leading cell (0, t_min] is sampled at t_min / 2.
    """
    lo, hi = HALFLINE_RANGE
    n = LINE_CELLS * 2**refine
    edges = np.geomspace(lo, hi, n + 1)
    extra = np.asarray([x for x in breaks if lo < x < hi], dtype=float)
    edges = np.union1d(edges, extra)
    mids = np.sqrt(edges[:-1] * edges[1:])
    return (np.concatenate(([0.5 * lo], mids)),
            np.concatenate(([lo], np.diff(edges))),
            np.concatenate(([0.0], edges)))


def plane_mesh(g: GridFunction2D, refine: int = 0, levels: int = 6):
    """Points and cell areas on nested squares around the grid's square.

    Level 0 subdivides the grid square into 2m * 2^refine cells per side so no
    sample lies on a grid line; level k doubles the square and the cell size and
    keeps only the ring outside the previous square.
    """
    n = 2 * g.m * 2**refine
    cx, cy = g.center
    pts = []
    areas = []
    for k in range(levels + 1):
        side = g.side * 2.0**k
        h = side / n
        c = (np.arange(n) + 0.5) * h - 0.5 * side
        X, Y = np.meshgrid(cx + c, cy + c, indexing="xy")
        if k:
            inner = 0.5 * side
            keep = (np.abs(X - cx) > 0.5 * inner) | (np.abs(Y - cy) > 0.5 * inner)
        else:
            keep = np.ones(X.shape, dtype=bool)
        pts.append(np.column_stack((X[keep], Y[keep])))
        areas.append(np.full(int(keep.sum()), h * h))
    return np.vstack(pts), np.concatenate(areas)
