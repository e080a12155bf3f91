"""Variable exponents on (0, inf) and the hypothesis checks placed on them.

Four exponent families are supported: constant, two-piece (one value on
(0, 1), another on [1, inf)), the log interpolant
``p_inf + (p0 - p_inf) / (1 + ln(1 + t))`` and a table on a log grid with
linear interpolation in ``ln t``.  Everything else in the package consumes
exponents through the small duck-typed surface shared by
:class:`VariableExponent` and :class:`WeightExponent`: ``__call__``,
``breakpoints()`` and ``constant_on(a, b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigError, ConjugateUndefinedError, DomainError

KINDS = ("constant", "two-piece", "log-interpolant", "tabulated")

GRID_LO = 1e-6
GRID_HI = 1e6
GRID_POINTS = 4096
SUP_RTOL = 1e-3
STRICT_MARGIN = 1e-9
ALMOST_MONOTONE_FACTOR = 1.05

# |ln t| doubles at each endpoint extension; a ratio at least this large at
# every step is read as unbounded growth of the decay product.
_DIVERGENCE_RATIO = 1.1


def log_grid(lo: float = GRID_LO, hi: float = GRID_HI, n: int = GRID_POINTS) -> np.ndarray:
    """Log-spaced grid on [lo, hi]; t = 1 is always included when in range."""
    g = np.logspace(math.log10(lo), math.log10(hi), n)
    if lo <= 1.0 <= hi:
        g = np.union1d(g, [1.0])
    return g


def _as_array(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("exponents are defined on (0, inf) only")
    return arr


@dataclass(frozen=True)
class VariableExponent:
    """A bounded exponent t -> p(t) on (0, inf).

    Build instances with the classmethods; the raw constructor is used by
    config deserialization.
    """

    kind: str
    params: tuple
    p0: float
    p_inf: float
    p_minus: float
    p_plus: float
    a0: float
    a_inf: float
    nodes: tuple = field(default=(), repr=False)
    values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown exponent kind {self.kind!r}")
        if not (0 < self.p_minus <= self.p_plus < math.inf):
            raise DomainError(
                f"exponent bounds must satisfy 0 < p_minus <= p_plus < inf, "
                f"got {self.p_minus}, {self.p_plus}"
            )
        if self.a0 < 0 or self.a_inf < 0:
            raise DomainError("decay constants must be nonnegative")

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value: float) -> "VariableExponent":
        v = float(value)
        return cls("constant", (v,), v, v, v, v, 0.0, 0.0)

    @classmethod
    def two_piece(cls, inner: float, outer: float) -> "VariableExponent":
        """inner on (0, 1), outer on [1, inf)."""
        i, o = float(inner), float(outer)
        return cls("two-piece", (i, o), i, o, min(i, o), max(i, o), 0.0, 0.0)

    @classmethod
    def log_interpolant(cls, p0: float, p_inf: float, a0=None, a_inf=None) -> "VariableExponent":
        p0, p_inf = float(p0), float(p_inf)
        gap = abs(p0 - p_inf)
        # ln(1+t) <= t and t|ln t| <= 1/e give the bound at zero; the
        # product at infinity increases to |p0 - p_inf|.
        a0 = gap / math.e if a0 is None else float(a0)
        a_inf = gap if a_inf is None else float(a_inf)
        return cls(
            "log-interpolant", (p0, p_inf), p0, p_inf, min(p0, p_inf), max(p0, p_inf), a0, a_inf
        )

    @classmethod
    def tabulated(cls, nodes, values, p0=None, p_inf=None, a0=None, a_inf=None) -> "VariableExponent":
        """Table of values at positive nodes, linear in ln t, constant outside.

        ``p0``/``p_inf`` default to the end values; supplying something else
        declares limits the table does not actually approach.
        """
        nodes = tuple(float(x) for x in nodes)
        values = tuple(float(v) for v in values)
        if len(nodes) != len(values) or len(nodes) < 1:
            raise ConfigError("tabulated exponent needs matching nonempty nodes/values")
        if any(x <= 0 for x in nodes) or any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise ConfigError("table nodes must be positive and strictly increasing")
        p0 = values[0] if p0 is None else float(p0)
        p_inf = values[-1] if p_inf is None else float(p_inf)
        lo, hi = min(values), max(values)
        probe = cls("tabulated", (), p0, p_inf, lo, hi, 0.0, 0.0, nodes, values)
        if a0 is None or a_inf is None:
            a0_hat, ainf_hat = _decay_sups(probe, log_grid())
            a0 = a0_hat if a0 is None else a0
            a_inf = ainf_hat if a_inf is None else a_inf
        return cls("tabulated", (), p0, p_inf, lo, hi, float(a0), float(a_inf), nodes, values)

    def with_decay_constants(self, a0: float, a_inf: float) -> "VariableExponent":
        return VariableExponent(
            self.kind, self.params, self.p0, self.p_inf, self.p_minus, self.p_plus,
            float(a0), float(a_inf), self.nodes, self.values,
        )

    # -- evaluation -------------------------------------------------------

    def __call__(self, t):
        arr = _as_array(t)
        out = self._eval(arr)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.full(t.shape, self.p0)
        if self.kind == "two-piece":
            return np.where(t < 1.0, self.params[0], self.params[1])
        if self.kind == "log-interpolant":
            p0, pinf = self.params
            return pinf + (p0 - pinf) / (1.0 + np.log1p(t))
        return np.interp(np.log(t), np.log(self.nodes), self.values)

    def breakpoints(self) -> tuple:
        """Points where the exponent is not smooth."""
        if self.kind == "two-piece":
            return (1.0,)
        if self.kind == "tabulated":
            return self.nodes
        return ()

    def constant_on(self, a: float, b: float) -> Optional[float]:
        """The value if p is constant (a.e.) on (a, b], else None."""
        if self.kind == "constant":
            return self.p0
        if self.kind == "two-piece":
            if b <= 1.0:
                return self.params[0]
            if a >= 1.0:
                return self.params[1]
            return None
        if self.kind == "log-interpolant":
            return self.p0 if self.p0 == self.p_inf else None
        if b <= self.nodes[0]:
            return self.values[0]
        if a >= self.nodes[-1]:
            return self.values[-1]
        return None

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant" or (
            self.p_minus == self.p_plus == self.p0 == self.p_inf
        )

    @property
    def at_zero(self) -> float:
        return self.p0

    @property
    def at_inf(self) -> float:
        return self.p_inf

    def conjugate(self, t):
        return conjugate(self, t)

    def limit(self, r):
        return limit_exponent(self, r)

    # -- serialization ----------------------------------------------------

    def to_config(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "constant":
            out["value"] = repr(self.p0)
        elif self.kind == "two-piece":
            out["inner"], out["outer"] = (repr(v) for v in self.params)
        elif self.kind == "log-interpolant":
            out["p0"], out["p_inf"] = (repr(v) for v in self.params)
        else:
            out["nodes"] = ", ".join(repr(x) for x in self.nodes)
            out["values"] = ", ".join(repr(v) for v in self.values)
            out["p0"] = repr(self.p0)
            out["p_inf"] = repr(self.p_inf)
        out["a0"] = repr(self.a0)
        out["a_inf"] = repr(self.a_inf)
        return out

    @classmethod
    def from_config(cls, section) -> "VariableExponent":
        try:
            kind = section["kind"].strip()
            a0 = float(section["a0"]) if "a0" in section else None
            a_inf = float(section["a_inf"]) if "a_inf" in section else None
            if kind == "constant":
                exp = cls.constant(float(section["value"]))
            elif kind == "two-piece":
                exp = cls.two_piece(float(section["inner"]), float(section["outer"]))
            elif kind == "log-interpolant":
                return cls.log_interpolant(
                    float(section["p0"]), float(section["p_inf"]), a0=a0, a_inf=a_inf
                )
            elif kind == "tabulated":
                return cls.tabulated(
                    _floats(section["nodes"]),
                    _floats(section["values"]),
                    p0=float(section["p0"]) if "p0" in section else None,
                    p_inf=float(section["p_inf"]) if "p_inf" in section else None,
                    a0=a0,
                    a_inf=a_inf,
                )
            else:
                raise ConfigError(f"unknown exponent kind {kind!r}")
        except KeyError as exc:
            raise ConfigError(f"exponent config missing key {exc}") from None
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad exponent parameter: {exc}") from None
        if a0 is not None or a_inf is not None:
            exp = exp.with_decay_constants(
                exp.a0 if a0 is None else a0, exp.a_inf if a_inf is None else a_inf
            )
        return exp


def _floats(text: str) -> list:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


@dataclass(frozen=True)
class WeightExponent:
    """A real-valued exponent beta(t), possibly zero or negative.

    ``kind`` is ``constant`` or ``lorentz`` (beta = 1/p - 1/q).
    """

    kind: str
    value: float = 0.0
    p: Optional[VariableExponent] = None
    q: Optional[VariableExponent] = None

    @classmethod
    def constant(cls, value: float) -> "WeightExponent":
        return cls("constant", float(value))

    @classmethod
    def lorentz(cls, p: VariableExponent, q: VariableExponent) -> "WeightExponent":
        if p.is_constant and q.is_constant:
            return cls("constant", 1.0 / p.p0 - 1.0 / q.p0)
        return cls("lorentz", 0.0, p, q)

    def __call__(self, t):
        arr = _as_array(t)
        if self.kind == "constant":
            out = np.full(arr.shape, self.value)
        else:
            out = 1.0 / self.p._eval(arr) - 1.0 / self.q._eval(arr)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def at_zero(self) -> float:
        if self.kind == "constant":
            return self.value
        return 1.0 / self.p.p0 - 1.0 / self.q.p0

    @property
    def at_inf(self) -> float:
        if self.kind == "constant":
            return self.value
        return 1.0 / self.p.p_inf - 1.0 / self.q.p_inf

    def breakpoints(self) -> tuple:
        if self.kind == "constant":
            return ()
        return tuple(sorted(set(self.p.breakpoints()) | set(self.q.breakpoints())))

    def constant_on(self, a: float, b: float) -> Optional[float]:
        if self.kind == "constant":
            return self.value
        pc = self.p.constant_on(a, b)
        qc = self.q.constant_on(a, b)
        if pc is None or qc is None:
            return None
        return 1.0 / pc - 1.0 / qc

    def to_config(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": repr(self.value)}
        return {"kind": "lorentz"}


@dataclass(frozen=True)
class ExponentPair:
    """The triple (p, q, lambda) parametrizing the Morrey-Lorentz quasinorm."""

    p: VariableExponent
    q: VariableExponent
    lam: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.lam < 1.0):
            raise DomainError(f"lambda must lie in [0, 1), got {self.lam}")

    @property
    def beta(self) -> WeightExponent:
        return WeightExponent.lorentz(self.p, self.q)


# -- pointwise operations -------------------------------------------------


def evaluate(p: VariableExponent, t):
    return p(t)


def conjugate(p: VariableExponent, t):
    """p(t) / (p(t) - 1)."""
    v = np.asarray(p(t), dtype=float)
    if np.any(v <= 1.0):
        raise ConjugateUndefinedError("conjugate exponent needs p(t) > 1")
    out = v / (v - 1.0)
    return float(out) if out.ndim == 0 else out


def limit_exponent(q: VariableExponent, r):
    """q(0) for 0 < r < 1 and q(inf) for r >= 1."""
    arr = _as_array(r)
    out = np.where(arr < 1.0, q.p0, q.p_inf)
    return float(out) if out.ndim == 0 else out


# -- decay conditions ------------------------------------------------------


class DecayReport(NamedTuple):
    a0_hat: float
    a_inf_hat: float
    a0: float
    a_inf: float
    diverging_at_zero: bool
    diverging_at_inf: bool
    passed: bool


def _decay_products(p, t0: np.ndarray, tinf: np.ndarray):
    prod0 = np.abs(p._eval(t0) - p.p0) * np.abs(np.log(t0))
    prodinf = np.abs(p._eval(tinf) - p.p_inf) * np.log(tinf)
    return prod0, prodinf


def _decay_sups(p, grid: np.ndarray):
    g = np.asarray(grid, dtype=float)
    t0 = g[(g > 0) & (g <= 0.5)]
    tinf = g[g >= 2.0]
    prod0, prodinf = _decay_products(p, t0, tinf)
    return (float(prod0.max()) if prod0.size else 0.0, float(prodinf.max()) if prodinf.size else 0.0)


def _grows_without_bound(values) -> bool:
    v = np.asarray(values, dtype=float)
    if v[0] <= 0:
        return False
    return bool(np.all(v[1:] >= _DIVERGENCE_RATIO * v[:-1]))


def check_decay(p: VariableExponent, grid=None) -> DecayReport:
    """Minimal log-decay constants over a grid and a pass/fail verdict.

    Besides the grid sups, the products are evaluated at three endpoint
    extensions where |ln t| doubles each time; steady growth there marks
    the constant as unbounded even though every finite grid gives a number.
    """
    if grid is None:
        grid = log_grid()
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise DomainError("decay check needs a nonempty grid")
    a0_hat, ainf_hat = _decay_sups(p, g)

    lo = float(g[g <= 0.5].min()) if np.any(g <= 0.5) else 0.5
    hi = float(g[g >= 2.0].max()) if np.any(g >= 2.0) else 2.0
    ext0 = np.array([lo ** (2.0**k) for k in range(4)])
    extinf = np.array([hi ** (2.0**k) for k in range(4)])
    prod0, prodinf = _decay_products(p, ext0, extinf)
    div0 = _grows_without_bound(prod0)
    divinf = _grows_without_bound(prodinf)

    tol = 1e-12
    passed = (
        a0_hat <= p.a0 * (1 + tol) + tol
        and ainf_hat <= p.a_inf * (1 + tol) + tol
        and not div0
        and not divinf
    )
    return DecayReport(a0_hat, ainf_hat, p.a0, p.a_inf, div0, divinf, passed)


# -- Morrey-space sup condition ---------------------------------------------


class SupCondition(NamedTuple):
    sup_value: float
    finite: bool


def check_sup_condition(q: VariableExponent, lam: float, n: int = GRID_POINTS) -> SupCondition:
    """sup_r min(1, r)**(1/q(0)) * r**(-lam/q*(r)) on a refined log grid.

    Finiteness follows from the endpoint exponents (1 - lam)/q(0) as r -> 0
    and -lam/q(inf) as r -> inf.
    """
    if not (0.0 <= lam < 1.0):
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")

    def sup_on(npts):
        r = log_grid(n=npts)
        qs = limit_exponent(q, r)
        logv = np.minimum(np.log(r), 0.0) / q.p0 - lam * np.log(r) / qs
        return float(np.exp(logv.max()))

    prev = sup_on(n)
    for _ in range(6):
        n *= 2
        cur = sup_on(n)
        if abs(cur - prev) <= SUP_RTOL * abs(cur):
            prev = cur
            break
        prev = cur
    finite = (1.0 - lam) / q.p0 >= 0.0 and lam / q.p_inf >= 0.0
    return SupCondition(prev, bool(finite))


# -- Hardy-operator conditions ----------------------------------------------


@dataclass(frozen=True)
class HardyConditionReport:
    h_condition: bool
    h_margin: float
    calh_condition: bool
    calh_margin: float
    # same inequalities with q'(0) and q(inf) in place of q'(t) and q(t)
    h_condition_endpoint: bool
    h_margin_endpoint: float
    calh_condition_endpoint: bool
    calh_margin_endpoint: float
    a_value: Optional[float]
    a_factor: float
    b_value: Optional[float]
    b_factor: float
    beta_limit_finite: bool
    monotone_factor: float = ALMOST_MONOTONE_FACTOR

    @property
    def monotone_condition(self) -> bool:
        return self.a_value is not None and self.b_value is not None


def _almost_decreasing_factor(logg: np.ndarray) -> np.ndarray:
    """Smallest C with g(t2) <= C g(t1) for all t1 < t2, rowwise, as log C."""
    runmin = np.minimum.accumulate(logg, axis=-1)
    worst = np.max(logg[..., 1:] - runmin[..., :-1], axis=-1)
    return np.maximum(worst, 0.0)


def _almost_increasing_factor(logg: np.ndarray) -> np.ndarray:
    runmax = np.maximum.accumulate(logg, axis=-1)
    worst = np.max(runmax[..., :-1] - logg[..., 1:], axis=-1)
    return np.maximum(worst, 0.0)


def check_hardy_conditions(beta, q: VariableExponent, lam: float, grid=None,
                           candidates=None) -> HardyConditionReport:
    """Boundedness inequalities and almost-monotonicity for H_beta and its dual."""
    if grid is None:
        grid = log_grid()
    t = np.asarray(grid, dtype=float)
    if t.size == 0:
        raise DomainError("hardy condition check needs a nonempty grid")
    if candidates is None:
        candidates = np.round(np.linspace(-4.0, 4.0, 801), 10)
    b_t = np.asarray(beta(t), dtype=float)
    q_t = q._eval(t)
    qs = limit_exponent(q, t)
    lq = lam / qs

    h_rhs = lq + 1.0 - 1.0 / q_t
    calh_rhs = lq - 1.0 / q_t
    h_margin = float(np.min(h_rhs - b_t))
    calh_margin = float(np.min(b_t - calh_rhs))
    h_rhs0 = lq + 1.0 - 1.0 / q.p0
    calh_rhs_inf = lq - 1.0 / q.p_inf
    h_margin0 = float(np.min(h_rhs0 - b_t))
    calh_margin_inf = float(np.min(b_t - calh_rhs_inf))

    lt = np.log(t)[None, :]
    cand = np.asarray(candidates, dtype=float)[:, None]
    lim = np.log(ALMOST_MONOTONE_FACTOR)

    fa = np.maximum(
        _almost_decreasing_factor((b_t[None, :] - cand) * lt),
        _almost_decreasing_factor((lq[None, :] - b_t[None, :] - cand) * lt),
    )
    fb = np.maximum(
        _almost_increasing_factor((-b_t[None, :] + cand) * lt),
        _almost_increasing_factor((lq[None, :] - b_t[None, :] + cand) * lt),
    )
    ok_a = np.flatnonzero(fa <= lim)
    ok_b = np.flatnonzero(fb <= lim)
    a_val = float(candidates[ok_a[0]]) if ok_a.size else None
    b_val = float(candidates[ok_b[0]]) if ok_b.size else None
    a_fac = float(np.exp(fa[ok_a[0]] if ok_a.size else fa.min()))
    b_fac = float(np.exp(fb[ok_b[0]] if ok_b.size else fb.min()))

    return HardyConditionReport(
        h_condition=h_margin > STRICT_MARGIN,
        h_margin=h_margin,
        calh_condition=calh_margin > STRICT_MARGIN,
        calh_margin=calh_margin,
        h_condition_endpoint=h_margin0 > STRICT_MARGIN,
        h_margin_endpoint=h_margin0,
        calh_condition_endpoint=calh_margin_inf > STRICT_MARGIN,
        calh_margin_endpoint=calh_margin_inf,
        a_value=a_val,
        a_factor=a_fac,
        b_value=b_val,
        b_factor=b_fac,
        beta_limit_finite=beta.at_zero >= 0.0,
    )
