"""Empirical boundedness harness.

An experiment evaluates ratios ||T f|| / ||f|| over a seeded family of test
functions and reads boundedness as refinement stability: the sup ratio must
move by less than 5% when the family doubles and the sampling grid doubles at
the same time.  Divergence is read off three successive family extensions
toward t -> 0 and t -> inf, each of which must grow the sup by at least 1.5x.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from . import operators as ops
from .errors import ConfigError, DivergenceError, HypothesisError, PreconditionError
from .exponent import (
    STRICT_MARGIN,
    ExponentPair,
    VariableExponent,
    WeightExponent,
    check_decay,
    check_hardy_conditions,
    check_sup_condition,
)
from .norms import local_morrey_norm, morrey_lorentz_quasinorm, variable_lorentz_norm
from .operators import ApproxKernel, OmegaKernel
from .sampling import halfline_mesh, line_mesh, plane_mesh
from .signal import (
    GridFunction2D,
    LineStep,
    PowerLaw,
    StepFunction,
    as_line,
    double_star,
    rasterize,
    rearrange,
    rearrange_pieces,
)

DRIFT_TOL = 0.05
GROWTH_FACTOR = 1.5
EXTENSIONS = 3
EXTENSION_FACTOR = 16.0

BOUNDED = "bounded-consistent"
INCONCLUSIVE = "inconclusive"
DIVERGENT = "divergence-witnessed"

THEOREMS = ("T3.1", "T3.2", "T3.3", "C4.1", "C4.2", "C4.3", "L3.3")
GENERATORS = ("characteristic-intervals", "random-steps", "power-profiles", "dyadic-combs")


# -- function families ---------------------------------------------------------------


@dataclass(frozen=True)
class FunctionFamily:
    generator: str = "random-steps"
    count: int = 50
    seed: int = 0
    scale_range: tuple = (0.1, 10.0)
    grid_m: int = 4
    dilations: tuple = (1.0,)

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown family generator {self.generator!r}")
        if self.count < 1:
            raise PreconditionError("a function family needs at least one member")
        lo, hi = self.scale_range
        if not (0 < lo <= hi):
            raise ConfigError("scale_range must satisfy 0 < min <= max")

    def base_scales(self) -> np.ndarray:
        lo, hi = self.scale_range
        if self.count == 1:
            return np.array([float(lo)])
        return np.geomspace(lo, hi, self.count)

    def _indexed(self):
        base = self.base_scales()
        return [(i, float(s * d)) for d in self.dilations for i, s in enumerate(base)]

    def scales(self) -> np.ndarray:
        return np.array([s for _, s in self._indexed()])

    def _rng(self, i: int):
        return np.random.default_rng([self.seed, i])

    def _member(self, i: int, scale: float) -> StepFunction:
        rng = self._rng(i)
        if self.generator == "characteristic-intervals":
            return StepFunction.characteristic(scale, 1.0, start=scale * float(rng.uniform(0.0, 1.0)))
        if self.generator == "random-steps":
            k = int(rng.integers(1, 9))
            lengths = rng.uniform(0.2, 1.0, k)
            values = rng.uniform(0.05, 1.0, k)
            if rng.uniform() < 0.5:
                lengths = np.concatenate(([rng.uniform(0.1, 1.0)], lengths))
                values = np.concatenate(([0.0], values))
            return StepFunction.from_pieces(values, scale * lengths / lengths.sum())
        if self.generator == "power-profiles":
            alpha = float(rng.uniform(0.05, 0.4))
            return PowerLaw(1.0, alpha, scale).to_step(pieces=32, decades=6.0)
        j = 1 + i % 4
        teeth = 2 ** (j + 1)
        values = np.tile([1.0, 0.0], teeth // 2)
        return StepFunction.from_pieces(values, np.full(teeth, scale / teeth))

    def members(self) -> List[StepFunction]:
        return [self._member(i, s) for i, s in self._indexed()]

    def lines(self) -> List[LineStep]:
        return [m.to_line() for m in self.members()]

    def grids(self) -> List[GridFunction2D]:
        """Planar members: squares of side ``scale`` centred at the origin."""
        out = []
        m = self.grid_m
        for i, s in self._indexed():
            rng = self._rng(i)
            if self.generator == "characteristic-intervals":
                vals = np.ones((m, m))
            elif self.generator == "random-steps":
                vals = rng.uniform(0.05, 1.0, (m, m)) * (rng.uniform(size=(m, m)) < 0.75)
                if not vals.any():
                    vals[m // 2, m // 2] = 1.0
            elif self.generator == "power-profiles":
                alpha = float(rng.uniform(0.05, 0.4))
                c = (np.arange(m) + 0.5) / m - 0.5
                r = np.hypot(c[:, None], c[None, :])
                vals = r ** (-2 * alpha)
            else:
                vals = ((np.arange(m)[:, None] + np.arange(m)[None, :]) % 2 == 0).astype(float)
            out.append(GridFunction2D((-0.5 * s, -0.5 * s), float(s), vals))
        return out

    def grown(self) -> "FunctionFamily":
        return replace(self, count=2 * self.count)

    def extended(self, k: int) -> "FunctionFamily":
        """The family together with its copies dilated by 16^-j and 16^j, j <= k.

        Each member keeps its shape, so a scale-invariant ratio stays put while
        a power-law blow-up at either endpoint shows as geometric growth.
        """
        f = EXTENSION_FACTOR
        return replace(self, dilations=tuple(f**j for j in range(-k, k + 1)))

    def shell(self, k: int) -> "FunctionFamily":
        """Only the copies added by the k-th extension."""
        f = EXTENSION_FACTOR
        return replace(self, dilations=(f**-k, f**k))

    def to_config(self) -> dict:
        return {"generator": self.generator, "count": str(self.count), "seed": str(self.seed),
                "dilations": ",".join(repr(float(d)) for d in self.dilations),
                "scale_min": repr(float(self.scale_range[0])),
                "scale_max": repr(float(self.scale_range[1])), "grid_m": str(self.grid_m)}


# -- reports ---------------------------------------------------------------------------


@dataclass
class Verdict:
    name: str
    passed: bool
    margin: float
    gating: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "margin": _num(self.margin),
                "gating": bool(self.gating), "note": self.note}


@dataclass
class ComponentStats:
    ratios: List[Optional[float]]
    scales: List[float]
    sup: float
    refined_sup: float
    drift: float
    extension_sups: List[float]
    growth: List[float]
    diverging: bool
    divergent_members: int = 0

    def to_dict(self) -> dict:
        return {"ratios": [_num(r) for r in self.ratios], "scales": [_num(s) for s in self.scales],
                "sup": _num(self.sup), "refinedSup": _num(self.refined_sup), "drift": _num(self.drift),
                "extensionSups": [_num(s) for s in self.extension_sups],
                "growth": [_num(g) for g in self.growth], "diverging": self.diverging,
                "divergentMembers": self.divergent_members}


@dataclass
class BoundednessReport:
    theorem: str
    hypotheses: List[Verdict]
    components: Dict[str, ComponentStats]
    sup_ratio: float
    drift: float
    verdict: str
    exploratory: bool
    config: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)

    @property
    def hypotheses_passed(self) -> bool:
        return all(v.passed for v in self.hypotheses if v.gating)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "hypotheses": [v.to_dict() for v in self.hypotheses],
            "components": {k: c.to_dict() for k, c in self.components.items()},
            "supRatio": _num(self.sup_ratio),
            "refinementDrift": _num(self.drift),
            "verdict": self.verdict,
            "exploratory": self.exploratory,
            "measured": {k: _num(v) for k, v in self.measured.items()},
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "index", "scale", "ratio"])
        for name in sorted(self.components):
            c = self.components[name]
            for i, (s, r) in enumerate(zip(c.scales, c.ratios)):
                w.writerow([name, i, repr(float(s)), "" if r is None else _num(r)])
        return buf.getvalue()


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "infinite" if x > 0 else "-infinite"
    return x


# -- hypotheses ----------------------------------------------------------------------------


def verify_hypotheses(pair: ExponentPair, beta=None, theorem: str = "T3.1",
                      delta: Optional[float] = None, dimension: int = 1) -> List[Verdict]:
    """Named verdicts for the hypotheses of one theorem.

    ``beta`` defaults to 1/p - 1/q (the Lorentz weight); it is only taken from
    the caller for the Hardy experiment ``L3.3``.
    """
    if theorem not in THEOREMS:
        raise ConfigError(f"unknown theorem id {theorem!r}; expected one of {', '.join(THEOREMS)}")
    p, q, lam = pair.p, pair.q, pair.lam
    out = [Verdict("q_minus > 1", q.p_minus > 1.0, q.p_minus - 1.0)]
    if theorem.startswith("C4"):
        out.append(Verdict("p_minus > 1", p.p_minus > 1.0, p.p_minus - 1.0))
    elif theorem != "L3.3":
        out.append(Verdict("p_minus >= 1", p.p_minus >= 1.0, p.p_minus - 1.0))
    out.append(Verdict("0 <= lambda < 1", 0.0 <= lam < 1.0, 1.0 - lam))
    sup = check_sup_condition(q, lam)
    out.append(Verdict("sup condition", sup.finite, (1.0 - lam) / q.at_zero,
                       note=f"sup {sup.sup_value!r}"))
    if theorem != "L3.3":
        dp = check_decay(p)
        out.append(Verdict("p log-decay", dp.passed,
                           min(dp.a0 - dp.a0_hat, dp.a_inf - dp.a_inf_hat)))
    dq = check_decay(q)
    out.append(Verdict("q log-decay", dq.passed, min(dq.a0 - dq.a0_hat, dq.a_inf - dq.a_inf_hat)))
    w = pair.beta if (beta is None or theorem != "L3.3") else ops._as_weight(beta)
    hc = check_hardy_conditions(w, q, lam)
    needs_calh = theorem != "T3.1"
    out.append(Verdict("H-condition", hc.h_condition, hc.h_margin))
    out.append(Verdict("calH-condition", hc.calh_condition, hc.calh_margin, gating=needs_calh))
    out.append(Verdict("H-condition (endpoint form)", hc.h_condition_endpoint,
                       hc.h_margin_endpoint, gating=False))
    out.append(Verdict("calH-condition (endpoint form)", hc.calh_condition_endpoint,
                       hc.calh_margin_endpoint, gating=False))
    out.append(Verdict("almost-monotone powers", hc.monotone_condition,
                       min(hc.a_factor, hc.b_factor), gating=False,
                       note=f"factor {hc.monotone_factor!r} is a tool choice"))
    out.append(Verdict("finite limit of t^beta", hc.beta_limit_finite, 0.0, gating=False))
    if theorem not in ("T3.1", "L3.3"):
        bound = min(q.at_zero, q.at_inf)
        margin = bound - lam * p.p_plus
        out.append(Verdict("lambda p_plus < min(q(0), q(inf))", margin > STRICT_MARGIN, margin))
        out.append(Verdict("lambda p_plus < q*(t) for all t", margin > STRICT_MARGIN, margin,
                           gating=False, note="q* takes only the values q(0), q(inf)"))
    if theorem == "C4.1" and delta is not None:
        margin = delta - (dimension - 1) / 2.0
        out.append(Verdict("delta > (n-1)/2", margin > 0, margin))
    return out


# -- harness --------------------------------------------------------------------------------

MemberFn = Callable[[object, int], Dict[str, Optional[float]]]


def _evaluate(family: FunctionFamily, members_of, member_fn: MemberFn, refine: int):
    members = members_of(family)
    rows = []
    for m in members:
        try:
            rows.append(member_fn(m, refine))
        except DivergenceError:
            rows.append(None)
    return rows


def _sup(values) -> float:
    vals = [v for v in values if v is not None]
    return max(vals) if vals else 0.0


def run_harness(theorem: str, hypotheses: List[Verdict], family: FunctionFamily, members_of,
                member_fn: MemberFn, components, refine: int = 0, config: Optional[dict] = None,
                measured: Optional[dict] = None) -> BoundednessReport:
    """Base run, grown-and-refined run and three extensions, then a verdict."""
    base = _evaluate(family, members_of, member_fn, refine)
    fine = _evaluate(family.grown(), members_of, member_fn, refine + 1)
    # extension k is the union of shells 0..k, so its sup is a running max
    shells = [_evaluate(family.shell(k), members_of, member_fn, refine)
              for k in range(1, EXTENSIONS + 1)]
    scales = family.scales().tolist()
    stats = {}
    for name in components:
        def col(rows):
            return [math.inf if r is None else r.get(name) for r in rows]

        ratios = col(base)
        sup = _sup(ratios)
        refined = _sup(col(fine))
        drift = abs(refined - sup) / sup if sup > 0 and math.isfinite(sup) else (
            0.0 if refined == sup else math.inf)
        ext = []
        for rows in shells:
            ext.append(max(ext[-1] if ext else sup, _sup(col(rows))))
        chain = [sup] + ext
        growth = [b / a if a > 0 and math.isfinite(a) and math.isfinite(b) else math.nan
                  for a, b in zip(chain[:-1], chain[1:])]
        diverging = all(g >= GROWTH_FACTOR for g in growth)
        stats[name] = ComponentStats(ratios, scales, sup, refined, drift, ext, growth, diverging,
                                     sum(r is None for r in base))
    sup_ratio = max(c.sup for c in stats.values())
    drift = max(c.drift for c in stats.values())
    gate_ok = all(v.passed for v in hypotheses if v.gating)
    if any(c.diverging for c in stats.values()):
        verdict = DIVERGENT
    elif drift < DRIFT_TOL and gate_ok and math.isfinite(sup_ratio) and not any(
        any(g >= GROWTH_FACTOR for g in c.growth) for c in stats.values()
    ):
        verdict = BOUNDED
    else:
        verdict = INCONCLUSIVE
    return BoundednessReport(theorem, hypotheses, stats, sup_ratio, drift, verdict,
                             exploratory=not gate_ok, config=dict(config or {}),
                             measured=dict(measured or {}))


def _ratio(num: float, den: float) -> Optional[float]:
    if den == 0.0:
        return None if num == 0.0 else math.inf
    return num / den


def _gate(hyps: List[Verdict], gate: bool):
    if gate:
        failed = [v.name for v in hyps if v.gating and not v.passed]
        if failed:
            raise HypothesisError("hypotheses fail: " + "; ".join(failed))


def _step_from_samples(values: np.ndarray, edges: np.ndarray) -> StepFunction:
    """Samples on consecutive cells of (0, T] as a step function."""
    return StepFunction(edges[1:], np.maximum(values, 0.0))


def _sampled_rearrangement(values, lengths) -> StepFunction:
    return rearrange_pieces(np.abs(values), lengths)


# -- Hardy operators -----------------------------------------------------------------------


def hardy_boundedness(beta, q: VariableExponent, lam: float, family: FunctionFamily,
                      refine: int = 0, gate: bool = False,
                      config: Optional[dict] = None) -> BoundednessReport:
    """Ratios of local Morrey norms of H_beta phi and calH_beta phi to that of phi."""
    w = ops._as_weight(beta)
    pair = ExponentPair(q, q, lam)
    hyps = verify_hypotheses(pair, w, "L3.3")
    _gate(hyps, gate)

    def member(phi: StepFunction, r: int):
        den = local_morrey_norm(phi, q, lam).value
        ts, _, edges = halfline_mesh(r, phi.breakpoints)
        out = {}
        try:
            h = ops.hardy_H(phi, w, ts)
            out["H"] = _ratio(local_morrey_norm(_step_from_samples(h, edges), q, lam).value, den)
        except DivergenceError:
            out["H"] = math.inf
        c = ops.hardy_calH(phi, w, ts)
        out["calH"] = _ratio(local_morrey_norm(_step_from_samples(c, edges), q, lam).value, den)
        return out

    return run_harness("L3.3", hyps, family, FunctionFamily.members, member, ("H", "calH"),
                       refine, config)


# -- maximal operator -----------------------------------------------------------------------


def _line_output(op, f: LineStep, refine: int, extent=None):
    x, lengths = line_mesh(f, refine, extent)
    return _sampled_rearrangement(op(f, x), lengths)


def _norm_fn(pair: ExponentPair, norm: str):
    if norm == "lorentz":
        return lambda g: variable_lorentz_norm(g, pair.p, pair.q).value
    if norm == "morrey-lorentz":
        return lambda g: morrey_lorentz_quasinorm(g, pair).value
    raise ConfigError(f"unknown norm {norm!r} for an operator experiment")


def maximal_boundedness(pair: ExponentPair, family: FunctionFamily, refine: int = 0,
                        gate: bool = False, norm: str = "morrey-lorentz",
                        config: Optional[dict] = None) -> BoundednessReport:
    hyps = verify_hypotheses(pair, None, "T3.1")
    _gate(hyps, gate)
    nf = _norm_fn(pair, norm)

    def member(f: LineStep, r: int):
        den = nf(rearrange(f))
        return {"M": _ratio(nf(_line_output(ops.maximal_1d, f, r)), den)}

    return run_harness("T3.1", hyps, family, FunctionFamily.lines, member, ("M",), refine, config)


# -- Calderon-Zygmund operator ----------------------------------------------------------------


def _calderon_profiles(fstar: StepFunction, refine: int):
    """f** and the tail integral of f*(s)/s sampled on the half-line mesh."""
    ts, _, edges = halfline_mesh(refine, fstar.breakpoints)
    head = double_star(fstar, ts)
    tail = ops.calderon_S(fstar, ts) - fstar.integral(ts)
    return _step_from_samples(head, edges), _step_from_samples(tail, edges)


def calderon_constant(f: LineStep, refine: int = 0, tgrid=None, averaged: bool = False) -> float:
    """max over the t-grid of (Hf)*(t) / S f*(t) for one function."""
    fstar = rearrange(f)
    hstar = _line_output(ops.hilbert_step, f, refine)
    if tgrid is None:
        s = fstar.support_end
        tgrid = s * np.logspace(-2.0, 2.0, 64)
    t = np.asarray(tgrid, dtype=float)
    return float(np.max(np.asarray(hstar(t)) / np.asarray(ops.calderon_S(fstar, t, averaged=averaged))))


def cz_boundedness(pair: ExponentPair, family: FunctionFamily, refine: int = 0,
                   gate: bool = False, config: Optional[dict] = None) -> BoundednessReport:
    """Hilbert-transform ratios together with the two Hardy terms of its proof."""
    hyps = verify_hypotheses(pair, None, "T3.2")
    _gate(hyps, gate)
    beta = pair.beta
    constants = []

    def member(f: LineStep, r: int):
        fstar = rearrange(f)
        den = morrey_lorentz_quasinorm(fstar, pair).value
        head, tail = _calderon_profiles(fstar, r)
        out = {
            "hilbert": _ratio(morrey_lorentz_quasinorm(_line_output(ops.hilbert_step, f, r), pair).value, den),
            "I1": _ratio(local_morrey_norm(head, pair.q, pair.lam, weight=beta).value, den),
            "I2": _ratio(local_morrey_norm(tail, pair.q, pair.lam, weight=beta).value, den),
        }
        if r == refine:
            constants.append(calderon_constant(f, r, averaged=True))
        return out

    rep = run_harness("T3.2", hyps, family, FunctionFamily.lines, member, ("hilbert", "I1", "I2"),
                      refine, config)
    rep.measured["calderonConstant"] = max(constants) if constants else math.nan
    return rep


# -- sublinear operators ------------------------------------------------------------------------

SUBLINEAR_OPS = ("marcinkiewicz", "bochner-majorant-dominated", "identity-sup")


def sublinear_boundedness(op: str, pair: ExponentPair, family: FunctionFamily, refine: int = 0,
                          gate: bool = False, kernel: Optional[ApproxKernel] = None,
                          omega: Optional[OmegaKernel] = None, delta: float = 1.0,
                          eps_points: int = 16, config: Optional[dict] = None) -> BoundednessReport:
    if op not in SUBLINEAR_OPS:
        raise ConfigError(f"unknown sublinear operator {op!r}")
    theorem = {"marcinkiewicz": "C4.3", "bochner-majorant-dominated": "C4.1",
               "identity-sup": "C4.2"}[op]
    hyps = verify_hypotheses(pair, None, theorem, delta=delta, dimension=1)
    measured = {}
    if op == "marcinkiewicz":
        omega = omega or OmegaKernel("cos")
        rep = ops.omega_check(omega)
        hyps += [Verdict("Omega mean zero", rep.mean_zero, -abs(rep.mean_value)),
                 Verdict("Omega Lipschitz", rep.lipschitz, omega.lip_constant - rep.lip_estimate)]
        if not rep.mean_zero:
            raise PreconditionError("Omega violates the mean-zero condition; experiment refused")
    _gate(hyps, gate)

    if op == "marcinkiewicz":
        measured["dominationConstant"] = marcinkiewicz_domination(family, omega)

        def sampled(g, r):
            pts, areas = plane_mesh(g, r, levels=3)
            mu = ops.marcinkiewicz_mu(g, omega, pts)
            return morrey_lorentz_quasinorm(_sampled_rearrangement(mu, areas), pair).value

        def member(g: GridFunction2D, r: int):
            den = morrey_lorentz_quasinorm(rasterize(g), pair).value
            # midpoint sampling of mu converges at first order near the jump lines
            # of g, so extrapolate from meshes r and r + 1
            out = 2.0 * sampled(g, r + 1) - sampled(g, r)
            return {"mu": _ratio(max(out, 0.0), den)}

        return run_harness(theorem, hyps, family, FunctionFamily.grids, member, ("mu",),
                           refine, config, measured)

    if op == "identity-sup":
        kernel = kernel or ApproxKernel("poisson")

        def apply(f, x):
            return ops.identity_sup(f, kernel, x, ops.default_eps_grid(f, eps_points))
    else:
        def apply(f, x):
            return ops.bochner_majorant_operator(f, x, delta, ops.default_eps_grid(f, eps_points))

    measured["dominationConstant"] = max(
        pointwise_domination(apply, f) for f in family.lines()[: min(family.count, 8)]
    )

    def member(f: LineStep, r: int):
        den = morrey_lorentz_quasinorm(rearrange(f), pair).value
        return {op: _ratio(morrey_lorentz_quasinorm(_line_output(apply, f, r), pair).value, den)}

    return run_harness(theorem, hyps, family, FunctionFamily.lines, member, (op,), refine,
                       config, measured)


def pointwise_domination(apply, f: LineStep, refine: int = 0) -> float:
    """max of T f / M f over the line mesh: the measured domination constant."""
    x, _ = line_mesh(f, refine)
    num = np.asarray(apply(f, x))
    den = ops.maximal_1d(f, x)
    ok = den > 0
    return float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0


def identity_domination(family: FunctionFamily, kernel: ApproxKernel, eps_points: int = 16,
                        refine: int = 0) -> float:
    """Domination constant of sup_eps |A_eps f| by M f over a family."""
    def apply(f, x):
        return ops.identity_sup(f, kernel, x, ops.default_eps_grid(f, eps_points))

    return max(pointwise_domination(apply, f, refine) for f in family.lines())


def marcinkiewicz_domination(family: FunctionFamily, omega: OmegaKernel, points: int = 25,
                             refine: int = 0, members: int = 4) -> float:
    """max of mu_Omega g / dominated_convolution(g) at points off the support."""
    best = 0.0
    for g in family.grids()[:members]:
        pts = marcinkiewicz_sample_points(g, points)
        mu = ops.marcinkiewicz_mu(g, omega, pts, refine=refine)
        dom = ops.dominated_convolution(g, pts, omega, refine=refine)
        ok = dom > 0
        if np.any(ok):
            best = max(best, float(np.max(mu[ok] / dom[ok])))
    return best


def marcinkiewicz_sample_points(g: GridFunction2D, n: int = 25) -> np.ndarray:
    """n points on rings at 1.25x to 8x the half-diagonal, at irrational angles."""
    cx, cy = g.center
    k = np.arange(n)
    radius = 0.5 * math.sqrt(2.0) * g.side * (1.25 * (8.0 / 1.25) ** (k / max(n - 1, 1)))
    ang = 2.0 * np.pi * ((k * 0.6180339887498949) % 1.0)
    return np.column_stack((cx + radius * np.cos(ang), cy + radius * np.sin(ang)))


# -- rearrangement sandwich --------------------------------------------------------------------------


@dataclass
class SandwichResult:
    c_est: float
    C_est: float
    drift: float
    ratios: np.ndarray
    refined: tuple

    def to_dict(self) -> dict:
        return {"cEst": _num(self.c_est), "CEst": _num(self.C_est), "drift": _num(self.drift),
                "refined": [_num(v) for v in self.refined]}


def default_tgrid(family: FunctionFamily, n: int = 64) -> np.ndarray:
    lo, hi = family.scale_range
    return np.geomspace(1e-2 * lo, 1e2 * hi, n)


def _sandwich_ratios(lines, tgrid, refine: int) -> np.ndarray:
    extent = 4.0 * float(np.max(tgrid))
    out = np.empty((len(lines), tgrid.size))
    for i, f in enumerate(lines):
        mstar = _line_output(ops.maximal_1d, f, refine, extent)
        out[i] = np.asarray(mstar(tgrid)) / double_star(rearrange(f), tgrid)
    return out


def sandwich_experiment(family: FunctionFamily, tgrid=None, refine: int = 0) -> SandwichResult:
    """Window [c, C] of (Mf)*(t) / f**(t) and its drift under grid doubling."""
    t = default_tgrid(family) if tgrid is None else np.asarray(tgrid, dtype=float)
    lines = family.lines()
    base = _sandwich_ratios(lines, t, refine)
    fine = _sandwich_ratios(lines, t, refine + 1)
    c0, C0 = float(base.min()), float(base.max())
    c1, C1 = float(fine.min()), float(fine.max())
    drift = max(abs(c1 - c0) / c0, abs(C1 - C0) / C0) if c0 > 0 else math.inf
    return SandwichResult(c0, C0, drift, base, (c1, C1))


# -- Calderon domination -----------------------------------------------------------------------------


@dataclass
class DominationResult:
    C_est: float
    drift: float
    constants: List[float]
    refined: float

    def to_dict(self) -> dict:
        return {"CEst": _num(self.C_est), "drift": _num(self.drift), "refined": _num(self.refined),
                "constants": [_num(c) for c in self.constants]}


def calderon_domination(family: FunctionFamily, refine: int = 0,
                        averaged: bool = False) -> DominationResult:
    """Smallest C with (Hf)* <= C S f* on each member's t-grid, and its drift."""
    lines = family.lines()
    base = [calderon_constant(f, refine, averaged=averaged) for f in lines]
    fine = max(calderon_constant(f, refine + 1, averaged=averaged) for f in lines)
    c = max(base)
    return DominationResult(c, abs(fine - c) / c if c > 0 else math.inf, base, fine)
