"""Command-line entry point: ``morreylorentz {norm,apply,rearrange,verify}``.

Exit codes: 0 success, 2 malformed config, 3 infinite norm or violated
operator precondition, 4 divergence witnessed, 5 inconclusive, 6 hypotheses
fail with gating on.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from . import experiments as ex
from . import operators as ops
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    HypothesisError,
    MorreyLorentzError,
    PreconditionError,
)
from .norms import (
    NormResult,
    lebesgue_norm,
    local_morrey_norm,
    morrey_lorentz_quasinorm,
    variable_lorentz_norm,
)
from .signal import GridFunction2D, LineStep, StepFunction, as_line, double_star, rasterize, rearrange

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFINITE = 3
EXIT_DIVERGENT = 4
EXIT_INCONCLUSIVE = 5
EXIT_HYPOTHESIS = 6

VERDICT_EXIT = {ex.BOUNDED: EXIT_OK, ex.DIVERGENT: EXIT_DIVERGENT, ex.INCONCLUSIVE: EXIT_INCONCLUSIVE}
NORMS = ("lebesgue", "local-morrey", "lorentz", "morrey-lorentz")
EXPERIMENTS = ex.THEOREMS + ("sandwich", "calderon")


class Run:
    """Parsed arguments plus the materialized config."""

    def __init__(self, args, command: str):
        self.args = args
        self.base = Path(args.config).resolve().parent
        self.cp = cfg.load(args.config, command)
        if args.seed is not None:
            self.cp["run"]["seed"] = str(args.seed)
            self.cp["family"]["seed"] = str(args.seed)
        if args.refine is not None:
            self.cp["run"]["refine"] = str(args.refine)
        self.refine = cfg.get_int(self.cp, "run", "refine")
        self.out = Path(args.out) if args.out else None

    def write(self, name: str, text: str):
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)

    def emit(self, text: str):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "infinite" if x > 0 else "-infinite"
    return repr(x)


# -- norm --------------------------------------------------------------------------------


def _half_line(f) -> StepFunction:
    if isinstance(f, StepFunction):
        return f
    return rearrange(f)


def cmd_norm(run: Run) -> int:
    cp = run.cp
    name = cp.get("norm", "name").strip()
    if name not in NORMS:
        raise ConfigError(f"[norm] name must be one of {', '.join(NORMS)}")
    f = cfg.function(cp, run.base)
    lam = cfg.get_float(cp, "norm", "lambda")
    try:
        if name == "lebesgue":
            res = lebesgue_norm(f if not isinstance(f, GridFunction2D) else rasterize(f),
                                cfg.exponent(cp, "p"))
        elif name == "local-morrey":
            if not (0.0 <= lam < 1.0):
                raise ConfigError("[norm] lambda must lie in [0, 1)")
            res = local_morrey_norm(_half_line(f), cfg.exponent(cp, "q"), lam)
        elif name == "lorentz":
            res = variable_lorentz_norm(f, cfg.exponent(cp, "p"), cfg.exponent(cp, "q"))
        else:
            res = morrey_lorentz_quasinorm(f, cfg.pair(cp, "norm"))
    except DivergenceError:
        res = NormResult(math.inf)
    body = dict(res.to_dict(), norm=name, config=cfg.as_dict(cp))
    run.write("norm.json", json.dumps(body, sort_keys=True, indent=2) + "\n")
    if run.args.json:
        run.emit(res.to_json())
    elif run.args.csv:
        run.emit(res.to_csv_row())
    else:
        run.emit(_fmt(res.value))
    return EXIT_OK if res.finite else EXIT_INFINITE


# -- apply -------------------------------------------------------------------------------

OPERATORS_1D = ("maximal", "hilbert", "dominated", "identity", "identity-sup", "bochner-majorant",
                "calderon", "double-star", "hardy-H", "hardy-calH", "bochner-kernel")
OPERATORS_2D = ("maximal-2d", "marcinkiewicz", "marcinkiewicz-F", "dominated-2d")


def _points_1d(cp):
    if not cp.has_option("apply", "points"):
        raise ConfigError("[apply] points is required")
    return np.asarray(cfg.floats(cp.get("apply", "points")), dtype=float)


def _points_2d(cp):
    text = cp.get("apply", "points", fallback="").strip()
    rows = [r for r in text.split(";") if r.strip()]
    try:
        pts = np.array([[float(v) for v in r.replace(",", " ").split()] for r in rows], dtype=float)
    except ValueError:
        raise ConfigError("[apply] points for planar operators are 'x y; x y; ...'") from None
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ConfigError("[apply] points for planar operators are 'x y; x y; ...'")
    return pts


def _apply_1d(op: str, f, x, cp, refine: int):
    if op == "calderon":
        return ops.calderon_S(rearrange(f), x, averaged=cfg.get_bool(cp, "apply", "averaged")
                              if cp.has_option("apply", "averaged") else False)
    if op == "double-star":
        return double_star(rearrange(f), x)
    if op in ("hardy-H", "hardy-calH"):
        phi = _half_line(f)
        w = cfg.weight(cp, "apply")
        return (ops.hardy_H if op == "hardy-H" else ops.hardy_calH)(phi, w, x)
    if op == "bochner-kernel":
        return ops.bochner_riesz_majorant(cfg.get_float(cp, "apply", "r"), x,
                                          cfg.get_float(cp, "apply", "delta"),
                                          cfg.get_int(cp, "apply", "dimension"))
    line = as_line(f)
    if op == "maximal":
        return ops.maximal_1d(line, x)
    if op == "hilbert":
        return ops.hilbert_step(line, x)
    if op == "dominated":
        return ops.dominated_convolution(line, x, exclusion=cfg.get_float(cp, "apply", "exclusion"))
    if op == "identity":
        return ops.identity_approx(line, cfg.kernel(cp, "apply"), cfg.get_float(cp, "apply", "eps"), x)
    if op == "identity-sup":
        grid = ops.default_eps_grid(line, cfg.get_int(cp, "apply", "eps_points"))
        return ops.identity_sup(line, cfg.kernel(cp, "apply"), x, grid)
    grid = ops.default_eps_grid(line, cfg.get_int(cp, "apply", "eps_points"))
    return ops.bochner_majorant_operator(line, x, cfg.get_float(cp, "apply", "delta"), grid)


def cmd_apply(run: Run) -> int:
    cp = run.cp
    op = cp.get("apply", "operator", fallback="").strip()
    if op not in OPERATORS_1D + OPERATORS_2D:
        raise ConfigError(f"[apply] operator must be one of {', '.join(OPERATORS_1D + OPERATORS_2D)}")
    f = cfg.function(cp, run.base)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if op in OPERATORS_2D:
        if not isinstance(f, GridFunction2D):
            raise ConfigError(f"[apply] {op} needs a grid function")
        if op == "maximal-2d":
            vals = ops.maximal_2d(f, refine=run.refine)
            pts = f.cell_centers().reshape(-1, 2)
            vals = vals.reshape(-1)
        else:
            pts = _points_2d(cp)
            omega = cfg.omega(cp)
            if op == "marcinkiewicz":
                vals = ops.marcinkiewicz_mu(f, omega, pts, refine=run.refine)
            elif op == "marcinkiewicz-F":
                vals = ops.marcinkiewicz_F(f, omega, cfg.get_float(cp, "apply", "t"), pts,
                                           refine=run.refine)
            else:
                vals = ops.dominated_convolution(f, pts, omega, refine=run.refine)
        w.writerow(["x", "y", "value"])
        for (px, py), v in zip(pts, np.atleast_1d(vals)):
            w.writerow([_fmt(px), _fmt(py), _fmt(v)])
    else:
        if isinstance(f, GridFunction2D):
            raise ConfigError(f"[apply] {op} needs a function on the line")
        x = _points_1d(cp)
        vals = np.atleast_1d(np.asarray(_apply_1d(op, f, x, cp, run.refine), dtype=float))
        w.writerow(["point", "value"])
        for px, v in zip(x, vals):
            w.writerow([_fmt(px), _fmt(v)])
    text = buf.getvalue()
    run.write("apply.csv", text)
    run.emit(text)
    return EXIT_OK


# -- rearrange ---------------------------------------------------------------------------


def cmd_rearrange(run: Run) -> int:
    fstar = rearrange(cfg.function(run.cp, run.base))
    text = fstar.to_csv()
    run.write("rearranged.csv", text)
    if run.args.json:
        run.emit(json.dumps({"breakpoints": [_fmt(b) for b in fstar.breakpoints],
                             "values": [_fmt(v) for v in fstar.values]}, sort_keys=True))
    else:
        run.emit(text)
    return EXIT_OK


# -- verify ------------------------------------------------------------------------------


def _report_exit(run: Run, rep: ex.BoundednessReport) -> int:
    run.write("report.json", rep.to_json())
    run.write("report.csv", rep.to_csv())
    run.write("config.ini", cfg.dumps(run.cp))
    if run.args.json:
        run.emit(rep.to_json())
    elif run.args.csv:
        run.emit(rep.to_csv())
    else:
        tag = " (exploratory)" if rep.exploratory else ""
        run.emit(f"{rep.theorem} {rep.verdict}{tag} supRatio={_fmt(rep.sup_ratio)} "
                 f"drift={_fmt(rep.drift)}")
    return VERDICT_EXIT[rep.verdict]


def _window_exit(run: Run, name: str, body: dict, ok: bool) -> int:
    body = dict(body, experiment=name, config=cfg.as_dict(run.cp))
    text = json.dumps(body, sort_keys=True, indent=2) + "\n"
    run.write("report.json", text)
    run.write("config.ini", cfg.dumps(run.cp))
    if run.args.json:
        run.emit(text)
    else:
        run.emit(f"{name} {'stable' if ok else 'unstable'} "
                 + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(body.items())
                            if isinstance(v, float)))
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_verify(run: Run) -> int:
    cp = run.cp
    exp = cp.get("verify", "experiment").strip()
    if exp not in EXPERIMENTS:
        raise ConfigError(f"[verify] experiment must be one of {', '.join(EXPERIMENTS)}")
    fam = cfg.family(cp)
    gate = cfg.get_bool(cp, "run", "gate")
    r = run.refine
    replay = cfg.as_dict(cp)
    if exp == "sandwich":
        res = ex.sandwich_experiment(fam, refine=r)
        ok = 0 < res.c_est and math.isfinite(res.C_est) and res.drift < 0.10
        return _window_exit(run, exp, {"cEst": res.c_est, "CEst": res.C_est, "drift": res.drift}, ok)
    if exp == "calderon":
        res = ex.calderon_domination(fam, refine=r)
        ok = math.isfinite(res.C_est) and res.drift < 0.10
        return _window_exit(run, exp, {"CEst": res.C_est, "drift": res.drift}, ok)
    if exp == "L3.3":
        lam = cfg.get_float(cp, "verify", "lambda")
        rep = ex.hardy_boundedness(cfg.weight(cp, "verify"), cfg.exponent(cp, "q"), lam, fam,
                                   refine=r, gate=gate, config=replay)
        return _report_exit(run, rep)
    pair = cfg.pair(cp, "verify")
    if exp == "T3.1":
        rep = ex.maximal_boundedness(pair, fam, r, gate, cp.get("verify", "norm").strip(), replay)
    elif exp == "T3.2":
        rep = ex.cz_boundedness(pair, fam, r, gate, replay)
    else:
        op = {"C4.1": "bochner-majorant-dominated", "C4.2": "identity-sup",
              "C4.3": "marcinkiewicz"}.get(exp) or cp.get("verify", "operator",
                                                           fallback="identity-sup").strip()
        rep = ex.sublinear_boundedness(
            op, pair, fam, r, gate,
            kernel=cfg.kernel(cp, "verify"),
            omega=cfg.omega(cp) if op == "marcinkiewicz" else None,
            delta=cfg.get_float(cp, "verify", "delta"),
            eps_points=cfg.get_int(cp, "verify", "eps_points"),
            config=replay,
        )
    return _report_exit(run, rep)


# -- entry point ---------------------------------------------------------------------------

COMMANDS = {"norm": cmd_norm, "apply": cmd_apply, "rearrange": cmd_rearrange, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morreylorentz",
                                     description="Norms, operators and boundedness experiments "
                                                 "on local variable Morrey-Lorentz spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("norm", "compute a norm of a function"),
                            ("apply", "evaluate an operator on a grid of points"),
                            ("rearrange", "decreasing rearrangement of a function"),
                            ("verify", "run a boundedness experiment")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH", help="INI run configuration")
        p.add_argument("--out", metavar="DIR", help="directory for output files")
        p.add_argument("--seed", type=int, help="override the family seed")
        p.add_argument("--refine", type=int, help="override the refinement level")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="print JSON to stdout")
        fmt.add_argument("--csv", action="store_true", help="print CSV to stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = Run(args, args.command)
        cmd = run.cp.get("run", "command").strip()
        if cmd != args.command:
            raise ConfigError(f"config is for command {cmd!r}, not {args.command!r}")
        if args.command == "apply":
            try:
                return cmd_apply(run)
            except HypothesisError as exc:
                raise PreconditionError(str(exc)) from None
        return COMMANDS[args.command](run)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisError as exc:
        print(f"hypothesis gate: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DivergenceError as exc:
        print(f"infinite: {exc}", file=sys.stderr)
        return EXIT_INFINITE
    except (PreconditionError, DomainError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_INFINITE
    except MorreyLorentzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
