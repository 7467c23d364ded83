"""Command-line entry point.

Every subcommand writes a CSV (stdout unless --out is given), a JSON sidecar
next to the CSV with the resolved configuration, and optionally an SVG line
plot.  Exit codes: 0 success, 1 bad input, 2 a numerical guard or verification
failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import expansion, experiments, oracle, zero_temp
from .errors import DomainError, GuardError, VerificationError
from .kernels import BACKEND
from .model import ModelParams, ThermalPoint, derive, thermal_from_theta, thermal_point

UNITS_NOTE = "Units: hbar = k_B = 1; times in the same units as 1/kappa, angles in radians."

INVERSION_COLUMNS = ["t", "sigma_z"] + [f"w{n}_{k}" for k in (1, 2) for n in range(4)]
SWEEP_COLUMNS = ["theta", "t_max", "t_min", "T", "ln_T"]
TABLE_COLUMNS = ["label", "min", "max"]
SPECTRUM_COLUMNS = ["kappa", "n_ground", "gap"]
GAP_COLUMNS = ["kappa", "gap"]


class UsageError(DomainError):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- output


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if not math.isfinite(v):
        raise GuardError(f"non-finite value {v} in output")
    return repr(v)


def write_csv(columns, rows, path):
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def write_svg(path, x, ys, labels=None, title="", log_y=False):
    """Minimal polyline plot with a frame and axis extents."""
    W, H, m = 640, 400, 50
    x = np.asarray(x, dtype=float)
    series = [np.asarray(y, dtype=float) for y in ys]
    if log_y:
        series = [np.log10(np.maximum(y, 1e-300)) for y in series]
    y_all = np.concatenate(series)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(np.min(y_all)), float(np.max(y_all))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(v):
        return m + (v - x0) / (x1 - x0) * (W - 2 * m)

    def py(v):
        return H - m - (v - y0) / (y1 - y0) * (H - 2 * m)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
        f'<rect x="{m}" y="{m}" width="{W - 2 * m}" height="{H - 2 * m}" fill="none" stroke="black"/>',
        f'<text x="{W / 2}" y="{m / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{m}" y="{H - m / 3}" font-size="11">{x0:.4g}</text>',
        f'<text x="{W - m}" y="{H - m / 3}" text-anchor="end" font-size="11">{x1:.4g}</text>',
        f'<text x="{m - 4}" y="{H - m}" text-anchor="end" font-size="11">{y0:.4g}</text>',
        f'<text x="{m - 4}" y="{m + 10}" text-anchor="end" font-size="11">{y1:.4g}</text>',
    ]
    for i, y in enumerate(series):
        keep = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[keep], y[keep]))
        parts.append(f'<polyline fill="none" stroke="{colors[i % len(colors)]}" stroke-width="1" points="{pts}"/>')
        if labels:
            parts.append(f'<text x="{W - m - 4}" y="{m + 16 + 14 * i}" text-anchor="end" font-size="11" fill="{colors[i % len(colors)]}">{labels[i]}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def write_sidecar(args, metadata):
    target = args.json
    if target is None and args.out is not None:
        target = str(Path(args.out).with_suffix(".json"))
    if target is None:
        return
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    doc = {"command": args.command, "version": __version__, "backend": BACKEND, "config": config, "metadata": metadata}
    Path(target).write_text(json.dumps(_json_safe(doc), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _json_safe(x):
    # infinite beta (zero temperature) is written as the string "inf"
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.integer):
        return int(x)
    return x


# ---------------------------------------------------------------- config files


def read_config(path) -> dict:
    """key=value lines; '#' starts a comment; keys use flag names with '-' or '_'."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}") from None
    for i, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------- helpers


def model_params(args) -> ModelParams:
    return ModelParams(args.omega0, args.omega, args.kappa, args.alpha)


def thermal_spec(args, params) -> ThermalPoint:
    if args.beta is not None and args.theta is not None:
        raise UsageError("give either --beta or --theta, not both")
    if args.beta is not None:
        return thermal_point(args.beta, params)
    th = 0.0 if args.theta is None else args.theta
    if th < 0:
        raise DomainError("theta must be >= 0")
    return thermal_from_theta(th, params)


def time_grid(args):
    if args.steps < 1:
        raise DomainError("steps must be >= 1")
    if args.t1 < args.t0:
        raise DomainError("t1 must be >= t0")
    return np.linspace(args.t0, args.t1, args.steps + 1)


def inversion_rows(trace):
    w = trace.breakdown.weighted
    for i, t in enumerate(trace.t):
        yield [t, trace.sigma_z[i]] + [w[n, k, i] for k in range(2) for n in range(4)]


def sweep_rows(estimates):
    for e in estimates:
        yield [e.theta, e.t_max, e.t_min, e.T, math.log(e.T)]


# ---------------------------------------------------------------- commands


def cmd_inversion(args):
    p = model_params(args)
    th = thermal_spec(args, p)
    trace = experiments.inversion_trace(p, derive(p), th, time_grid(args), args.N)
    write_csv(INVERSION_COLUMNS, inversion_rows(trace), args.out)
    if args.svg:
        write_svg(args.svg, trace.t, [trace.sigma_z], title=f"alpha={p.alpha:g} theta={th.theta:.4g}")
    return {"theta": th.theta, "Theta": th.Theta, "beta": th.beta, "c": derive(p).c}


def _sweep_config(args):
    if args.figure is not None:
        try:
            cfg = experiments.SWEEPS[args.figure]
        except KeyError:
            raise UsageError("sweep figures are 5 and 6") from None
    else:
        cfg = experiments.SWEEPS[5]
    over = {}
    for name in ("alpha", "theta_max", "dt", "kappa", "omega0", "omega"):
        v = getattr(args, name, None)
        if v is not None:
            over[name] = v
    if args.w0 is not None or args.w1 is not None:
        over["window"] = (args.w0 if args.w0 is not None else cfg.window[0], args.w1 if args.w1 is not None else cfg.window[1])
    if args.points is not None:
        over["n_points"] = args.points
    return experiments.SweepConfig(**{**cfg.__dict__, **over})


def cmd_sweep(args):
    cfg = _sweep_config(args)
    estimates, fit = experiments.sweep_and_fit(cfg, args.N)
    write_csv(SWEEP_COLUMNS, sweep_rows(estimates), args.out)
    if args.svg:
        th = [e.theta for e in estimates]
        write_svg(args.svg, th, [[math.log(e.T) for e in estimates], [fit.intercept + fit.slope * x for x in th]], ["ln T", "fit"], title="ln T vs theta")
    return {"n_points": cfg.n_points, "window": list(cfg.window), "dt": cfg.dt, "fit": fit.__dict__}


def cmd_period(args):
    cfg = _sweep_config(args)
    p = cfg.params
    th = thermal_spec(args, p)
    e = experiments.estimate_period(p, th, cfg.window, cfg.dt, args.N)
    write_csv(SWEEP_COLUMNS, sweep_rows([e]), args.out)
    return {"window": list(cfg.window), "dt": cfg.dt, "sigma_at_max": e.sigma_at_max, "sigma_at_min": e.sigma_at_min}


def _spectral(args, refine):
    p = ModelParams(args.omega0, args.omega, 0.0, 0.0)
    grid = np.linspace(0.0, args.kappa_max, args.points)
    return experiments.spectral_figures(p, grid, args.n_max, refine=refine)


def cmd_spectrum(args):
    sd = _spectral(args, refine=False)
    write_csv(SPECTRUM_COLUMNS, zip(sd.kappa, sd.n_ground, sd.gap), args.out)
    if args.svg:
        curves = [np.full(sd.kappa.shape, sd.E00)] + [sd.lower_branch[:, n] for n in range(sd.lower_branch.shape[1])]
        write_svg(args.svg, sd.kappa, curves, title="E00 and E_n2")
    return {"E00": sd.E00, "ground_state_marker": zero_temp.BARE_GROUND}


def cmd_gap(args):
    sd = _spectral(args, refine=True)
    write_csv(GAP_COLUMNS, sd.dips, args.out)
    if args.svg:
        write_svg(args.svg, sd.kappa, [sd.gap], title="excitation gap", log_y=args.log)
    return {"coarse_points": args.points, "dips": len(sd.dips)}


def cmd_short_time(args):
    t = np.linspace(0.0, args.t1, args.steps + 1)
    s = zero_temp.short_time_inversion(args.nbar, args.phi, args.kappa, t, args.theta or 0.0)
    write_csv(["t", "sigma_z"], zip(t, s), args.out)
    meta = {"quadratic_coefficient": -2.0 * args.kappa**2 * (4.0 * args.nbar * math.exp(2 * (args.theta or 0.0)) * math.cos(args.phi) ** 2 + 1.0)}
    if args.oracle:
        p = ModelParams(args.omega0, args.omega0, args.kappa, 0.0)
        meta["oracle_coefficient"] = oracle.rabi_short_time_coefficient(p, math.sqrt(args.nbar), args.phi, oracle.OracleConfig(dim=args.dim))
    return meta


def cmd_verify(args):
    cfg = oracle.OracleConfig(dim=args.dim, safe_buffer=args.buffer)
    if args.all:
        results = oracle.verify_all(cfg, n_max=args.n_max)
    else:
        if not args.identity:
            raise UsageError("give --all or --identity ID")
        results = {(args.identity, args.n): oracle.verify_identity(args.identity, args.n, cfg)}
    write_csv(["identity", "n", "deviation"], ((k, n, d) for (k, n), d in sorted(results.items())), args.out)
    worst = max(results.values())
    if not worst < args.tol:
        bad = sorted(k for k, d in results.items() if not d < args.tol)
        raise VerificationError(f"{len(bad)} identity checks exceed {args.tol:g}, first: {bad[0]}")
    return {"checks": len(results), "max_deviation": worst, "tol": args.tol}


def cmd_oracle_compare(args):
    p = model_params(args)
    d = derive(p)
    th = thermal_spec(args, p)
    cfg = oracle.OracleConfig(dim=args.dim)
    t = time_grid(args)
    cert = oracle.certify_truncation(p, d, th, t, cfg)
    series, _ = expansion.sigma_z_thermal(p, d, th, t, args.N)
    exact = 1.0 - 2.0 * oracle.exact_pg(p, d, th, t, cfg)
    series = np.atleast_1d(series)
    exact = np.atleast_1d(exact)
    write_csv(["t", "sigma_z_series", "sigma_z_exact", "abs_diff"], zip(t, series, exact, np.abs(series - exact)), args.out)
    return {"theta": th.theta, "Theta": th.Theta, "dim": args.dim, "truncation_certificate": cert}


def cmd_reproduce(args):
    if (args.figure is None) == (args.table is None):
        raise UsageError("give exactly one of --figure or --table")
    if args.table is not None:
        rows = experiments.reproduce_table(args.table, N=args.N)
        write_csv(TABLE_COLUMNS, ((r.label, r.min, r.max) for r in rows), args.out)
        return {"table": args.table}
    fig = args.figure
    if fig in experiments.FIGURES:
        trace = experiments.figure_trace(fig, args.N)
        write_csv(INVERSION_COLUMNS, inversion_rows(trace), args.out)
        if args.svg:
            write_svg(args.svg, trace.t, [trace.sigma_z], title=f"figure {fig}")
        cfg = experiments.FIGURES[fig]
        return {"figure": fig, "alpha": cfg.alpha, "theta": cfg.theta, "grid_points": int(trace.t.size)}
    if fig in experiments.SWEEPS:
        estimates, fit = experiments.sweep_and_fit(experiments.SWEEPS[fig], args.N)
        write_csv(SWEEP_COLUMNS, sweep_rows(estimates), args.out)
        if args.svg:
            th = [e.theta for e in estimates]
            write_svg(args.svg, th, [[math.log(e.T) for e in estimates], [fit.intercept + fit.slope * x for x in th]], ["ln T", "fit"], title=f"figure {fig}")
        return {"figure": fig, "n_points": len(estimates), "fit": fit.__dict__}
    if fig in (7, 8, 9):
        p = experiments.default_spectral_params()
        sd = experiments.spectral_figures(p, np.linspace(0.0, 10.0, 2001), refine=fig != 7)
        write_csv(SPECTRUM_COLUMNS, zip(sd.kappa, sd.n_ground, sd.gap), args.out)
        if args.svg:
            if fig == 7:
                curves = [np.full(sd.kappa.shape, sd.E00)] + [sd.lower_branch[:, n] for n in range(sd.lower_branch.shape[1])]
                write_svg(args.svg, sd.kappa, curves, title="figure 7")
            else:
                write_svg(args.svg, sd.kappa, [sd.gap], title=f"figure {fig}", log_y=fig == 9)
        return {"figure": fig, "dips": [list(d) for d in sd.dips]}
    raise UsageError("figures are 1-9")


# ---------------------------------------------------------------- parser


def _add_model(p, alpha=4.0, kappa=1.0):
    p.add_argument("--alpha", type=float, default=alpha, help="real coherent amplitude")
    p.add_argument("--omega0", type=float, default=2.0, help="atomic transition frequency")
    p.add_argument("--omega", type=float, default=4.0, help="cavity frequency")
    p.add_argument("--kappa", type=float, default=kappa, help="real coupling")


def _add_thermal(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--beta", type=float, default=None, help="inverse temperature")
    g.add_argument("--theta", type=float, default=None, help="boson angle theta(beta)")


def _add_grid(p, t1):
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=t1)
    p.add_argument("--steps", type=int, default=10000, help="number of intervals; steps+1 samples")


def _add_output(p, svg=True):
    p.add_argument("--config", default=None, help="key=value file; flags override its values")
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p.add_argument("--json", default=None, help="sidecar path (default: CSV path with .json)")
    if svg:
        p.add_argument("--svg", default=None, help="optional SVG plot path")


def _add_sweep(p):
    p.add_argument("--figure", type=int, default=None, help="5 or 6 selects a preset")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--omega0", type=float, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--w0", type=float, default=None, help="window start")
    p.add_argument("--w1", type=float, default=None, help="window end")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--points", type=int, default=None)


def build_parser() -> Parser:
    parser = Parser(prog="thermal-jcm", description="Jaynes-Cummings inversion at low temperature. " + UNITS_NOTE)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=Parser)
    sub.required = True

    p = sub.add_parser("inversion", help="third-order thermal inversion on a time grid")
    _add_model(p)
    _add_thermal(p)
    _add_grid(p, 20 * math.pi)
    p.add_argument("--N", type=int, default=expansion.DEFAULT_N, help="photon-number truncation")
    _add_output(p)
    p.set_defaults(func=cmd_inversion)

    p = sub.add_parser("sweep-theta", help="revival period over a theta sweep with a ln T line fit")
    _add_sweep(p)
    p.add_argument("--N", type=int, default=expansion.DEFAULT_N)
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("period", help="revival period at one temperature")
    _add_sweep(p)
    _add_thermal(p)
    p.add_argument("--N", type=int, default=expansion.DEFAULT_N)
    _add_output(p, svg=False)
    p.set_defaults(func=cmd_period)

    for name, fn, helptext in (("spectrum", cmd_spectrum, "ground-state index and gap over a kappa scan"), ("gap", cmd_gap, "refined near-degeneracies of the gap")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--omega0", type=float, default=1.0)
        p.add_argument("--omega", type=float, default=1.0)
        p.add_argument("--kappa-max", type=float, default=10.0)
        p.add_argument("--points", type=int, default=2001)
        p.add_argument("--n-max", type=int, default=zero_temp.DEFAULT_N_MAX)
        if name == "gap":
            p.add_argument("--log", action="store_true", help="log scale in the SVG")
        _add_output(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("short-time", help="quadratic short-time law with counter-rotating terms")
    p.add_argument("--nbar", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--omega0", type=float, default=1.0, help="resonant frequency for --oracle")
    p.add_argument("--t1", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--oracle", action="store_true", help="also fit the coefficient from exact evolution")
    p.add_argument("--dim", type=int, default=48)
    _add_output(p, svg=False)
    p.set_defaults(func=cmd_short_time)

    p = sub.add_parser("verify", help="check the operator identity catalog")
    p.add_argument("--all", action="store_true")
    p.add_argument("--identity", default=None, choices=oracle.ALL_IDENTITIES)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--dim", type=int, default=24)
    p.add_argument("--buffer", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_output(p, svg=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle-compare", help="series inversion against the truncated Fock oracle")
    _add_model(p, alpha=2.0)
    _add_thermal(p)
    _add_grid(p, 10.0)
    p.set_defaults(steps=20)
    p.add_argument("--N", type=int, default=expansion.DEFAULT_N)
    p.add_argument("--dim", type=int, default=48)
    _add_output(p, svg=False)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("reproduce", help="datasets for the reference figures and tables")
    p.add_argument("--figure", type=int, default=None, help="1-9")
    p.add_argument("--table", type=int, default=None, help="1 or 2")
    p.add_argument("--N", type=int, default=expansion.DEFAULT_N)
    _add_output(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        sp = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sp._actions}
        unknown = sorted(set(values) - set(actions) - {"help"})
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in values.items():
            if isinstance(actions[key], argparse._StoreTrueAction):
                values[key] = value.lower() in ("1", "true", "yes", "on")
        # config values become defaults; explicit flags parsed afterwards win
        sp.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
        meta = args.func(args)
        write_sidecar(args, meta)
    except GuardError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
