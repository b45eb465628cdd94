"""Command-line experiment runner.

Each subcommand validates its parameters, runs one experiment with seeded
streams and writes ``report.json`` plus CSV tables into ``--out``. A JSON
``--config`` file mirrors the flags one-to-one; explicit flags win.

Exit status: 0 success, 2 invalid input, 3 a numerical flag (divergence or
loss of convergence where convergence was expected).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .grid import (
    Grid,
    RngStream,
    SampledPath,
    make_geometric_grid,
    make_uniform_grid,
    read_path_csv,
    sample_brownian,
    write_path_csv,
)

EXIT_OK, EXIT_INVALID, EXIT_FLAG = 0, 2, 3


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ output


def _prepare(obj):
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_prepare(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"\x00{x:.17g}\x00"
    return obj


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    text = json.dumps(_prepare(obj), indent=2, sort_keys=True)
    return re.sub(r'"\\u0000(.*?)\\u0000"', r"\1", text)


def write_csv(dest: Path, header: list[str], rows) -> None:
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([f"{float(x):.17g}" if isinstance(x, (float, np.floating)) else x for x in r])


# ------------------------------------------------------------- generators


def parse_generator(spec: str) -> tuple[str, dict]:
    """``"power:eta=0.3"`` -> ``("power", {"eta": 0.3})``."""
    name, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"malformed generator parameter {item!r}")
        params[key.strip()] = float(val)
    if name not in ("power", "brownian", "fbm"):
        raise ConfigError(f"unknown generator {name!r}")
    return name, params


def generate_path(spec: str, N: int, seed: int, stream: int = 0) -> SampledPath:
    from .roughvol import KernelSpec, make_noise, rl_fbm

    name, params = parse_generator(spec)
    if name == "power":
        g = make_uniform_grid(1.0 / N, 1.0, N)
        return SampledPath(g, g.points ** params.get("eta", 0.5))
    if name == "brownian":
        return sample_brownian(make_uniform_grid(0.0, 1.0, N + 1), RngStream(seed, stream))
    noise = make_noise(1.0, N, RngStream(seed, stream))
    return rl_fbm(noise, KernelSpec(params.get("H", 0.4)))


# ------------------------------------------------------------- commands


def cmd_norms(args, out: Path) -> tuple[dict, int]:
    from .grid import positive_part
    from .norms import estimate_exponents, singular_besov_norm, singular_holder_seminorm

    path = read_path_csv(args.input) if args.input else generate_path(args.generator, args.N, args.seed)
    if path.t[0] <= 0:
        path = positive_part(path)
    rep = singular_holder_seminorm(path, args.alpha, args.eta)
    est = estimate_exponents(path)
    write_csv(out / "eps_profile.csv", ["eps", "profile"], rep.eps_profile.tolist())
    report = {
        "value": rep.value,
        "alpha": args.alpha,
        "eta": args.eta,
        "alpha_hat": est.alpha_hat,
        "eta_hat": est.eta_hat,
        "eps_profile": rep.eps_profile,
        "flags": {"degenerate": est.degenerate, "low_confidence": est.low_confidence},
    }
    if args.q is not None:
        report["besov"] = singular_besov_norm(path, args.delta, args.q, args.eta)
    return report, EXIT_OK


def cmd_young(args, out: Path) -> tuple[dict, int]:
    from .integrate import improper_young

    if args.y_csv and args.x_csv:
        Y, X = read_path_csv(args.y_csv), read_path_csv(args.x_csv)
    elif args.generator == "power":
        g = make_geometric_grid(1.0, args.levels, args.per_level)
        Y = SampledPath(g, g.points ** args.eta1)
        X = SampledPath(g, g.points ** args.eta2)
    else:
        raise ConfigError("young needs --generator power or both --y-csv and --x-csv")
    rep = improper_young(Y, X, eta1=args.eta1, eta2=args.eta2)
    write_csv(out / "sequence.csv", ["n", "anchor", "I_n"],
              [[n, float(a), float(v)] for n, (a, v) in enumerate(zip(rep.anchors, rep.sequence))])
    return rep.to_dict(), EXIT_FLAG if rep.diverged else EXIT_OK


def _power_rough_path(a: float, b: float, levels: int, per_level: int, alpha: float, beta: float):
    """``X = t^a``, ``X_hat = t^b`` with the exact second level."""
    from .grid import TwoParamField
    from .integrate import ControlledPath, InhomRoughPath

    g = make_geometric_grid(1.0, levels, per_level)
    t = g.points
    X, Xh = SampledPath(g, t ** a), SampledPath(g, t ** b)

    def rule(i, j):
        s, u = t[i], t[j]
        if abs(a + b) < 1e-14:
            head = a * (np.log(u) - np.log(s))
        else:
            head = a / (a + b) * (u ** (a + b) - s ** (a + b))
        return np.where(i == j, 0.0, head - s ** b * (u ** a - s ** a))

    rp = InhomRoughPath(X, Xh, TwoParamField(g, rule), alpha, beta)
    cp = ControlledPath(Xh, SampledPath(g, np.ones(t.size)), Xh, 1.0 - beta)
    return rp, cp


def cmd_rough(args, out: Path) -> tuple[dict, int]:
    from .integrate import ControlledPath, InhomRoughPath, improper_rough, levy_area_leftpoint
    from .roughvol import KernelSpec, build_W_triple, make_noise, rl_fbm

    if args.generator == "fbm":
        kernel = KernelSpec(args.H)
        noise = make_noise(1.0, args.N, RngStream(args.seed))
        rp_full = build_W_triple(noise, kernel)
        keep = slice(1, None)
        g = Grid(rp_full.X.t[keep])
        X = SampledPath(g, rp_full.X.values[keep])
        Xh = SampledPath(g, rp_full.X_hat.values[keep])
        rp = InhomRoughPath(X, Xh, levy_area_leftpoint(Xh, X), rp_full.alpha, rp_full.beta)
        WH = rl_fbm(noise, kernel)
        cp = ControlledPath(SampledPath(g, WH.values[keep]), SampledPath(g, np.ones(len(g))), Xh, 1.0 - rp.beta)
        # H - 0.02: just below H and distinct from beta = H - 0.01, which the conditions exclude
        eta1 = args.H - 0.02 if args.eta1 is None else args.eta1
        eta2 = rp.alpha + rp.beta if args.eta2 is None else args.eta2
    else:
        rp, cp = _power_rough_path(args.a, args.b, args.levels, args.per_level, 0.45, 0.45)
        eta1 = args.b if args.eta1 is None else args.eta1
        eta2 = args.a if args.eta2 is None else args.eta2
    rep = improper_rough(cp, rp, eta1=eta1, eta2=eta2, stride=args.stride)
    write_csv(out / "sequence.csv", ["n", "anchor", "Z_n"],
              [[n, float(a), float(v)] for n, (a, v) in enumerate(zip(rep.anchors, rep.sequence))])
    write_path_csv(rep.Z.Y, out / "Z.csv")
    d = rep.to_dict()
    d["eta1"], d["eta2"] = eta1, eta2
    return d, EXIT_FLAG if rep.diverged else EXIT_OK


def cmd_sle(args, out: Path) -> tuple[dict, int]:
    from .norms import estimate_exponents, reparametrize_power, singular_holder_seminorm
    from .sle import TraceConfig, alpha_star, loewner_trace_detail, sle_regularity_experiment

    if not 0 <= args.kappa < 8:
        raise ConfigError("kappa must lie in [0, 8)")
    cfg = TraceConfig(n=args.steps, c_tip=args.c_tip)
    g = cfg.grid()
    driver = sample_brownian(g, RngStream(args.seed))
    driver = SampledPath(g, math.sqrt(args.kappa) * driver.values)
    tr = loewner_trace_detail(driver, cfg)
    write_path_csv(tr.path, out / "trace.csv")
    gamma = SampledPath(Grid(g.points[1:]), tr.path.values[1:])
    est = estimate_exponents(reparametrize_power(gamma, 2.0))
    prof = singular_holder_seminorm(gamma, args.alpha, args.eta).eps_profile
    report = {
        "kappa": args.kappa,
        "alpha_star": alpha_star(args.kappa),
        "alpha_hat": est.alpha_hat,
        "alpha_hat_median": est.alpha_hat,
        "flagged_points": tr.n_flagged,
        "eps_profile": prof.tolist(),
    }
    if args.reps:
        exp = sle_regularity_experiment(
            args.kappa,
            TraceConfig(n=args.levels * args.per_level, c_tip=args.c_tip, geometric_levels=args.levels),
            args.reps,
            RngStream(args.seed, 1),
            alpha=args.alpha,
            eta=args.eta,
            workers=args.workers,
        )
        report["experiment"] = exp.to_dict()
        report["alpha_hat_median"] = exp.alpha_hat_median
        report["eps_profile"] = exp.eps_profile.tolist()
    write_csv(out / "eps_profile.csv", ["eps", "profile"], report["eps_profile"])
    return report, EXIT_FLAG if tr.n_flagged else EXIT_OK


def cmd_roughvol(args, out: Path) -> tuple[dict, int]:
    from .grid import map_replications
    from .roughvol import KernelSpec, MollifierSpec, renorm_constant
    from .sle import TREND_TOL

    kernel = KernelSpec(args.H, args.T)
    rows, flagged = [], False
    for i, e in enumerate(args.eps_list):
        m = MollifierSpec(e)
        mc = renorm_constant(kernel, m, "mc", rng=RngStream(args.seed, 100 + i), replications=args.mc_reps)
        flagged |= mc.flagged
        rows.append([e, mc.value, mc.stderr, renorm_constant(kernel, m, "double_integral").value,
                     renorm_constant(kernel, m).value])
    write_csv(out / "renorm.csv", ["epsilon", "c_mc", "c_mc_se", "c_quad", "c_closed"], rows)
    reps = map_replications(_roughvol_rep, [(args.H, args.T, args.steps, RngStream(args.seed).spawn(r))
                                            for r in range(args.reps)], args.workers)
    slopes = np.array([r[0] for r in reps])
    endpoint = np.array([r[1] for r in reps])
    report = {
        "H": args.H,
        "renorm": [dict(zip(["epsilon", "c_mc", "c_mc_se", "c_quad", "c_closed"], r)) for r in rows],
        "remainder_profile_slopes": slopes,
        "stable_profile_fraction": float(np.mean(slopes >= -TREND_TOL)) if slopes.size else None,
        "var_WH_T": float(np.var(endpoint, ddof=1)) if endpoint.size > 1 else None,
        "var_WH_T_theory": args.T ** (2 * args.H) / (2 * args.H),
        "flags": {"mc_stderr_over_10pct": bool(flagged)},
    }
    return report, EXIT_OK


def _roughvol_rep(a):
    from .roughvol import KernelSpec, make_noise, remainder_diagnostics, rl_fbm

    H, T, steps, stream = a
    kernel = KernelSpec(H, T)
    noise = make_noise(T, steps, stream)
    return remainder_diagnostics(noise, kernel).profile_slope, rl_fbm(noise, kernel).values[-1]


def cmd_wongzakai(args, out: Path) -> tuple[dict, int]:
    from .roughvol import wong_zakai_experiment

    rep = wong_zakai_experiment(
        args.f, args.H, args.eps_list, args.reps, RngStream(args.seed),
        T=args.T, N=args.steps, mc_replications=args.mc_reps, workers=args.workers,
    )
    write_csv(out / "wongzakai.csv",
              ["epsilon", "c_mc", "c_quad", "c_closed", "err_corrected_median", "err_uncorrected_median"],
              rep.rows())
    d = rep.to_dict()
    decreasing = bool(np.all(np.diff(rep.sup_errors) < 0))
    d["flags"] = {"corrected_error_decreasing": decreasing}
    return d, EXIT_OK if decreasing else EXIT_FLAG


COMMANDS = {
    "norms": cmd_norms,
    "young": cmd_young,
    "rough": cmd_rough,
    "sle": cmd_sle,
    "roughvol": cmd_roughvol,
    "wongzakai": cmd_wongzakai,
}


# ------------------------------------------------------------------ parser


def _eps_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="results")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--config", default=None, help="JSON file whose keys mirror the flags")

    parser = argparse.ArgumentParser(prog="singularpaths", description="Singular path experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("norms", parents=[common], help="singular Hölder norms and exponent estimates")
    p.add_argument("--input", default=None, help="path CSV (t,value)")
    p.add_argument("--generator", default="brownian", help="power:eta=..., brownian or fbm:H=...")
    p.add_argument("--N", type=int, default=4096)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--eta", type=float, default=0.4)
    p.add_argument("--delta", type=float, default=0.6, help="Besov smoothness (with --q)")
    p.add_argument("--q", type=float, default=None, help="Besov integrability; enables the Besov norm")
    subs["norms"] = p

    p = sub.add_parser("young", parents=[common], help="improper Young integral of power paths or CSVs")
    p.add_argument("--generator", default="power")
    p.add_argument("--y-csv", default=None)
    p.add_argument("--x-csv", default=None)
    p.add_argument("--eta1", type=float, default=-0.2)
    p.add_argument("--eta2", type=float, default=0.6)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--per-level", type=int, default=256)
    subs["young"] = p

    p = sub.add_parser("rough", parents=[common], help="improper rough integral")
    p.add_argument("--generator", choices=["fbm", "power"], default="fbm")
    p.add_argument("--H", type=float, default=0.4)
    p.add_argument("--N", type=int, default=4096)
    p.add_argument("--a", type=float, default=0.2, help="power generator: X = t^a")
    p.add_argument("--b", type=float, default=-0.3, help="power generator: X_hat = t^b")
    p.add_argument("--levels", type=int, default=14)
    p.add_argument("--per-level", type=int, default=64)
    p.add_argument("--eta1", type=float, default=None)
    p.add_argument("--eta2", type=float, default=None)
    p.add_argument("--stride", type=int, default=1)
    subs["rough"] = p

    p = sub.add_parser("sle", parents=[common], help="Loewner traces and SLE regularity")
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=4096)
    p.add_argument("--reps", type=int, default=0)
    p.add_argument("--c-tip", type=float, default=0.25)
    p.add_argument("--alpha", type=float, default=0.65)
    p.add_argument("--eta", type=float, default=0.45)
    p.add_argument("--levels", type=int, default=12)
    p.add_argument("--per-level", type=int, default=256)
    subs["sle"] = p

    for name, help_ in (("roughvol", "renormalisation constants and remainder diagnostics"),
                        ("wongzakai", "renormalised Wong-Zakai experiment")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--H", type=float, default=0.4)
        p.add_argument("--T", type=float, default=1.0)
        p.add_argument("--eps-list", type=_eps_list, default=[2.0 ** -k for k in range(3, 8)])
        p.add_argument("--reps", type=int, default=50)
        p.add_argument("--steps", type=int, default=None if name == "wongzakai" else 2048)
        p.add_argument("--mc-reps", type=int, default=100_000)
        p.add_argument("--f", choices=["cos", "sinplus2", "rational", "one"], default="cos")
        subs[name] = p
    return parser, subs


def resolve_args(argv: list[str]) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = dict(cfg.get("config", cfg))
        cfg.pop("command", None)
        cfg.pop("config", None)
        known = {a.dest for a in subs[args.command]._actions}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        subs[args.command].set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = resolve_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        report, status = COMMANDS[args.command](args, out)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    resolved = {k: v for k, v in vars(args).items() if k != "config"}
    report = {"command": args.command, "config": resolved, "exit_status": status, **report}
    (out / "report.json").write_text(dumps(report) + "\n")
    return status


def main() -> None:
    sys.exit(run())
