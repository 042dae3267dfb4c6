"""Command-line front end.

Every command writes CSV tables and SVG plots to ``--out`` and finishes with
``manifest.json``. Exit status: 0 on success, 2 for invalid arguments, 3 for
numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import asymptotics as asy
from . import general_fading as gen
from . import montecarlo as mc
from .artifacts import Plot, RunManifest, write_csv
from .fading import make_gamma, make_rayleigh, parse_model
from .numerics import InversionParams
from .sic_exact import SystemConfig, mean_deviation, mean_deviation_bound, moment_profile, transition_profile

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

_DEFAULTS = {
    "xi": 0.0,
    "epsilon": 0.1,
    "model": "rayleigh",
    "replications": 10_000,
    "seed": 0,
    "mode": "sic",
    "alpha_range": "0.05:1.5:291",
    "xi_range": "0:0.4:41",
    "out": "sicasy-out",
}


_GAMMA_SHAPES = "4,2,1,0.5"


class UsageError(ValueError):
    pass


def _parse_range(text: str, name: str) -> np.ndarray:
    """``lo:hi:count`` or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, k = text.split(":")
            k = int(k)
            if k < 1:
                raise UsageError(f"{name}: empty range")
            return np.linspace(float(lo), float(hi), k)
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name}: cannot parse {text!r}") from None
    if not vals:
        raise UsageError(f"{name}: empty range")
    return np.array(vals)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flags")
    common.add_argument("--n", type=int, help="number of concurrent packets")
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--alpha", type=float, help="load factor, gamma = 1/(alpha n)")
    grp.add_argument("--gamma", type=float, help="target SNIR (linear)")
    common.add_argument("--xi", type=float, help="residual interference fraction")
    common.add_argument("--epsilon", type=float, help="single-packet outage probability")
    common.add_argument("--model", help="rayleigh | gamma:<eta> | two-level:<b>")
    common.add_argument("--replications", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")

    p = argparse.ArgumentParser(prog="sicasy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("pv-curve", parents=[common], help="exact P(V_j >= c) over ranks")
    sub.add_parser("moments", parents=[common], help="mean +- sd of V_j against the limit curve")
    s = sub.add_parser("sumrate", parents=[common], help="asymptotic sum-rate against alpha")
    s.add_argument("--alpha-range", dest="alpha_range", help="lo:hi:count or list")
    s = sub.add_parser("optimal", parents=[common], help="optimal alpha against xi")
    s.add_argument("--xi-range", dest="xi_range", help="lo:hi:count or list")
    s = sub.add_parser("general", parents=[common], help="general fading sum-rate sweeps")
    s.add_argument("--alpha-range", dest="alpha_range")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--etas", help="Gamma shapes, comma list")
    g.add_argument("--scovs", help="squared coefficients of variation, comma list")
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo decoding run")
    s.add_argument("--mode", choices=["sic", "capture"])
    return p


def _merge(args: argparse.Namespace) -> dict:
    """Config-file values, overridden by explicit flags, over defaults."""
    opts = dict(_DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        opts.update({k.replace("-", "_"): v for k, v in cfg.items()})
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    if ("alpha" in flags or "gamma" in flags):
        opts.pop("alpha", None)
        opts.pop("gamma", None)
    opts.update(flags)
    if opts.get("alpha") is not None and opts.get("gamma") is not None:
        raise UsageError("--alpha and --gamma are mutually exclusive")
    return opts


def _system(opts: dict, model=None) -> SystemConfig:
    if opts.get("n") is None:
        raise UsageError("--n is required")
    n = int(opts["n"])
    xi, eps = float(opts["xi"]), float(opts["epsilon"])
    if opts.get("alpha") is not None:
        return SystemConfig.scaled(n, float(opts["alpha"]), xi, eps, model)
    if opts.get("gamma") is not None:
        return SystemConfig.with_gamma(n, float(opts["gamma"]), xi, eps, model)
    raise UsageError("one of --alpha or --gamma is required")


def _params(opts: dict, keys: Sequence[str]) -> dict:
    return {k: opts.get(k) for k in keys}


# ----------------------------------------------------------------------------
# commands


def cmd_pv_curve(opts: dict, man: RunManifest) -> None:
    cfg = _system(opts)
    if cfg.xi != 0.0:
        raise UsageError("exact inversion unsupported for ξ>0; use montecarlo")
    prof = moment_profile(cfg)
    tp = transition_profile(cfg, InversionParams())
    j = np.arange(1, cfg.n + 1)
    man.record(write_csv(os.path.join(man.output_dir, "pv_curve.csv"), "pv_curve",
                         ["j", "x", "mu", "sigma", "p_v"],
                         zip(j.tolist(), tp.x, prof.mu, prof.sigma, tp.p)))
    man.record(write_csv(os.path.join(man.output_dir, "pv_summary.csv"), "pv_summary",
                         ["n", "alpha", "epsilon", "transition", "zeta"],
                         [(cfg.n, cfg.alpha, cfg.epsilon, tp.location, tp.zeta)]))
    plot = Plot(f"P(V_j >= c), n={cfg.n}, alpha={cfg.alpha:.4g}", "j/n", "p_V(j)")
    plot.add(tp.x, tp.p, label="exact")
    plot.vlines.append((tp.zeta, "zeta"))
    man.record(plot.save(os.path.join(man.output_dir, "pv_curve.svg")))


def cmd_moments(opts: dict, man: RunManifest) -> None:
    cfg = _system(opts)
    prof = moment_profile(cfg)
    f = asy.curve(cfg.alpha, cfg.xi).f(prof.x)
    lo, hi = prof.mu - prof.sigma, prof.mu + prof.sigma
    j = np.arange(1, cfg.n + 1)
    man.record(write_csv(os.path.join(man.output_dir, "moments.csv"), "moments",
                         ["j", "x", "mu", "mu_minus_sigma", "mu_plus_sigma", "f"],
                         zip(j.tolist(), prof.x, prof.mu, lo, hi, f)))
    delta = mean_deviation(cfg, prof)
    bound = mean_deviation_bound(cfg)
    man.record(write_csv(os.path.join(man.output_dir, "moments_summary.csv"), "moments_summary",
                         ["n", "alpha", "xi", "mean_abs_deviation", "deviation_bound"],
                         [(cfg.n, cfg.alpha, cfg.xi, delta, bound)]))
    for logy, name in ((False, "moments_linear.svg"), (True, "moments_log.svg")):
        title = f"V_j mean +- sd, n={cfg.n}, alpha={cfg.alpha:.4g}, xi={cfg.xi:g}"
        plot = Plot(title, "j/n", "V_j", logy=logy)
        if logy:
            floor = max(float(np.min(prof.mu[prof.mu > 0])) * 1e-2, 1e-12) if np.any(prof.mu > 0) else 1e-12
            band_lo = np.maximum(lo, floor)
            plot.add(prof.x, prof.mu, "mean", band_lo, np.maximum(hi, floor))
        else:
            plot.add(prof.x, prof.mu, "mean", lo, hi)
        plot.add(prof.x, f, "limit curve", dashed=True)
        plot.hlines.append((cfg.c, "c"))
        man.record(plot.save(os.path.join(man.output_dir, name)))


def cmd_sumrate(opts: dict, man: RunManifest) -> None:
    xi, eps = float(opts["xi"]), float(opts["epsilon"])
    alphas = _parse_range(str(opts["alpha_range"]), "alpha range")
    if np.any(alphas <= 0):
        raise UsageError("alpha range must be positive")
    c = make_rayleigh().threshold(eps)
    rows = []
    for a in alphas:
        r = asy.zeta(asy.curve(a, xi), c)
        cap = (1.0 - eps) * math.exp(-1.0 / a) / (a * asy.LN2)
        rows.append((a, r.zeta, r.u_infinity, cap, r.regime))
    man.record(write_csv(os.path.join(man.output_dir, "sumrate.csv"), "sumrate",
                         ["alpha", "zeta", "u_infinity", "capture_u_infinity", "regime"], rows))
    plot = Plot(f"Asymptotic sum-rate, xi={xi:g}", "alpha", "U_inf [bit/s/Hz]")
    plot.add(alphas, [r[2] for r in rows], "SIC")
    plot.add(alphas, [r[3] for r in rows], "capture only", dashed=True)
    plot.hlines.append((asy.capture_optimum(eps)[1], "capture optimum"))
    man.record(plot.save(os.path.join(man.output_dir, "sumrate.svg")))


def cmd_optimal(opts: dict, man: RunManifest) -> None:
    eps = float(opts["epsilon"])
    xis = _parse_range(str(opts["xi_range"]), "xi range")
    if np.any((xis < 0) | (xis >= 1)):
        raise UsageError("xi range must lie in [0, 1)")
    c = make_rayleigh().threshold(eps)
    rows = []
    for xi in xis:
        o = asy.optimize_alpha(float(xi), c)
        rows.append((xi, o.alpha_star, o.u_star, o.zeta_star, o.jump))
    man.record(write_csv(os.path.join(man.output_dir, "optimal.csv"), "optimal",
                         ["xi", "alpha_star", "u_star", "zeta_star", "jump_alpha"], rows))
    plot = Plot("Optimal load and peak sum-rate", "xi", "value")
    plot.add(xis, [r[2] for r in rows], "U*_inf")
    plot.add(xis, [r[1] for r in rows], "alpha*")
    plot.vlines.append((asy.continuity_threshold(c), "no jump beyond"))
    man.record(plot.save(os.path.join(man.output_dir, "optimal.svg")))


def cmd_general(opts: dict, man: RunManifest) -> None:
    eps = float(opts["epsilon"])
    alphas = _parse_range(str(opts["alpha_range"]), "alpha range")
    if np.any(alphas <= 0):
        raise UsageError("alpha range must be positive")
    spec = str(opts["model"]).strip().lower()
    sweep = spec == "gamma" or opts.get("etas") is not None or opts.get("scovs") is not None
    if sweep:
        if opts.get("scovs") is not None:
            scovs = _parse_range(str(opts["scovs"]), "scov list")
            if np.any(scovs <= 0):
                raise UsageError("SCOV values must be positive")
            etas = 1.0 / scovs
        else:
            etas = _parse_range(str(opts.get("etas") or _GAMMA_SHAPES), "eta list")
        if np.any(etas <= 0):
            raise UsageError("Gamma shapes must be positive")
        models = [make_gamma(e) for e in etas]
    else:
        try:
            models = [parse_model(spec)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    rows, best = [], []
    plot = Plot("Asymptotic sum-rate, general fading", "alpha", "U_inf [bit/s/Hz]")
    for m in models:
        u = gen.u_infinity_curve(m, alphas, eps)
        for a, val in zip(alphas, u):
            rows.append((m.name, m.scov, a, val * a * asy.LN2, val))
        k = int(np.argmax(u))
        best.append((m.name, m.scov, alphas[k], u[k], k in (0, len(alphas) - 1)))
        plot.add(alphas, u, m.name)
    ray = gen.u_infinity_curve(make_rayleigh(), alphas, eps)
    plot.add(alphas, ray, "rayleigh", dashed=True)
    man.record(write_csv(os.path.join(man.output_dir, "general_sweep.csv"), "general_sweep",
                         ["model", "scov", "alpha", "x_star", "u_infinity"], rows))
    man.record(write_csv(os.path.join(man.output_dir, "general_max.csv"), "general_max",
                         ["model", "scov", "alpha_star", "u_star", "on_grid_edge"], best))
    man.record(plot.save(os.path.join(man.output_dir, "general_curves.svg")))
    order = sorted(best, key=lambda r: r[1])
    mplot = Plot("Peak asymptotic sum-rate against SCOV", "SCOV", "max U_inf [bit/s/Hz]")
    mplot.add([r[1] for r in order], [r[3] for r in order], "grid maximum")
    man.record(mplot.save(os.path.join(man.output_dir, "general_max.svg")))


def cmd_simulate(opts: dict, man: RunManifest) -> None:
    d = {k: opts[k] for k in ("n", "alpha", "gamma", "xi", "epsilon", "model",
                              "replications", "seed", "mode") if opts.get(k) is not None}
    plan = mc.plan_from_dict(d)
    rep = mc.run(plan)
    n = plan.config.n
    man.record(write_csv(os.path.join(man.output_dir, "simulate_histogram.csv"), "simulate_histogram",
                         ["decoded", "count"],
                         zip(range(n + 1), rep.decoded_count_histogram.tolist())))
    marg = rep.marginal_vj_freq if rep.marginal_vj_freq is not None else [None] * n
    x = np.arange(1, n + 1) / n
    man.record(write_csv(os.path.join(man.output_dir, "simulate_ranks.csv"), "simulate_ranks",
                         ["j", "x", "success_freq", "vj_marginal_freq"],
                         zip(range(1, n + 1), x, rep.per_rank_success_freq, marg)))
    cfg = plan.config
    summary = [(plan.mode, plan.model.name, n, cfg.gamma, cfg.alpha, cfg.xi, cfg.epsilon,
                plan.replications, plan.master_seed, rep.mean_decoded, rep.mean_decoded_se,
                rep.sum_rate)]
    if plan.mode == "capture":
        ref = asy.capture_baseline(n, cfg.gamma, cfg.epsilon).m_n if plan.model.name == "rayleigh" else None
    else:
        ref = asy.zeta_of_alpha(cfg.alpha, cfg.xi, cfg.c) * n if plan.model.name == "rayleigh" else None
    summary = [summary[0] + (ref,)]
    man.record(write_csv(os.path.join(man.output_dir, "simulate_summary.csv"), "simulate_summary",
                         ["mode", "model", "n", "gamma", "alpha", "xi", "epsilon", "replications",
                          "seed", "mean_decoded", "mean_decoded_se", "sum_rate", "reference"],
                         summary))
    path = os.path.join(man.output_dir, "simulate_report.json")
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(rep.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    man.record(path)
    plot = Plot(f"Per-rank success, {plan.mode}, n={n}", "j/n", "frequency")
    plot.add(x, rep.per_rank_success_freq, "decoded")
    if rep.marginal_vj_freq is not None:
        plot.add(x, rep.marginal_vj_freq, "P(V_j >= c)", dashed=True)
    man.record(plot.save(os.path.join(man.output_dir, "simulate_ranks.svg")))
    print(f"wall time {rep.wall_time:.2f} s", file=sys.stderr)


COMMANDS = {
    "pv-curve": (cmd_pv_curve, ("n", "alpha", "gamma", "epsilon")),
    "moments": (cmd_moments, ("n", "alpha", "gamma", "xi", "epsilon")),
    "sumrate": (cmd_sumrate, ("xi", "epsilon", "alpha_range")),
    "optimal": (cmd_optimal, ("epsilon", "xi_range")),
    "general": (cmd_general, ("model", "etas", "scovs", "alpha_range", "epsilon")),
    "simulate": (cmd_simulate, ("n", "alpha", "gamma", "xi", "epsilon", "model",
                                "replications", "seed", "mode")),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    fn, keys = COMMANDS[args.command]
    try:
        opts = _merge(args)
        out = str(opts["out"])
        os.makedirs(out, exist_ok=True)
        man = RunManifest(args.command, _params(opts, keys), out, args.config)
        fn(opts, man)
        man.write()
    except (UsageError, ValueError, TypeError, NotImplementedError) as exc:
        print(f"sicasy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"sicasy {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {len(man.artifact_hashes)} files to {out}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
