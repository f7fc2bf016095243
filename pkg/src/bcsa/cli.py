"""Command-line front end: simulation, analysis, and figure recipes.

Every output file starts with `# key: value` metadata lines (schema
version, subcommand, resolved config as JSON, seed) followed by a CSV
table, or is a single JSON document carrying the same keys.  Runs are
deterministic given the seed, so re-running the metadata reproduces the
data rows byte for byte.  Files are written to a temp path and moved
into place atomically.

Exit codes: 0 success, 2 flag or validation errors, 3 output I/O errors,
4 domain errors raised by the underlying modules.
"""

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import csma as csma_mod
from . import de as de_mod
from . import dist as dist_mod
from . import efapprox as ef_mod
from . import montecarlo as mc_mod
from . import optimizer as opt_mod
from . import stopsets as ss_mod

SCHEMA = 1
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DOMAIN = 4

EXAMPLE_DIST = "0.5x^2+0.5x^4"
TUNED_DIST = "0.86x^3+0.14x^8"


class UsageError(Exception):
    pass


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.10g" % value
    return str(value)


def _write_csv(path, command, config, seed, columns, rows):
    lines = [f"# schema: {SCHEMA}", f"# command: {command}",
             f"# config: {json.dumps(config, sort_keys=True)}",
             f"# seed: {seed}", ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_json(path, command, config, seed, payload):
    doc = {"schema": SCHEMA, "command": command, "config": config,
           "seed": seed}
    doc.update(payload)
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _atomic_write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_range(text, log=False):
    """start:stop:count, inclusive; count points, log-spaced on request."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must be start:stop:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}: {exc}") from None
    if count < 1 or hi < lo:
        raise UsageError(f"empty range {text!r}")
    if count == 1:
        return [lo]
    if log:
        if lo <= 0:
            raise UsageError("log range needs positive endpoints")
        return list(np.geomspace(lo, hi, count))
    return list(np.linspace(lo, hi, count))


def _g_points(args, n, mode):
    """Resolve --m / --g / --g-range into (g, m) pairs for one frame size."""
    offset = 1 if mode == "broadcast" else 0
    if args.m is not None:
        return [((args.m + offset) / n, args.m)]
    if args.g is not None:
        gs = [args.g]
    elif args.g_range is not None:
        gs = _parse_range(args.g_range)
    else:
        raise UsageError("one of --m, --g, --g-range is required")
    pairs = []
    for g in gs:
        m = max(round(g * n) - offset, 1)
        pairs.append(((m + offset) / n, m))
    return pairs


def _dist_arg(args):
    try:
        return dist_mod.DegreeDistribution.from_string(args.dist)
    except ValueError as exc:
        raise UsageError(f"bad --dist: {exc}") from None


def _config_dict(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


# ---------------------------------------------------------------- sim

def _cmd_sim(args):
    if args.recipe:
        return _run_recipe(args)
    d = _dist_arg(args)
    columns = ["g", "m", "frames", "p_bar", "ci_low", "ci_high"]
    rows = []
    for g, m in _g_points(args, args.n, args.mode):
        cfg = mc_mod.SimConfig(
            original_dist=d, m=m, n=args.n, eps=args.eps, mode=args.mode,
            frames=args.frames, target_rel_ci=args.target_rel_ci,
            max_frames=args.max_frames, seed=args.seed)
        report = mc_mod.run(cfg)
        rows.append([g, m, report.frames, report.p_bar, report.p_bar_low,
                     report.p_bar_high])
    cfg_keys = ["dist", "n", "m", "g", "g_range", "eps", "mode", "frames",
                "target_rel_ci", "max_frames"]
    _write_csv(args.out, "sim", _config_dict(args, cfg_keys), args.seed,
               columns, rows)
    return EXIT_OK


# ----------------------------------------------------------------- ef

def _cmd_ef(args):
    if args.recipe:
        return _run_recipe(args)
    d = _dist_arg(args)
    catalog = ss_mod.default_catalog()
    columns = ["g", "m", "avg_plr"] + [f"p{i}" for i in
                                       range(1, catalog.q + 1)]
    rows = []
    for g, m in _g_points(args, args.n, args.mode):
        if args.mode == "broadcast":
            avg = ef_mod.ef_broadcast_plr(d, args.n, m, args.eps)
            rows.append([g, m, avg] + [None] * catalog.q)
        else:
            induced = dist_mod.pec_induced(d, args.eps)
            inp = ef_mod.EfInput(dist=induced, m=m, n=args.n)
            avg = ef_mod.ef_plr_average(inp)
            per = [ef_mod.ef_plr(inp, dd) for dd in range(1, catalog.q + 1)]
            rows.append([g, m, avg] + per)
    cfg_keys = ["dist", "n", "m", "g", "g_range", "eps", "mode"]
    _write_csv(args.out, "ef", _config_dict(args, cfg_keys), args.seed,
               columns, rows)
    return EXIT_OK


# ----------------------------------------------------------------- de

def _cmd_de(args):
    d = _dist_arg(args)
    if args.threshold:
        res = de_mod.threshold(d)
        _write_csv(args.out, "de", _config_dict(args, ["dist"]), args.seed,
                   ["g_star", "degenerate"],
                   [[res.g_star, int(res.degenerate)]])
        return EXIT_OK
    if args.g is not None:
        gs = [args.g]
    elif args.g_range is not None:
        gs = _parse_range(args.g_range)
    else:
        raise UsageError("one of --g, --g-range, --threshold is required")
    columns = ["g", "xi", "iterations", "converged", "avg_plr"]
    rows = []
    for g in gs:
        res = de_mod.de_fixed_point(d, g)
        rows.append([g, res.xi, res.iterations, int(res.converged),
                     de_mod.asymptotic_plr_average(d, g)])
    _write_csv(args.out, "de", _config_dict(args, ["dist", "g", "g_range"]),
               args.seed, columns, rows)
    return EXIT_OK


# ------------------------------------------------------- stopping-sets

def _cmd_stopping_sets(args):
    catalog = ss_mod.enumerate_minimal(args.max_mu, args.max_degree)
    print(f"{len(catalog.records)} sets")
    for mu in sorted(catalog.counts_by_mu()):
        print(f"  mu={mu}: {catalog.counts_by_mu()[mu]}")
    if args.out:
        records = [{"profile": list(r.profile), "mu": r.mu, "nu": r.nu,
                    "c": r.c} for r in catalog.records]
        _write_json(args.out, "stopping-sets",
                    _config_dict(args, ["max_mu", "max_degree"]), args.seed,
                    {"count": len(catalog.records), "records": records})
    return EXIT_OK


# ------------------------------------------------------------ optimize

def _cmd_optimize(args):
    if args.eta is not None:
        etas = [args.eta]
    elif args.eta_range is not None:
        etas = _parse_range(args.eta_range, log=True)
    else:
        etas = opt_mod.default_eta_grid()
    config = opt_mod.OptConfig(eta=0.0, n=args.n, g=args.g, eps=args.eps,
                               restarts=args.restarts, seed=args.seed)
    points = opt_mod.tradeoff_sweep(etas, config)
    payload = {"points": [{
        "eta": p.eta, "dist": p.dist.to_string(),
        "coeffs": list(p.dist.coeffs), "threshold": p.threshold, "ef": p.ef,
    } for p in points]}
    cfg_keys = ["eta", "eta_range", "n", "g", "eps", "restarts"]
    _write_json(args.out, "optimize", _config_dict(args, cfg_keys),
                args.seed, payload)
    return EXIT_OK


# ---------------------------------------------------------------- csma

def _cmd_csma(args):
    if args.recipe:
        return _run_recipe(args)
    n = csma_mod.CsmaConfig(m=1, packet_size=args.packet_size).n
    columns = ["g", "m", "plr", "ci_low", "ci_high"]
    rows = []
    if args.g is not None:
        gs = [args.g]
    elif args.g_range is not None:
        gs = _parse_range(args.g_range)
    else:
        raise UsageError("one of --g, --g-range is required")
    for g in gs:
        m = max(round(g * n) - 1, 1)
        cfg = csma_mod.CsmaConfig(
            m=m, packet_size=args.packet_size, kappa=args.kappa,
            eps=args.eps, windows=args.windows, runs=args.runs,
            seed=args.seed)
        res = csma_mod.csma_simulate(cfg)
        rows.append([(m + 1) / n, m, res.plr, res.ci_low, res.ci_high])
    cfg_keys = ["packet_size", "kappa", "eps", "g", "g_range", "windows",
                "runs"]
    _write_csv(args.out, "csma", _config_dict(args, cfg_keys), args.seed,
               columns, rows)
    return EXIT_OK


# ------------------------------------------------------------- compare

def _cmd_compare(args):
    if not args.recipe:
        raise UsageError("compare requires --recipe (fig8)")
    return _run_recipe(args)


# ------------------------------------------------------------- recipes

def _recipe_fig3(args, original_degree):
    """Per-degree broadcast PLR at n=100, eps=0.01: simulation next to the
    analytical floor, for receiver degrees 2 and 4."""
    d = dist_mod.DegreeDistribution.from_string(EXAMPLE_DIST)
    n, eps = 100, 0.01
    gs = [0.2, 0.5, 0.8] if args.quick else [round(0.1 * i, 1)
                                             for i in range(1, 9)]
    max_frames = 100_000 if args.quick else 2_000_000
    catalog = ss_mod.default_catalog()
    columns = ["g", "l" if original_degree else "d", "r", "sim_plr",
               "ci_low", "ci_high", "ef_plr"]
    rows = []
    for g in gs:
        m = max(round(g * n) - 1, 1)
        cfg = mc_mod.SimConfig(original_dist=d, m=m, n=n, eps=eps,
                               mode="broadcast", target_rel_ci=0.05,
                               max_frames=max_frames, seed=args.seed)
        report = mc_mod.run(cfg)
        for r in (2, 4):
            induced = dist_mod.broadcast_induced(dist_mod.pec_induced(d, eps),
                                                 r, n)
            inp = ef_mod.EfInput(dist=induced, m=m, n=n, catalog=catalog)
            if original_degree:
                table = ef_mod.ef_plr_table(inp, catalog.q)
                for l in (2, 4):
                    ef = ef_mod.reverse_transform_plr(table, l, r, eps, n)
                    rows.append([g, l, r, report.p_l_r[l, r],
                                 report.p_l_r_low[l, r],
                                 report.p_l_r_high[l, r], ef])
            else:
                for dd in (1, 2, 3, 4):
                    ef = ef_mod.ef_plr(inp, dd)
                    rows.append([g, dd, r, report.p_d_r[dd, r],
                                 report.p_d_r_low[dd, r],
                                 report.p_d_r_high[dd, r], ef])
    return columns, rows, {"dist": EXAMPLE_DIST, "n": n, "eps": eps,
                           "g": gs, "max_frames": max_frames}


def _recipe_fig4(args):
    """Unicast PLR against frame length at g=0.5 for the example
    distribution and its erasure-thinned version."""
    g, eps = 0.5, 0.01
    ns = [100, 200] if args.quick else [100, 200, 400, 800]
    max_frames = 100_000 if args.quick else 1_000_000
    base = dist_mod.DegreeDistribution.from_string(EXAMPLE_DIST)
    variants = [("plain", base, 0.0), ("erased", base, eps)]
    columns = ["dist", "eps", "n", "sim_plr", "ci_low", "ci_high",
               "ef_plr", "de_plr"]
    rows = []
    for tag, d, e in variants:
        induced = dist_mod.pec_induced(d, e)
        de_val = de_mod.asymptotic_plr_average(induced, g)
        for n in ns:
            m = round(g * n)
            cfg = mc_mod.SimConfig(original_dist=d, m=m, n=n, eps=e,
                                   mode="unicast", target_rel_ci=0.05,
                                   max_frames=max_frames, seed=args.seed)
            report = mc_mod.run(cfg)
            inp = ef_mod.EfInput(dist=induced, m=m, n=n)
            ef = ef_mod.ef_plr_average(inp)
            rows.append([tag, e, n, report.p_bar, report.p_bar_low,
                         report.p_bar_high, ef, de_val])
    return columns, rows, {"dist": EXAMPLE_DIST, "g": g, "n": ns,
                           "max_frames": max_frames}


def _recipe_fig5(args):
    """Asymptotic limit against the analytical floor per degree at a very
    large frame length (no simulation)."""
    eps, n = 0.01, 10_000_000
    base = dist_mod.DegreeDistribution.from_string(EXAMPLE_DIST)
    induced = dist_mod.pec_induced(base, eps)
    gs = [0.2, 0.5, 0.8] if args.quick else [round(0.05 * i, 2)
                                             for i in range(2, 19)]
    columns = ["g", "d", "de_plr", "ef_plr"]
    rows = []
    for g in gs:
        m = round(g * n)
        inp = ef_mod.EfInput(dist=induced, m=m, n=n)
        for dd in (1, 2, 3, 4):
            rows.append([g, dd, de_mod.asymptotic_plr(induced, g, dd),
                         ef_mod.ef_plr(inp, dd)])
    return columns, rows, {"dist": EXAMPLE_DIST, "eps": eps, "n": n,
                           "g": gs}


def _recipe_fig7(args):
    """CSMA load sweep per frame size, repetition count, and erasure
    rate."""
    if args.quick:
        gs, windows, runs = [0.1, 0.3, 0.5], 10, 4
    else:
        gs, windows, runs = [round(0.1 * i, 1) for i in range(1, 9)], 40, 10
    columns = ["n", "kappa", "eps", "g", "m", "plr", "ci_low", "ci_high"]
    rows = []
    for size in (400, 200):
        n = csma_mod.CsmaConfig(m=1, packet_size=size).n
        for kappa in (1, 2):
            for eps in (0.0, 0.01):
                for g in gs:
                    m = max(round(g * n) - 1, 1)
                    cfg = csma_mod.CsmaConfig(
                        m=m, packet_size=size, kappa=kappa, eps=eps,
                        windows=windows, runs=runs, seed=args.seed)
                    res = csma_mod.csma_simulate(cfg)
                    rows.append([n, kappa, eps, (m + 1) / n, m, res.plr,
                                 res.ci_low, res.ci_high])
    return columns, rows, {"g": gs, "windows": windows, "runs": runs}


def _recipe_fig8(args):
    """Head-to-head of the tuned repetition distribution against CSMA with
    two copies, both frame sizes, with and without erasures."""
    d = dist_mod.DegreeDistribution.from_string(TUNED_DIST)
    if args.quick:
        bcsa_gs = [0.5, 0.7]
        csma_gs = [0.1, 0.3]
        max_frames, windows, runs, rel_ci = 20_000, 10, 4, 0.25
    else:
        bcsa_gs = [round(0.05 * i, 2) for i in range(10, 19)]
        csma_gs = [round(0.1 * i, 1) for i in range(1, 9)]
        max_frames, windows, runs, rel_ci = 400_000, 40, 10, 0.05
    columns = ["protocol", "n", "eps", "g", "m", "plr", "ci_low", "ci_high",
               "ef_plr"]
    rows = []
    for size, n in ((400, 172), (200, 315)):
        for eps in (0.0, 0.01):
            for g in bcsa_gs:
                m = max(round(g * n) - 1, 1)
                cfg = mc_mod.SimConfig(original_dist=d, m=m, n=n, eps=eps,
                                       mode="broadcast", target_rel_ci=rel_ci,
                                       max_frames=max_frames, seed=args.seed)
                report = mc_mod.run(cfg)
                ef = ef_mod.ef_broadcast_plr(d, n, m, eps)
                rows.append(["bcsa", n, eps, (m + 1) / n, m, report.p_bar,
                             report.p_bar_low, report.p_bar_high, ef])
            for g in csma_gs:
                m = max(round(g * n) - 1, 1)
                cfg = csma_mod.CsmaConfig(
                    m=m, packet_size=size, kappa=2, eps=eps,
                    windows=windows, runs=runs, seed=args.seed)
                res = csma_mod.csma_simulate(cfg)
                rows.append(["csma", n, eps, (m + 1) / n, m, res.plr,
                             res.ci_low, res.ci_high, None])
    return columns, rows, {"dist": TUNED_DIST, "bcsa_g": bcsa_gs,
                           "csma_g": csma_gs, "max_frames": max_frames,
                           "windows": windows, "runs": runs}


RECIPES = {
    "fig3a": lambda args: _recipe_fig3(args, original_degree=False),
    "fig3b": lambda args: _recipe_fig3(args, original_degree=True),
    "fig4": _recipe_fig4,
    "fig5": _recipe_fig5,
    "fig7": _recipe_fig7,
    "fig8": _recipe_fig8,
}


def _run_recipe(args):
    builder = RECIPES.get(args.recipe)
    if builder is None:
        raise UsageError(f"unknown recipe {args.recipe!r}; "
                         f"choose from {sorted(RECIPES)}")
    columns, rows, config = builder(args)
    config["recipe"] = args.recipe
    config["quick"] = bool(args.quick)
    _write_csv(args.out, args.command, config, args.seed, columns, rows)
    return EXIT_OK


# ------------------------------------------------------------- parsing

def _add_common(sub, recipe=False):
    sub.add_argument("--out", default="-", help="output path, - for stdout")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--config", help="JSON file with flag defaults")
    if recipe:
        sub.add_argument("--recipe", choices=sorted(RECIPES))
        sub.add_argument("--quick", action="store_true",
                         help="scaled-down variant for smoke tests")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bcsa",
        description="Broadcast coded slotted ALOHA simulation and analysis")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sim", help="Monte Carlo packet loss rates")
    _add_common(p, recipe=True)
    p.add_argument("--dist", default=EXAMPLE_DIST)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int)
    p.add_argument("--g", type=float)
    p.add_argument("--g-range", help="start:stop:count")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--mode", choices=["broadcast", "unicast"],
                   default="broadcast")
    p.add_argument("--frames", type=int)
    p.add_argument("--target-rel-ci", type=float, default=0.1)
    p.add_argument("--max-frames", type=int, default=10_000_000)
    p.set_defaults(func=_cmd_sim)

    p = subs.add_parser("ef", help="analytical error-floor approximation")
    _add_common(p, recipe=True)
    p.add_argument("--dist", default=EXAMPLE_DIST)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int)
    p.add_argument("--g", type=float)
    p.add_argument("--g-range")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--mode", choices=["broadcast", "unicast"],
                   default="broadcast")
    p.set_defaults(func=_cmd_ef)

    p = subs.add_parser("de", help="asymptotic recursion and thresholds")
    _add_common(p)
    p.add_argument("--dist", default=EXAMPLE_DIST)
    p.add_argument("--g", type=float)
    p.add_argument("--g-range")
    p.add_argument("--threshold", action="store_true")
    p.set_defaults(func=_cmd_de)

    p = subs.add_parser("stopping-sets", help="enumerate minimal catalogs")
    _add_common(p)
    p.add_argument("--max-mu", type=int, default=4)
    p.add_argument("--max-degree", type=int, default=4)
    p.set_defaults(func=_cmd_stopping_sets, out=None)

    p = subs.add_parser("optimize", help="degree distribution tradeoff")
    _add_common(p)
    p.add_argument("--eta", type=float)
    p.add_argument("--eta-range", help="lo:hi:count, log spaced")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--g", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--restarts", type=int, default=20)
    p.set_defaults(func=_cmd_optimize)

    p = subs.add_parser("csma", help="carrier-sense baseline")
    _add_common(p, recipe=True)
    p.add_argument("--packet-size", type=int, choices=[200, 400],
                   default=200)
    p.add_argument("--kappa", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--g", type=float)
    p.add_argument("--g-range")
    p.add_argument("--windows", type=int, default=40)
    p.add_argument("--runs", type=int, default=10)
    p.set_defaults(func=_cmd_csma)

    p = subs.add_parser("compare", help="protocol head-to-head recipes")
    _add_common(p, recipe=True)
    p.set_defaults(func=_cmd_compare)

    return parser


def _apply_config_file(parser, argv):
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            defaults = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read --config: {exc}") from None
    if not isinstance(defaults, dict):
        raise UsageError("--config must hold a JSON object")
    for action in parser._subparsers._group_actions:
        for sub in action.choices.values():
            valid = {a.dest for a in sub._actions}
            sub.set_defaults(**{k: v for k, v in defaults.items()
                                if k in valid})


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ss_mod.EnumerationBudgetError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
