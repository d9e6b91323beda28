"""Experiment runner: simulate | exact | tw-table | verify | duality.

Configuration comes from an optional flat key=value file plus command-line
flags (flags win).  Every emitted file embeds the configuration hash and
package version.  Exit codes: 0 success, 1 failed verification, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

from . import __version__

CONFIG_KEYS = {
    "p": float,
    "sigma": float,
    "t": float,
    "L": int,
    "G": int,
    "ntraj": int,
    "seed": int,
    "pool_s": float,
    "workers": int,
    "out": str,
    "s_min": float,
    "s_max": float,
    "s_step": float,
}

DEFAULTS = {
    "p": 0.3,
    "sigma": 0.25,
    "t": 64.0,
    "L": 4,
    "G": 4,
    "ntraj": 10_000,
    "seed": 1,
    "pool_s": 1.0,
    "workers": 1,
    "out": "-",
    "s_min": -5.0,
    "s_max": 3.0,
    "s_step": 0.1,
}


class ConfigError(Exception):
    pass


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(DEFAULTS)
    if path:
        try:
            text = open(path).read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                cfg[key] = CONFIG_KEYS[key](raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}")
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    if not 0.0 < cfg["p"] < 0.5:
        raise ConfigError(f"p={cfg['p']} outside (0, 0.5)")
    if not 0.0 < cfg["sigma"] < 1.0:
        raise ConfigError(f"sigma={cfg['sigma']} outside (0, 1)")
    if cfg["t"] <= 0:
        raise ConfigError("t must be positive")
    if cfg["ntraj"] < 1 or cfg["L"] < 1 or cfg["G"] < 1:
        raise ConfigError("ntraj, L, G must be >= 1")
    return cfg


def config_hash(cfg: dict) -> str:
    # out and workers do not affect the scientific content (merges are
    # associative), so identical runs produce identical bytes anywhere
    canon = json.dumps({k: v for k, v in cfg.items()
                        if k not in ("out", "workers")}, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _open_out(cfg):
    if cfg["out"] == "-":
        return sys.stdout, False
    return open(cfg["out"], "w"), True


def _header_lines(cfg: dict, mode: str) -> list[str]:
    shown = {k: cfg[k] for k in sorted(cfg) if k not in ("out", "workers")}
    return [
        f"# asepblocks {__version__} mode={mode}",
        f"# config_hash={config_hash(cfg)}",
        f"# config={json.dumps(shown)}",
    ]


def cmd_simulate(cfg: dict) -> int:
    from . import montecarlo, stats, tw
    from .model import ModelParams, ScalingParams

    model = ModelParams(cfg["p"])
    spec = montecarlo.EnsembleSpec(
        model, cfg["sigma"], cfg["t"], cfg["ntraj"], cfg["seed"],
        l_max=cfg["L"], g_max=cfg["G"])
    tbl = montecarlo.run_ensemble(spec, workers=cfg["workers"])
    est = stats.conditional_estimates(tbl, s_pool=cfg["pool_s"])
    out, close = _open_out(cfg)
    try:
        for line in _header_lines(cfg, "simulate"):
            print(line, file=out)
        print(f"# t_end=t/gamma={spec.t_end!r} m={spec.m} "
              f"n_particles={spec.n_particles} "
              f"s_jitter<={0.5 / (ScalingParams(spec.sigma_actual).c2 * cfg['t'] ** (1 / 3)):.4g}",
              file=out)
        print("sigma,t,s_bin_center,n_at,kind,L_or_G,count,estimate,stderr,prediction",
              file=out)
        f2p_cache: dict = {}

        def f2p(s):
            key = round(s, 6)
            if key not in f2p_cache:
                f2p_cache[key] = tw.f2_prime(min(max(s, -7.9), 7.4))
            return f2p_cache[key]

        def emit_row(row, kind, entry, pred):
            n = cfg["ntraj"]
            p_hat = entry["count"] / n
            se = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)
            print(f"{spec.sigma_actual},{cfg['t']},{row['s']:.6f},{row['n_at']},"
                  f"{kind},{entry.get('L', entry.get('G'))},{entry['count']},"
                  f"{p_hat:.8g},{se:.3g},{pred:.8g}", file=out)

        for row in est["per_site"]:
            if row["n_at"] == 0:
                continue
            sc = ScalingParams(spec.sigma_actual, row["s"])
            for entry in row["block"]:
                emit_row(row, "block", entry,
                         stats.block_density_prediction(sc, entry["L"], cfg["t"], f2p(row["s"])))
            for entry in row["gap"]:
                emit_row(row, "gap", entry,
                         stats.gap_density_prediction(sc, entry["G"], cfg["t"], f2p(row["s"])))
    finally:
        if close:
            out.close()
    return 0


def cmd_exact(cfg: dict) -> int:
    from . import oracle, qcalc, ratresidue
    from .model import ModelParams

    model = ModelParams(cfg["p"])
    t = min(cfg["t"], 2.0)
    tau = model.tau
    report = {
        "version": __version__,
        "config_hash": config_hash(cfg),
        "identities": [],
    }

    def add(identity, params, lhs, rhs):
        report["identities"].append({
            "identity": identity,
            "parameters": params,
            "lhs": [lhs.real, lhs.imag] if isinstance(lhs, complex) else lhs,
            "rhs": [rhs.real, rhs.imag] if isinstance(rhs, complex) else rhs,
            "abs_diff": abs(lhs - rhs),
        })

    for l_block in (1, 2, 3):
        add("mu_integral", {"L": l_block, "tau": tau},
            qcalc.mu_integral_lhs(l_block, tau), complex(qcalc.mu_integral_rhs(l_block, tau)))
    for l_block in (1, 2, 3):
        add("weight_integral_plain", {"L": l_block, "tau": tau},
            ratresidue.weight_integral_plain(l_block, tau), 0.0 + 0.0j)
        add("weight_integral_saddle", {"L": l_block, "tau": tau, "xi": -1.0},
            ratresidue.weight_integral_saddle(l_block, tau, -1.0),
            complex(ratresidue.staged_integral_closed_form(l_block, tau, -1.0)))
    x, m = 0, 1
    l_block = min(cfg["L"], 2)
    v_circle = qcalc.block_probability_circle(x, m, t, l_block, model)
    v_deformed = qcalc.block_probability_deformed(x, m, t, l_block, model)
    space = oracle.default_space(model, t, x, m, l_block)
    v_orc = oracle.prob_block(space, model, t, x, m, l_block)
    add("circle_vs_deformed", {"x": x, "m": m, "t": t, "L": l_block}, v_circle, v_deformed)
    add("circle_vs_ctmc", {"x": x, "m": m, "t": t, "L": l_block}, v_circle, v_orc)
    out, close = _open_out(cfg)
    try:
        json.dump(report, out, indent=2)
        out.write("\n")
    finally:
        if close:
            out.close()
    return 0


def cmd_tw_table(cfg: dict) -> int:
    from . import tw

    out, close = _open_out(cfg)
    try:
        for line in _header_lines(cfg, "tw-table"):
            print(line, file=out)
        print("s,F2,F2_prime", file=out)
        s = cfg["s_min"]
        while s <= cfg["s_max"] + 1e-12:
            print(f"{s:.6f},{tw.f2(s):.12g},{tw.f2_prime(s):.12g}", file=out)
            s = round(s + cfg["s_step"], 12)
    finally:
        if close:
            out.close()
    return 0


def cmd_verify(cfg: dict, criteria=None) -> int:
    from . import verify

    # full stated scales unless --ntraj overrides (for smoke runs)
    custom = cfg["ntraj"] != DEFAULTS["ntraj"]
    reports = verify.run_all(
        criteria,
        n_traj_kpz=cfg["ntraj"] if custom else 200_000,
        n_traj_c6=cfg["ntraj"] if custom else 1_000_000,
        n_traj_dual=cfg["ntraj"] if custom else 1_000_000,
        workers=cfg["workers"],
    )
    return 0 if all(r.passed for r in reports) else 1


def cmd_duality(cfg: dict) -> int:
    from .verify import criterion_10_duality

    checks = criterion_10_duality(cfg["ntraj"], cfg["seed"])
    out, close = _open_out(cfg)
    try:
        for line in _header_lines(cfg, "duality"):
            print(line, file=out)
        print("check,measured,expected,tolerance,passed", file=out)
        for c in checks:
            print(f"{c.name},{c.measured:.8g},{c.expected:.8g},"
                  f"{c.tolerance:.3g},{c.passed}", file=out)
    finally:
        if close:
            out.close()
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="asepblocks",
        description="Blocks and gaps in ASEP: simulation, exact formulas, verification")
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--p", type=float, help="right-jump rate, 0 < p < 0.5")
    parser.add_argument("--sigma", type=float, help="particle density m/t")
    parser.add_argument("--t", type=float, help="time (pre-gamma scale)")
    parser.add_argument("--L", type=int, help="max block length tallied")
    parser.add_argument("--G", type=int, help="max gap length tallied")
    parser.add_argument("--ntraj", type=int, help="number of trajectories")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    parser.add_argument("--pool-s", dest="pool_s", type=float,
                        help="pool counts over |s| <= this")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--out", help="output path ('-' for stdout)")
    sub = parser.add_subparsers(dest="mode", required=True)
    sub.add_parser("simulate", help="Monte Carlo ensemble -> CSV tallies + predictions")
    sub.add_parser("exact", help="identity/probability checks -> JSON report")
    tw_p = sub.add_parser("tw-table", help="(s, F2, F2') CSV over a grid")
    tw_p.add_argument("--s-min", dest="s_min", type=float)
    tw_p.add_argument("--s-max", dest="s_max", type=float)
    tw_p.add_argument("--s-step", dest="s_step", type=float)
    ver_p = sub.add_parser("verify", help="run the acceptance suite")
    ver_p.add_argument("--criteria", help="comma-separated criterion numbers")
    sub.add_parser("duality", help="paired gap/dual-block statistics")

    args = parser.parse_args(argv)
    overrides = {k: getattr(args, k, None) for k in CONFIG_KEYS}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.mode == "simulate":
            return cmd_simulate(cfg)
        if args.mode == "exact":
            return cmd_exact(cfg)
        if args.mode == "tw-table":
            return cmd_tw_table(cfg)
        if args.mode == "verify":
            criteria = None
            if getattr(args, "criteria", None):
                criteria = [int(v) for v in args.criteria.split(",")]
            return cmd_verify(cfg, criteria)
        if args.mode == "duality":
            return cmd_duality(cfg)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
