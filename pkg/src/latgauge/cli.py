"""Batch front end.

Subcommands map onto the library layers:

* ``verify``    -- run the exhaustive structural suites; exit 0 iff all pass.
* ``enumerate`` -- exact Gibbs distribution of a small lattice, as CSV.
* ``decay``     -- Monte Carlo covariance decay of two Wilson loops vs
                   separation, with an exponential fit and CSV/SVG reports.
* ``bounds``    -- coupling threshold and the closed-form decay bounds.
* ``higgs``     -- the two Higgs verification suites.

Configuration is a single JSON file; ``--seed``, ``--workers`` and
``--out`` override the corresponding config entries. Exit codes: 0 all
checks pass, 1 a check failed (the witness is printed), 2 configuration
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .experiments import (
    CheckRow,
    emit_report,
    fit_exponential,
    run_decay,
    run_suites,
)
from .gibbs import GibbsSpec
from .groups import beta_threshold, builtin_group, delta_G
from .lattice import Box, build_complex
from .swapping import percolation_and_theorem_bounds

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _group_from_config(cfg):
    spec = cfg.get("group", {"name": "cyclic", "params": [2]})
    try:
        return builtin_group(spec["name"], *spec.get("params", []))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad group spec: {exc}") from exc


def _box_from_config(cfg, key="lattice"):
    try:
        ranges = tuple(tuple(r) for r in cfg[key]["ranges"])
        return Box(ranges)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad lattice spec: {exc}") from exc


def _print_rows(rows) -> bool:
    all_ok = True
    for row in rows:
        print(row.as_csv())
        all_ok &= row.passed
    return all_ok


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    suites = cfg.get("suites", ["sec2", "swap", "peierls"])
    inject = cfg.get("inject_fault")
    try:
        rows = run_suites(suites, inject_fault=inject)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    ok = _print_rows(rows)
    if args.out:
        emit_report([], rows, args.out)
    if not ok:
        first = next(r for r in rows if not r.passed)
        print(f"FAILED: {first.instance} / {first.check}: {first.witness}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_enumerate(args) -> int:
    cfg = load_config(args.config)
    G, rho = _group_from_config(cfg)
    box = _box_from_config(cfg)
    beta = float(cfg.get("beta", 1.0))
    cap = int(cfg.get("caps", {}).get("enumeration", 2**24))
    spec = GibbsSpec(build_complex(box), G, rho, beta)
    dist = spec.enumerate_mu(cap=cap)
    print(f"configurations,{len(dist.configs)}")
    print(f"partition_function,{dist.z:.12g}")
    limit = int(cfg.get("enumerate_rows", 32))
    print("config_index,weight,probability")
    probs = dist.probabilities
    for i in range(min(limit, len(dist.configs))):
        print(f"{i},{dist.weights[i]:.12g},{probs[i]:.12g}")
    return EXIT_OK


def cmd_decay(args) -> int:
    cfg = load_config(args.config)
    box = _box_from_config(cfg)
    gspec = cfg.get("group", {"name": "cyclic", "params": [2]})
    sampler = cfg.get("sampler", {})
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 1))
    workers = args.workers if args.workers is not None else int(cfg.get("workers", 1))
    Ls = cfg.get("Ls", [1, 2, 3, 4, 5])
    if len(Ls) < 3:
        raise ConfigError("need at least 3 separations in Ls")
    beta = float(cfg.get("beta", 1.2))
    rows = run_decay(
        box.ranges,
        group=(gspec["name"], tuple(gspec.get("params", []))),
        beta=beta,
        Ls=Ls,
        chains=int(sampler.get("chains", 8)),
        sweeps=int(sampler.get("sweeps", 200_000)),
        burnin=int(sampler.get("burnin", 2_000)),
        batches=int(sampler.get("batches", 20)),
        seed=seed,
        workers=workers,
    )
    G, rho = _group_from_config(cfg)
    delta = delta_G(G, rho)
    fit, excluded = fit_exponential(rows)
    print("L,cov,stderr,n,beta")
    for r in rows:
        print(f"{r.L},{r.cov:.12g},{r.stderr:.12g},{r.n},{r.beta:.12g}")
    if excluded:
        print(f"excluded_rows,{';'.join(str(x) for x in excluded)}")
    if fit is None:
        print("fit,degenerate")
    else:
        rate, intercept, r2 = fit
        print(f"fit_rate,{rate:.12g}")
        print(f"fit_intercept,{intercept:.12g}")
        print(f"fit_r2,{r2:.12g}")
    out = args.out or cfg.get("out")
    if out:
        paths = emit_report(rows, [], out, delta=delta, beta=beta)
        print(f"report,{paths['decay']}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    cfg = load_config(args.config)
    G, rho = _group_from_config(cfg)
    beta = float(cfg.get("beta", 60.0))
    L = int(cfg.get("L", 10))
    b1 = int(cfg.get("b1_plaquettes", 1))
    b2 = int(cfg.get("b2_plaquettes", 1))
    f1 = float(cfg.get("f1_sup", 1.0))
    f2 = float(cfg.get("f2_sup", 1.0))
    delta = delta_G(G, rho)
    thresh = beta_threshold(G, rho)
    p_out, cov, below = percolation_and_theorem_bounds(G, rho, beta, b1, b2, L, f1, f2)
    print(f"delta_G,{delta:.12g}")
    print(f"beta_threshold,{thresh:.12g}")
    print(f"beta,{beta:.12g}")
    print(f"below_threshold,{str(below).lower()}")
    if below:
        print("warning,beta is below the threshold; bounds evaluated anyway", file=sys.stderr)
    print(f"p_out_bound,{p_out:.12g}")
    print(f"covariance_bound,{cov:.12g}")
    return EXIT_OK


def cmd_higgs(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    suites = cfg.get("suites", ["higgs-large", "higgs-small"])
    rows = run_suites(suites)
    ok = _print_rows(rows)
    if args.out:
        emit_report([], rows, args.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latgauge",
        description="finite-group lattice gauge theory: verification and decay experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, needs_config in (
        ("verify", cmd_verify, False),
        ("enumerate", cmd_enumerate, True),
        ("decay", cmd_decay, True),
        ("bounds", cmd_bounds, True),
        ("higgs", cmd_higgs, False),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--workers", type=int, default=None, help="worker processes")
        p.add_argument("--out", default=None, help="report output directory")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
