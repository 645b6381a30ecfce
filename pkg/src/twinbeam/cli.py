"""Command-line interface.

Subcommands: sweep, figure, triplet, sfg, hom and the debugging helper
oracle.  Exit codes: 0 success, 1 fatal error, 2 partial failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .aggregate import build_twinbeam
from .config import RunConfig, config_hash, from_dict, load_config
from .errors import TwinbeamError
from .figures import FIGURE_IDS, figure
from .fock import oracle_compare
from .interference import hom_from_state, sfg_from_state
from .sweep import (basis_from_config, run_sweep, triplet_sweep, write_csv,
                    write_sweep)
from . import __version__


def _add_common(parser):
    parser.add_argument("--config", help="JSON run configuration (defaults apply when omitted)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")
    parser.add_argument("--gamma", help="comma-separated gamma values overriding the config")


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else from_dict({})
    if args.gamma:
        gammas = tuple(float(g) for g in args.gamma.split(","))
        data = cfg.to_dict()
        data["gamma_list"] = list(gammas)
        cfg = from_dict(data)
    return cfg


def _provenance(cfg):
    return {"config_hash": config_hash(cfg), "code_version": __version__}


def cmd_sweep(args) -> int:
    cfg = _load(args)
    result = run_sweep(cfg, threads=args.threads)
    paths = write_sweep(result, args.out)
    _write_run_info(cfg, args.out)
    for p in paths:
        print(p)
    if not result.ok:
        print(f"{len(result.failures)} cell(s) failed; see sweep_failures.csv",
              file=sys.stderr)
        return 2
    return 0


def cmd_figure(args) -> int:
    cfg = _load(args)
    ids = [args.id] if args.id else (list(cfg.outputs.figures) or list(FIGURE_IDS))
    failures = 0
    for fig_id in ids:
        try:
            for p in figure(cfg, fig_id, args.out):
                print(p)
        except TwinbeamError as exc:
            failures += 1
            print(f"figure {fig_id} failed: {exc}", file=sys.stderr)
    _write_run_info(cfg, args.out)
    return 2 if failures else 0


def cmd_triplet(args) -> int:
    cfg = _load(args)
    result = triplet_sweep(cfg)
    os.makedirs(args.out, exist_ok=True)
    path = write_csv(os.path.join(args.out, "triplet_sweep.csv"),
                     result.columns, result.rows, result.provenance)
    _write_run_info(cfg, args.out)
    print(path)
    return 0


def _profile_command(args, kind: str) -> int:
    cfg = _load(args)
    basis = basis_from_config(cfg)
    os.makedirs(args.out, exist_ok=True)
    paths = []
    for gamma in cfg.gamma_list:
        tb = build_twinbeam(basis, args.power, gamma)
        tag = f"gamma{gamma:g}_P{args.power:g}"
        if kind == "sfg":
            prof = sfg_from_state(tb, n_time=cfg.grids.n_time, normalized=True)
            header = ["tau_s", "value", "term_coherent", "term_pair",
                      "term_linear", "term_background"]
            rows = list(zip(prof.tau, prof.values, prof.terms["coherent"],
                            prof.terms["pair"], prof.terms["linear"],
                            prof.terms["background"]))
            name = f"sfg_{tag}.csv"
        else:
            hom = hom_from_state(tb, n_time=cfg.grids.n_time)
            header = ["tau_s", "value", "term_coherent", "term_pair",
                      "term_chaotic"]
            rows = list(zip(hom["tau"], hom["R_n_delta"],
                            hom["rho_terms"]["coherent"],
                            hom["rho_terms"]["pair"],
                            hom["rho_terms"]["chaotic_product"]))
            name = f"hom_{tag}.csv"
        paths.append(write_csv(os.path.join(args.out, name), header, rows,
                               _provenance(cfg)))
    for p in paths:
        print(p)
    return 0


def cmd_oracle(args) -> int:
    report = oracle_compare(args.coupling, args.pump_photons, args.z, args.gamma)
    print(json.dumps(report, indent=2))
    worst = max(v["rel_error"] for v in report.values())
    return 0 if math.isfinite(worst) else 1


def _write_run_info(cfg: RunConfig, out_dir: str):
    """Sidecar provenance (includes the timestamp; CSVs stay byte-stable)."""
    import datetime

    os.makedirs(out_dir, exist_ok=True)
    info = {
        "config_hash": config_hash(cfg),
        "code_version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": cfg.to_dict(),
    }
    with open(os.path.join(out_dir, "run_info.json"), "w", encoding="utf-8") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinbeam",
        description="Intense twin-beam simulation with pump depletion",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the configured (gamma, power) sweep")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="emit the CSV curves of one figure recipe")
    p.add_argument("id", type=int, nargs="?", help="figure id 1..21 (default: all configured)")
    _add_common(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("triplet", help="power sweep of the strongest triplet")
    _add_common(p)
    p.set_defaults(func=cmd_triplet)

    for kind in ("sfg", "hom"):
        p = sub.add_parser(kind, help=f"{kind} interference profile at one power")
        _add_common(p)
        p.add_argument("--power", type=float, default=0.17, help="pump power (W)")
        p.set_defaults(func=lambda a, k=kind: _profile_command(a, k))

    p = sub.add_parser("oracle", help="compare the model against the exact ladder (debug)")
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--pump-photons", type=int, default=10)
    p.add_argument("--z", type=float, default=0.09)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TwinbeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
