"""``sigchange`` command line: field, verify, geodesic, radical, trap and seam."""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from . import causal, dynamics, prescription, quotient
from .config import MODELS, TOPOLOGIES, ConfigError, RunConfig, merge, read_config_file
from .geometry import ChartPoint, GeometryError, TangentVector
from .io import dumps, field_csv, sample_field, table_csv, write_text
from .quotient import OutsideDomainError
from .svg import field_figure


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags given here win")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--base", choices=("flat", "rotating", "crosscap"), help="base metric for --model transformed")
    p.add_argument("--angle-rate", type=float, help="phi'(x) of the rotating metric")
    p.add_argument("--f", help="scalar f(t, x) of the transformed model")
    p.add_argument("--V", help="vector field 'EXPR,EXPR' in (t, x) components")
    p.add_argument("--g", help="custom model components 'g_tt,g_tx,g_xx'")
    p.add_argument("--topology", choices=TOPOLOGIES)
    p.add_argument("--window", help="tmin,tmax,xmin,xmax")
    p.add_argument("--grid", type=int, help="samples per axis")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--svg", help="also write an SVG figure here")
    p.add_argument("--tol-deg", type=float)
    p.add_argument("--tol-tangent", type=float)
    p.add_argument("--tol-grad", type=float)
    p.add_argument("--dlam", type=float, help="affine step")
    p.add_argument("--lam-max", type=float, help="affine length")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigchange", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("field", help="sample the metric on a grid (CSV, optional SVG)"))
    _common(sub.add_parser("verify", help="run the property suite and emit a JSON verdict bundle"))
    p = sub.add_parser("geodesic", help="integrate one geodesic (CSV trace, optional SVG)")
    _common(p)
    p.add_argument("--init", help="t,x,vt,vx")
    p.add_argument("--events", help="write seam-crossing events as JSON here")
    _common(sub.add_parser("radical", help="classify the radical along the degeneracy locus (CSV)"))
    p = sub.add_parser("trap", help="causal-curve trapping experiment in one stripe (JSON)")
    _common(p)
    p.add_argument("--k", type=int, help="stripe index")
    p.add_argument("--n-curves", type=int)
    p = sub.add_parser("seam", help="metric and V mismatch across the quotient seams (JSON)")
    _common(p)
    p.add_argument("--order", type=int, choices=(0, 1))
    p.add_argument("--n-samples", type=int)
    return parser


_NOT_CONFIG = {"command", "config", "events"}


def load_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    layers = []
    if args.config:
        try:
            layers.append(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
    layers.append({k: v for k, v in vars(args).items() if k not in _NOT_CONFIG})
    return merge(RunConfig(), *layers)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        write_text(cfg.out, text)
    else:
        sys.stdout.write(text)


def cmd_field(cfg: RunConfig) -> int:
    m = cfg.metric()
    sample = sample_field(m, cfg.window, cfg.grid_n, cfg.tol_deg)
    _emit(cfg, field_csv(sample))
    if cfg.svg:
        write_text(cfg.svg, field_figure(sample, cfg.window, m))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_verify

    result = run_verify(cfg)
    _emit(cfg, dumps(result))
    for name in result["required_failed"]:
        print(f"required check failed: {name}", file=sys.stderr)
    return 1 if result["required_failed"] else 0


def cmd_geodesic(cfg: RunConfig, events: str | None = None) -> int:
    m = cfg.metric()
    t, x, vt, vx = cfg.init
    trace = dynamics.integrate_geodesic(
        m, cfg.manifold(), TangentVector(ChartPoint(t, x), vt, vx), cfg.lam_max, cfg.dlam, tol_deg=cfg.tol_deg
    )
    _emit(cfg, trace.to_csv())
    if events:
        write_text(events, dumps({"status": trace.status.value, "events": trace.seam_events_json()}))
    print(f"status {trace.status.value} after lambda = {trace.lam[-1]:.6g}", file=sys.stderr)
    if cfg.svg:
        sample = sample_field(m, cfg.window, cfg.grid_n, cfg.tol_deg)
        path = list(zip(trace.t.tolist(), trace.x.tolist()))
        write_text(cfg.svg, field_figure(sample, cfg.window, m, trajectories=[path]))
    return 0


def cmd_radical(cfg: RunConfig) -> int:
    m = cfg.metric()
    locus = prescription.degeneracy_locus(m, cfg.window, max(cfg.grid_n, 64))
    if not locus or all(len(p) == 0 for p in locus):
        _emit(cfg, table_csv(prescription.RADICAL_CSV_HEADER, []))
        print("no degeneracy locus in window", file=sys.stderr)
        return 0
    result = prescription.radical_classification(m, locus, tol_tangent=cfg.tol_tangent, tol_grad=cfg.tol_grad)
    _emit(cfg, table_csv(prescription.RADICAL_CSV_HEADER, [r.csv_row() for r in result.reports]))
    print(f"{len(result.reports)} locus points, {len(result.tangency_points)} tangency points", file=sys.stderr)
    for p in result.tangency_points:
        print(f"  tangent at t = {p.t:.12g}, x = {p.x:.12g}", file=sys.stderr)
    if cfg.svg:
        sample = sample_field(m, cfg.window, cfg.grid_n, cfg.tol_deg)
        write_text(cfg.svg, field_figure(sample, cfg.window, m))
    return 0


def cmd_trap(cfg: RunConfig) -> int:
    report = causal.trapping_experiment(
        cfg.metric(), k=cfg.k, n_curves=cfg.n_curves, lam_max=cfg.lam_max, seed=cfg.seed, dlam=cfg.dlam
    )
    _emit(cfg, dumps(report.to_json()))
    return 0


def cmd_seam(cfg: RunConfig) -> int:
    man = cfg.manifold()
    reports = quotient.seam_compatibility(man, cfg.metric(), cfg.order, cfg.n_samples)
    reports += quotient.vector_field_seam_check(man, cfg.vector_field(), cfg.n_samples)
    _emit(cfg, dumps([r.to_json() for r in reports]))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "field":
            return cmd_field(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "geodesic":
            return cmd_geodesic(cfg, args.events)
        if args.command == "radical":
            return cmd_radical(cfg)
        if args.command == "trap":
            return cmd_trap(cfg)
        return cmd_seam(cfg)
    except (ConfigError, GeometryError, OutsideDomainError, OSError) as exc:
        print(f"sigchange: error: {exc}", file=sys.stderr)
        return 2


def config_dict(cfg: RunConfig) -> dict:
    """Plain dict of a config, for logging alongside outputs."""
    return {k: v for k, v in asdict(cfg).items() if k != "extras"}


if __name__ == "__main__":
    sys.exit(main())
