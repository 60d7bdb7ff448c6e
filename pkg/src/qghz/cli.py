"""Command-line entry point: figures, cross-checks, sweeps, and replay.

Commands
--------
``qghz figure NAME``    compute a reference figure's data tables as CSV.
``qghz check``          run the oracle-vs-closed-form and MC-vs-closed-form
                        verification suite, emitting a JSON report.
``qghz sweep``          Cartesian parameter sweep over config fields.
``qghz replay``         re-run the command recorded in a manifest; the data
                        files it produces are byte-identical to the original.

Every output directory receives a ``manifest.json`` recording the exact
command, config path, master seed, and artifact version. Exit codes:
0 success, 2 validation error, 3 acceptance deviation, 4 numeric failure.
``QGHZ_THREADS`` caps the Monte-Carlo worker count; results are independent
of it.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .figures import FIGURES, Table, build_figure
from .fock_oracle import oracle_w_metrics
from .ghz_pipeline import ZeroAcceptedError, mc_w_state
from .keyrate import total_rate
from .loss_analytics import (
    expected_attempts,
    p_ghz,
    w_fidelity_loss,
    w_metrics_threshold,
    w_success_loss,
)
from .model import (
    ConfigError,
    DetectorKind,
    DetectorModel,
    EmitterArrayConfig,
    load_config,
    validate,
)
from .numerics import ErfcOverflowError, QuadratureError

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEVIATION = 3
EXIT_NUMERIC = 4

_CHECK_TOL = 1e-9
_SWEEPABLE = ("d", "p", "eta1", "eta2", "dephasing_rate", "relaxation")


# --------------------------------------------------------------------------
# Output plumbing
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, table: Table) -> None:
    columns, rows = table
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(out_dir: Path, args: argparse.Namespace, started: float) -> None:
    manifest = {
        "artifact_version": __version__,
        "command": _replay_argv(args),
        "config": str(args.config) if getattr(args, "config", None) else None,
        "master_seed": getattr(args, "seed", None),
        "output_dir": str(out_dir),
        "wall_time_s": time.time() - started,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _replay_argv(args: argparse.Namespace) -> list[str]:
    """Reconstruct the normalized argv that reproduces this run."""
    argv = [args.command]
    if args.command == "figure":
        argv.append(args.name)
    if getattr(args, "config", None):
        argv += ["--config", str(args.config)]
    if getattr(args, "seed", None) is not None:
        argv += ["--seed", str(args.seed)]
    if getattr(args, "shots", None) is not None:
        argv += ["--shots", str(args.shots)]
    for item in getattr(args, "set", None) or []:
        argv += ["--set", item]
    for item in getattr(args, "vary", None) or []:
        argv += ["--vary", item]
    if getattr(args, "inject_typo", False):
        argv.append("--inject-typo")
    return argv


def _parse_set(items: list[str] | None) -> dict:
    params: dict = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError([f"--set expects key=value, got '{item}'"])
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


# --------------------------------------------------------------------------
# figure
# --------------------------------------------------------------------------


def cmd_figure(args: argparse.Namespace) -> int:
    started = time.time()
    params = _parse_set(args.set)
    if args.config:
        config, _detector, protocol = load_config(args.config)
        params.setdefault("d", config.d)
        params.setdefault("p", config.p)
        params.setdefault("gamma", config.dephasing_rate)
        if "n_photons" in protocol:
            params.setdefault("n_photons", int(protocol["n_photons"]))
    if args.seed is not None:
        params["seed"] = args.seed
    if args.shots is not None:
        params["shots"] = args.shots

    try:
        tables = build_figure(args.name, params)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = Path(args.out or f"out/{args.name}")
    out_dir.mkdir(parents=True, exist_ok=True)
    for basename in sorted(tables):
        _write_csv(out_dir / basename, tables[basename])
    _write_manifest(out_dir, args, started)
    print(f"{args.name}: wrote {len(tables)} CSV file(s) to {out_dir}")
    return EXIT_OK


# --------------------------------------------------------------------------
# check
# --------------------------------------------------------------------------


def _typo_threshold_metrics(d: int, p: float, eta: float) -> tuple[float, float]:
    """Negative control: the double sum with the wrong binomial C(d, delta_xi).

    Used only under --inject-typo to prove the checker catches a corrupted
    formula; the correct form uses C(d - delta_s, delta_xi).
    """
    P_W = 0.0
    for delta_s in range(d):
        for delta_xi in range(1, d - delta_s + 1):
            P_W += (
                d
                * math.comb(d, delta_s)
                * math.comb(d, delta_xi)  # wrong on purpose
                * (math.factorial(delta_xi) / d**delta_xi)
                * (p * (1.0 - eta)) ** delta_s
                * (p * eta) ** delta_xi
                * (1.0 - p) ** (d - delta_s - delta_xi)
            )
    return d * p * eta * (1.0 - p) ** (d - 1) / P_W, P_W


def cmd_check(args: argparse.Namespace) -> int:
    started = time.time()
    shots = args.shots if args.shots is not None else 50_000
    seed = args.seed if args.seed is not None else 0

    grid_d = (2, 3, 4)
    grid_p = (0.1, 0.3, 0.5)
    grid_eta = (0.3, 0.6, 0.9, 1.0)

    rows = []
    worst = 0.0
    worst_name = ""
    for d in grid_d:
        for p in grid_p:
            for eta in grid_eta:
                config = EmitterArrayConfig.uniform(d, p, eta1=eta)
                for kind in DetectorKind:
                    detector = DetectorModel(kind=kind)
                    F_o, P_o = oracle_w_metrics(config, detector)
                    if kind is DetectorKind.NUMBER_RESOLVING:
                        name = "w_fidelity_loss/w_success_loss"
                        F_a = w_fidelity_loss(d, p, eta)
                        P_a = w_success_loss(d, p, eta)
                    else:
                        name = "w_metrics_threshold"
                        metrics = (
                            _typo_threshold_metrics(d, p, eta)
                            if args.inject_typo
                            else w_metrics_threshold(d, p, eta)
                        )
                        F_a, P_a = metrics
                    dev = max(abs(F_a - F_o), abs(P_a - P_o))
                    rows.append(
                        {
                            "formula": name,
                            "d": d,
                            "p": p,
                            "eta": eta,
                            "deviation": dev,
                            "pass": dev < _CHECK_TOL,
                        }
                    )
                    if dev > worst:
                        worst, worst_name = dev, name

    mc_rows = []
    for d, p, eta in ((2, 0.3, 0.6), (3, 0.3, 0.9), (3, 0.1, 0.5)):
        config = EmitterArrayConfig.uniform(d, p, eta1=eta)
        for kind in DetectorKind:
            F_hat, F_err, P_hat, P_err = mc_w_state(
                config, kind, shots=shots, master_seed=seed
            )
            if kind is DetectorKind.NUMBER_RESOLVING:
                F_a = w_fidelity_loss(d, p, eta)
                P_a = w_success_loss(d, p, eta)
            else:
                F_a, P_a = w_metrics_threshold(d, p, eta)
            z_F = abs(F_hat - F_a) / max(F_err, 1e-12)
            z_P = abs(P_hat - P_a) / max(P_err, 1e-12)
            mc_rows.append(
                {
                    "d": d,
                    "p": p,
                    "eta": eta,
                    "kind": kind.value,
                    "z_F": z_F,
                    "z_P": z_P,
                    "pass": z_F < 3.0 and z_P < 3.0,
                }
            )

    ok = all(r["pass"] for r in rows) and all(r["pass"] for r in mc_rows)
    report = {
        "closed_form_rows": rows,
        "mc_rows": mc_rows,
        "max_closed_form_deviation": worst,
        "worst_formula": worst_name,
        "tolerance": _CHECK_TOL,
        "shots": shots,
        "pass": ok,
    }
    out_dir = Path(args.out or "out/check")
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    _write_manifest(out_dir, args, started)

    if ok:
        print(f"check: all formulas pass (max deviation {worst:.3e})")
        return EXIT_OK
    print(
        f"check: FAIL, formula '{worst_name}' deviates by {worst:.3e} "
        f"(tolerance {_CHECK_TOL})",
        file=sys.stderr,
    )
    return EXIT_DEVIATION


# --------------------------------------------------------------------------
# sweep
# --------------------------------------------------------------------------


def _parse_vary(items: list[str]) -> dict[str, list[float]]:
    """``field=a:b:n`` for n linearly spaced points or ``field=v1,v2,...``."""
    out: dict[str, list[float]] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or key not in _SWEEPABLE:
            raise ConfigError(
                [f"--vary expects field=spec with field in {_SWEEPABLE}, "
                 f"got '{item}'"]
            )
        if ":" in raw:
            parts = raw.split(":")
            if len(parts) != 3:
                raise ConfigError([f"--vary range must be start:stop:n, got '{raw}'"])
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            values = [float(v) for v in np.linspace(a, b, n)]
        else:
            values = [float(v) for v in raw.split(",")]
        out[key] = values
    return out


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.time()
    if args.config:
        base, _detector, protocol = load_config(args.config)
    else:
        base = EmitterArrayConfig.uniform(3, 0.1, eta1=0.9, eta2=0.9)
        protocol = {}
    pump_rate = float(protocol.get("pump_rate_hz", 1.0))
    n_photons = int(protocol.get("n_photons", 2))

    varied = _parse_vary(args.vary or [])
    if not varied:
        raise ConfigError(["sweep requires at least one --vary field=spec"])

    fields = sorted(varied)
    grids = [varied[f] for f in fields]
    out_dir = Path(args.out or "out/sweep")
    out_dir.mkdir(parents=True, exist_ok=True)

    columns = (
        "d", "p", "eta1", "eta2", "dephasing_rate", "relaxation",
        "F_W", "P_W", "P_GHZ", "N_W", "K", "RK_over_Rpi",
    )
    rows_written = 0
    rate_by_point: dict[tuple, list[tuple[int, float]]] = {}
    with open(out_dir / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for combo in _cartesian(grids):
            overrides = dict(zip(fields, combo))
            if "d" in overrides:
                d = int(round(overrides.pop("d")))
                config = base.with_(
                    d=d,
                    linewidths=(base.linewidths[0],) * d,
                    frequencies=(base.frequencies[0],) * d,
                    **overrides,
                )
            else:
                config = base.with_(**overrides)
            validate(config)
            F_W = w_fidelity_loss(config.d, config.p, config.eta1)
            P_W = w_success_loss(config.d, config.p, config.eta1)
            rate, row = total_rate(config, pump_rate, n_photons=n_photons)
            values = (
                config.d, config.p, config.eta1, config.eta2,
                config.dephasing_rate, config.relaxation,
                F_W, P_W,
                p_ghz(config.d, config.p, config.eta1),
                expected_attempts(config.d, config.p, config.eta1),
                row.K, row.RK_over_Rpi,
            )
            writer.writerow([_fmt(v) for v in values])
            rows_written += 1
            key = tuple(v for f, v in zip(fields, combo) if f != "d")
            rate_by_point.setdefault(key, []).append((config.d, row.RK_over_Rpi))

    summary: dict = {"rows": rows_written, "varied": fields}
    if "d" in fields:
        monotone = all(
            all(r2 >= r1 for (_, r1), (_, r2) in zip(pairs, pairs[1:]))
            for pairs in (sorted(v) for v in rate_by_point.values())
        )
        summary["key_rate_monotone_in_d"] = monotone
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    _write_manifest(out_dir, args, started)
    print(f"sweep: wrote {rows_written} row(s) to {out_dir / 'sweep.csv'}")
    return EXIT_OK


def _cartesian(grids: list[list[float]]):
    if not grids:
        yield ()
        return
    for head in grids[0]:
        for tail in _cartesian(grids[1:]):
            yield (head, *tail)


# --------------------------------------------------------------------------
# replay
# --------------------------------------------------------------------------


def cmd_replay(args: argparse.Namespace) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = list(manifest["command"])
    if args.out:
        argv += ["--out", args.out]
    elif manifest.get("output_dir"):
        argv += ["--out", manifest["output_dir"]]
    return main(argv)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qghz",
        description="Qudit GHZ protocol toolkit: figures, checks, sweeps.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master random seed")
        p.add_argument("--shots", type=int, help="Monte-Carlo shot count")
        p.add_argument(
            "--set", action="append", metavar="KEY=VALUE",
            help="override a figure parameter (repeatable)",
        )

    p_fig = sub.add_parser("figure", help="compute a reference figure's CSVs")
    p_fig.add_argument("name", choices=sorted(FIGURES))
    common(p_fig)
    p_fig.set_defaults(func=cmd_figure)

    p_check = sub.add_parser("check", help="verification suite vs the oracle")
    common(p_check)
    p_check.add_argument(
        "--inject-typo", action="store_true",
        help="negative control: corrupt a binomial coefficient and require "
             "the checker to notice",
    )
    p_check.set_defaults(func=cmd_check)

    p_sweep = sub.add_parser("sweep", help="Cartesian parameter sweep")
    common(p_sweep)
    p_sweep.add_argument(
        "--vary", action="append", metavar="FIELD=SPEC",
        help="field=start:stop:n or field=v1,v2,... (repeatable)",
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_replay = sub.add_parser("replay", help="re-run a recorded manifest")
    p_replay.add_argument("manifest")
    p_replay.add_argument("--out", help="redirect output directory")
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (QuadratureError, ErfcOverflowError, ZeroAcceptedError,
            FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
