"""Command-line surface: simulation, key-rate evaluation, threshold search,
and figure-data sweeps with stable JSON/CSV formats.

Exit statuses: 0 success, 1 usage error, 2 domain error, 3 I/O error.
Errors are reported as a single machine-parseable line on stderr of the form
``sqkd: error: <category>: <message>``.  Output files are written to a
temporary sibling and renamed into place, so partial files are never left
behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import protocol, security
from .channels import DepolarizingChannel, ForwardAttack, ReverseAttack
from .qmath import DomainError, InvariantViolation

SCHEMA_VERSION = 1


class UsageError(Exception):
    """Malformed command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the protocol and write a transcript JSON")
    sim.add_argument("--n", type=int, required=True, help="number of protocol iterations")
    sim.add_argument("--b", type=float, default=0.0, help="forward-channel bias, |b| < 1/2")
    sim.add_argument("--p", type=float, default=0.0, help="reverse depolarizing parameter in [0, 1]")
    sim.add_argument("--seed", type=int, required=True, help="RNG seed (64-bit unsigned)")
    sim.add_argument(
        "--sizing",
        choices=("paper", "realized"),
        default="realized",
        help="test-bit sizing rule (default: realized)",
    )
    sim.add_argument("--delta", type=float, default=0.1, help="sizing slack for --sizing paper")
    sim.add_argument("--pt", type=float, default=1.0, help="test error-rate abort threshold")
    sim.add_argument("--records", action="store_true", help="include per-iteration records")
    sim.add_argument("--out", type=Path, required=True, help="transcript output path")
    sim.set_defaults(func=cmd_simulate)

    rate = sub.add_parser("keyrate", help="print a key-rate report as JSON")
    rate.add_argument("--b", type=float, required=True, help="forward-channel bias, |b| < 1/2")
    rate.add_argument("--p", type=float, required=True, help="depolarizing parameter in [0, 1/2]")
    rate.set_defaults(func=cmd_keyrate)

    thr = sub.add_parser("threshold", help="find the noise threshold where the bound hits zero")
    thr.add_argument("--b", type=float, required=True, help="forward-channel bias, |b| < 1/2")
    thr.add_argument("--tol", type=float, default=1e-5, help="bisection tolerance")
    thr.set_defaults(func=cmd_threshold)

    swp = sub.add_parser("sweep", help="evaluate the bound over a (b, p) grid and write CSV")
    swp.add_argument("--b", type=str, required=True, help="comma-separated bias values")
    swp.add_argument("--p-min", type=float, required=True)
    swp.add_argument("--p-max", type=float, required=True)
    swp.add_argument("--p-step", type=float, required=True)
    swp.add_argument("--out", type=Path, required=True, help="CSV output path")
    swp.add_argument("--plot", type=Path, default=None, help="also render a figure to this path")
    swp.set_defaults(func=cmd_sweep)
    return parser


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent) or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _ratio_dict(est: protocol.RatioEstimate) -> dict:
    return {"successes": est.successes, "trials": est.trials, "value": est.value}


def _reverse_dict(reverse) -> dict:
    if reverse is None:
        return {"kind": "ideal"}
    if isinstance(reverse, DepolarizingChannel):
        return {"kind": "depolarizing", "p": reverse.p}
    if isinstance(reverse, ReverseAttack):
        return {"kind": "attack", "eve_dim": reverse.eve_dim}
    raise DomainError(f"unsupported reverse channel {reverse!r}")


def transcript_to_dict(t: protocol.Transcript, include_records: bool = False) -> dict:
    """Transcript JSON document; per-iteration records are flag-gated."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "n_iterations": t.config.n_iterations,
            "b": t.config.b,
            "reverse": _reverse_dict(t.config.reverse),
            "seed": t.config.seed,
            "delta": t.config.delta,
            "test_threshold": t.config.test_threshold,
            "sizing_mode": t.config.sizing_mode,
        },
        "aborted": t.aborted,
        "abort_reason": t.abort_reason,
        "keep_rate": t.keep_rate,
        "efficiency": t.efficiency,
        "sifted_length": t.sifted_length,
        "n_target": t.n_target,
        "test_error_rate": t.test_error_rate,
        "stats": {
            "e_z": _ratio_dict(t.stats.e_z_hat),
            "e_x": _ratio_dict(t.stats.e_x_hat),
            "p00_ctrl": _ratio_dict(t.stats.p00_ctrl_hat),
            "p10_ctrl": _ratio_dict(t.stats.p10_ctrl_hat),
            "joint": [[float(x) for x in row] for row in t.stats.joint_hat],
            "kept": t.stats.kept,
        },
        "sifted_a": t.sifted_a,
        "sifted_b": t.sifted_b,
        "info_a": t.info_a,
        "info_b": t.info_b,
    }
    if include_records:
        doc["test_positions"] = t.test_positions
        doc["records"] = [
            {
                "bob_choice": r.bob_choice,
                "alice_basis": r.alice_basis,
                "alice_outcome": r.alice_outcome,
                "kept": r.kept,
                "k_a": r.k_a,
                "k_b": r.k_b,
            }
            for r in t.records
        ]
    return doc


def load_transcript(path) -> dict:
    """Read a transcript JSON document back."""
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def write_csv(rows, path: Path) -> None:
    """Write sweep rows as CSV: header b,p,r_lower, 9 significant digits,
    newline line terminator, atomically."""
    lines = ["b,p,r_lower"]
    for b, p, r in rows:
        lines.append(f"{b:.9g},{p:.9g},{r:#.9g}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def keyrate_report_dict(b: float, p: float) -> dict:
    """Key-rate report for the depolarizing channel, closed-form route,
    with the observable-route bound included as a diagnostic."""
    report = security.depolarizing_report(b, p)
    _, _, obs = security.depolarizing_statistics(b, p)
    observable_bound = security.overlap_lower_bound(ForwardAttack(b), obs)
    return {
        "b": b,
        "p": p,
        "bound": report.bound,
        "lambda": report.lam,
        "k1": report.k1,
        "k2": report.k2,
        "h_b_given_a": report.h_b_given_a,
        "r_lower": report.r_lower,
        "bound_observable_route": observable_bound,
    }


def cmd_simulate(args) -> int:
    config = protocol.ProtocolConfig(
        n_iterations=args.n,
        b=args.b,
        reverse=DepolarizingChannel(args.p),
        seed=args.seed,
        delta=args.delta,
        test_threshold=args.pt,
        sizing_mode=protocol.SIZING_PAPER if args.sizing == "paper" else protocol.SIZING_REALIZED,
    )
    transcript = protocol.run(config)
    doc = transcript_to_dict(transcript, include_records=args.records)
    _atomic_write_text(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_keyrate(args) -> int:
    print(json.dumps(keyrate_report_dict(args.b, args.p), indent=2))
    return 0


def cmd_threshold(args) -> int:
    p_star = security.threshold_p(args.b, tol=args.tol)
    doc = {"b": args.b, "tol": args.tol, "p_star": p_star, "e_z_threshold": p_star / 2.0}
    print(json.dumps(doc, indent=2))
    return 0


def cmd_sweep(args) -> int:
    try:
        b_values = [float(x) for x in args.b.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"--b expects comma-separated reals: {exc}") from exc
    if not b_values:
        raise UsageError("--b lists no values")
    if args.p_step <= 0.0:
        raise DomainError(f"--p-step must be positive, got {args.p_step}")
    if args.p_max < args.p_min:
        raise DomainError(f"--p-max {args.p_max} is below --p-min {args.p_min}")
    count = int(np.floor((args.p_max - args.p_min) / args.p_step + 1e-9)) + 1
    p_values = [args.p_min + k * args.p_step for k in range(count)]
    rows = security.sweep(b_values, p_values)
    write_csv(rows, args.out)
    if args.plot is not None:
        from .plotting import render_sweep_figure

        fd, tmp = tempfile.mkstemp(
            dir=str(args.plot.parent) or ".",
            prefix=args.plot.stem,
            suffix=args.plot.suffix or ".png",
        )
        os.close(fd)
        try:
            render_sweep_figure(rows, tmp)
            os.replace(tmp, args.plot)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"sqkd: error: usage: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sqkd: error: usage: {exc}", file=sys.stderr)
        return 1
    except (DomainError, InvariantViolation, security.DegenerateChannelError, security.NoThresholdError) as exc:
        print(f"sqkd: error: domain: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"sqkd: error: io: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
