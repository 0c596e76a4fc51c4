"""Command-line entry point: ``qwalk simulate | boundstates | scan | rerun``.

Records go to CSV (header row, LF endings) or to a single JSON object
``{"manifest": ..., "records": [...]}``. A CSV written to ``--out`` gets a
``<out>.manifest.json`` sidecar. Floats are written in shortest
round-trip form, so identical flags give byte-identical record bodies.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from datetime import datetime, timezone
from typing import Any, Sequence

from qwalk import __version__
from qwalk.boundstate import find_bound_states
from qwalk.core import DefectConfig, InitialState, make_coin, make_initial_state
from qwalk.evolution import WindowOverflowError, distribution, evolve, time_averaged_probability
from qwalk.localization import defect_position_scan, theta_scan

EXIT_OK, EXIT_USAGE, EXIT_OVERFLOW = 0, 2, 3

SIMULATE_FIELDS = ["position", "probability", "alpha_re", "alpha_im", "beta_re", "beta_im"]
BOUND_FIELDS = [
    "state", "eigenphase", "y_re", "y_im", "offset",
    "alpha_re", "alpha_im", "alpha_abs", "beta_re", "beta_im", "beta_abs",
]
SCAN_FIELDS = ["value", "predicted", "simulated", "relative_deviation"]

_PI_RE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*(?:pi|π)\s*(?:/\s*(\d+\.?\d*))?\s*$")


class UsageError(ValueError):
    pass


def parse_angle(text: str) -> float:
    """Decimal radians, or ``pi``, ``pi/N``, ``k*pi/N`` (``π`` also accepted)."""
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        if coef in ("", "+"):
            k = 1.0
        elif coef == "-":
            k = -1.0
        else:
            k = float(coef)
        den = float(m.group(2)) if m.group(2) else 1.0
        return k * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def fmt(x: float | int | None) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def default_steps(defect_pos: int, start: int) -> int:
    return 480 if (defect_pos - start) % 2 == 0 else 481


def manifest(command: str, params: dict[str, Any], **extra: Any) -> dict[str, Any]:
    out = {
        "command": command,
        "parameters": params,
        "tool": "qwalk",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    out.update(extra)
    return out


def _records_csv(fields: list[str], records: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow([fmt(r[f]) for f in fields])
    return buf.getvalue()


def _records_json(man: dict[str, Any], records: list[dict[str, Any]]) -> str:
    return json.dumps({"manifest": man, "records": records}, indent=1) + "\n"


def emit(
    fields: list[str], records: list[dict[str, Any]], man: dict[str, Any], out: str | None, fmt_: str
) -> None:
    text = _records_json(man, records) if fmt_ == "json" else _records_csv(fields, records)
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if fmt_ == "csv":
        with open(out + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(man, fh, indent=1)
            fh.write("\n")


def _check_phi(phi: float) -> None:
    if not 0.0 <= phi < 1.0:
        raise UsageError(f"--phi must lie in [0, 1), got {phi}")


def _check_theta(theta: float) -> None:
    if not 0.0 < theta < math.pi / 2:
        raise UsageError(f"--theta must lie in (0, pi/2), got {theta}")


def cmd_simulate(args: argparse.Namespace) -> int:
    _check_phi(args.phi)
    steps = default_steps(args.defect_pos, args.start) if args.steps is None else args.steps
    if steps < 0:
        raise UsageError("--steps must be non-negative")
    ini = InitialState(args.varphi, args.delta, args.start)
    state = evolve(make_initial_state(ini, steps), make_coin(args.theta), DefectConfig(args.defect_pos, args.phi), steps)
    p = distribution(state).p
    records = []
    for n in range(args.start - steps, args.start + steps + 1):
        i = state.index(n)
        a, b = state.alpha[i], state.beta[i]
        records.append({
            "position": n, "probability": float(p[i]),
            "alpha_re": float(a.real), "alpha_im": float(a.imag),
            "beta_re": float(b.real), "beta_im": float(b.imag),
        })
    params = {
        "theta": args.theta, "phi": args.phi, "defect_pos": args.defect_pos, "steps": steps,
        "varphi": args.varphi, "delta": args.delta, "start": args.start,
    }
    emit(SIMULATE_FIELDS, records, manifest("simulate", params), args.out, args.format)
    return EXIT_OK


def cmd_boundstates(args: argparse.Namespace) -> int:
    _check_phi(args.phi)
    _check_theta(args.theta)
    states = find_bound_states(args.theta, args.phi, args.defect_pos, args.window)
    records = []
    for idx, bs in enumerate(states):
        for k in range(-bs.window, bs.window + 1):
            a, b = bs.amplitudes(k)
            records.append({
                "state": idx, "eigenphase": bs.eigenphase, "y_re": bs.y.real, "y_im": bs.y.imag,
                "offset": k, "alpha_re": a.real, "alpha_im": a.imag, "alpha_abs": abs(a),
                "beta_re": b.real, "beta_im": b.imag, "beta_abs": abs(b),
            })
    params = {"theta": args.theta, "phi": args.phi, "defect_pos": args.defect_pos, "window": args.window}
    extra: dict[str, Any] = {"bound_states": len(states)}
    if not states:
        extra["note"] = "no bound states for these parameters"
    emit(BOUND_FIELDS, records, manifest("boundstates", params, **extra), args.out, args.format)
    return EXIT_OK


def _workers(n: int) -> int:
    cap = os.environ.get("QWALK_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, limit))


def cmd_scan(args: argparse.Namespace) -> int:
    _check_phi(args.phi)
    ini = InitialState(args.varphi, args.delta, args.start)
    raw = [v for v in args.values.split(",") if v.strip()]
    if not raw:
        raise UsageError("--values is empty")
    if args.scan == "theta":
        values: list[Any] = [parse_angle(v) for v in raw]
        for th in values:
            _check_theta(th)
        pred = theta_scan(values, args.phi, args.defect_pos, ini, args.defect_pos, workers=_workers(len(values)))
        points = [(v, v, args.defect_pos) for v in values]
    else:
        _check_theta(args.theta)
        try:
            values = [int(v) for v in raw]
        except ValueError:
            raise UsageError("--values for defect-pos must be integers") from None
        pred = defect_position_scan(values, args.theta, args.phi, ini, workers=_workers(len(values)))
        points = [(v, args.theta, v) for v in values]

    records = []
    for value, theta, m in points:
        sim = None
        if args.simulate_check is not None:
            t1 = args.simulate_check
            avg = time_averaged_probability(ini, make_coin(theta), DefectConfig(m, args.phi), [m], max(0, t1 - 100), t1)
            sim = avg[m][0]
        p = pred[value]
        dev = abs(sim - p) / p if sim is not None and p > 0 else None
        records.append({"value": value, "predicted": p, "simulated": sim, "relative_deviation": dev})
    params = {
        "scan": args.scan, "values": args.values, "theta": args.theta, "phi": args.phi,
        "defect_pos": args.defect_pos, "varphi": args.varphi, "delta": args.delta,
        "start": args.start, "simulate_check": args.simulate_check,
    }
    emit(SCAN_FIELDS, records, manifest("scan", params), args.out, args.format)
    return EXIT_OK


def cmd_rerun(args: argparse.Namespace) -> int:
    """Re-execute the command recorded in a manifest (JSON output or sidecar)."""
    with open(args.manifest, encoding="utf-8") as fh:
        data = json.load(fh)
    man = data.get("manifest", data)
    argv = [man["command"]]
    for key, val in man["parameters"].items():
        if val is None:
            continue
        argv += [f"--{key.replace('_', '-')}", val if isinstance(val, str) else repr(val)]
    argv += ["--format", args.format]
    if args.out:
        argv += ["--out", args.out]
    return main(argv)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, theta_default: float | None = math.pi / 6) -> None:
        p.add_argument("--theta", type=parse_angle, default=theta_default, help="coin angle, radians or pi/N")
        p.add_argument("--phi", type=float, default=0.5, help="defect phase in [0, 1)")
        p.add_argument("--defect-pos", type=int, default=2)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    def initial(p: argparse.ArgumentParser) -> None:
        p.add_argument("--varphi", type=parse_angle, default=math.pi / 4)
        p.add_argument("--delta", type=parse_angle, default=math.pi / 2)
        p.add_argument("--start", type=int, default=0)

    p = sub.add_parser("simulate", help="evolve the walker and dump the final amplitudes")
    common(p)
    initial(p)
    p.add_argument("--steps", type=int, default=None, help="default 480/481 by defect parity")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("boundstates", help="closed-form bound states around the defect")
    common(p)
    p.add_argument("--window", type=int, default=None, help="even half-width in sites")
    p.set_defaults(func=cmd_boundstates)

    p = sub.add_parser("scan", help="asymptotic defect-site probability over theta or defect position")
    common(p)
    initial(p)
    p.add_argument("--scan", choices=("theta", "defect-pos"), required=True)
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--simulate-check", type=int, default=None, metavar="STEPS",
                   help="add a time-averaged simulated column ending at STEPS")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("rerun", help="repeat a run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"qwalk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WindowOverflowError as exc:
        print(f"qwalk: window overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the flush at exit
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
