"""Command-line front end: ``python -m szegedy_gibbs <command> NET.json``.

Exit codes: 0 success, 1 an invariant check failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bayesnet import BayesianNetwork
from .chains import build_M1, build_M2, build_M_hyb, check_pair_detailed_balance, spectrum, stationarity_residuals
from .embedding import decompose_multiplexors
from .errors import NetworkFormatError, SzegedyGibbsError
from .sampler import (
    COMPARE_COLUMNS,
    SCHEMA_VERSION,
    compare,
    make_config,
    run_classical_sampler,
    run_quantum_sampler,
)
from .verification import run_ladder

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path) -> BayesianNetwork:
    try:
        return BayesianNetwork.from_json(Path(path))
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None


def _parse_x0(text, net):
    if text is None:
        return None
    try:
        values = tuple(int(v) for v in text.split(","))
        net.pack(values)
    except ValueError as exc:
        raise UsageError(f"--x0: {exc}") from None
    return values


def _positive(name, value, upper=None):
    if value is None:
        return
    if value <= 0 or (upper is not None and value >= upper):
        bound = f" and below {upper}" if upper is not None else ""
        raise UsageError(f"{name} must be positive{bound}, got {value}")


def _emit(args, payload, rows=None):
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_spectrum(args) -> int:
    net = _load(args.net)
    M1, M2 = build_M1(net), build_M2(net)
    M_hyb = build_M_hyb(M1, M2)
    spec = spectrum(M_hyb)
    st = stationarity_residuals(M1, M2, M_hyb, net.pi)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n_states": net.n_states,
        "delta": spec.delta,
        "spectrum": spec.to_dict(),
        "residuals": {
            "detailed_balance": check_pair_detailed_balance(M1, M2, net.pi),
            "stationarity_M1": st["M1"],
            "stationarity_M_hyb": st["M_hyb"],
            "reconstruction": spec.reconstruction_residual(),
        },
    }
    rows = [("j", "re", "im", "modulus", "phi", "eta")]
    for j, (m, p, e) in enumerate(zip(spec.eigenvalues, spec.phis, spec.etas)):
        rows.append((j, *(repr(float(v)) for v in (m.real, m.imag, abs(m), p, e))))
    _emit(args, payload, rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    net = _load(args.net)
    _positive("--epsilon2", args.epsilon2, 1.0)
    report = run_ladder(net, epsilon2=args.epsilon2 or 1 / 16)
    _emit(args, report)
    return EXIT_OK if report["ok"] else EXIT_INVARIANT


def cmd_compile(args) -> int:
    net = _load(args.net)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {"schema_version": SCHEMA_VERSION, "files": []}
    for which in (1, 2):
        gl = decompose_multiplexors(net, which, strict=True)
        path = out_dir / f"U{which}.gates"
        path.write_text(gl.to_text())
        summary["files"].append({"path": str(path), "gates": len(gl.gates)})
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_sample(args) -> int:
    net = _load(args.net)
    _positive("--shots", args.shots)
    x0 = _parse_x0(args.x0, net)
    if args.method == "classical":
        _positive("--burn-in", args.burn_in)
        report = run_classical_sampler(net, args.burn_in or 10, args.shots, args.seed, x0)
    else:
        _positive("--epsilon2", args.epsilon2, 1.0)
        for name in ("--probe-bits", "--pe-steps", "--grover-iters"):
            _positive(name, getattr(args, name[2:].replace("-", "_")))
        cfg = make_config(
            net,
            epsilon2=args.epsilon2 or 1 / 16,
            x0=x0,
            L=args.grover_iters,
            a=args.probe_bits,
            c=args.pe_steps,
            shots=args.shots,
            seed=args.seed,
        )
        report = run_quantum_sampler(net, cfg)
    rows = [("state", "assignment", "count", "pi", "pi_tilde")]
    for s in range(net.n_states):
        assignment = "".join(str(v) for v in net.unpack(s))
        rows.append((s, assignment, int(report.counts[s]), repr(float(net.pi[s])), repr(float(report.pi_tilde[s]))))
    _emit(args, report.to_dict(), rows)
    return EXIT_OK


def cmd_compare(args) -> int:
    paths = sorted({p for pattern in args.nets for p in glob.glob(pattern)})
    if not paths:
        raise UsageError(f"no network files match {args.nets}")
    _positive("--eps-target", args.eps_target, 1.0)
    results = []
    for p in paths:
        net = _load(p)
        results.append(compare(net, args.eps_target, name=Path(p).stem, shots=args.shots, seed=args.seed))
    rows = [COMPARE_COLUMNS] + [tuple(r["row"][k] for k in COMPARE_COLUMNS) for r in results]
    payload = {"schema_version": SCHEMA_VERSION, "results": results}
    _emit(args, payload, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="szegedy-gibbs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="json"):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default=fmt)
        p.add_argument("--out", help="write output here instead of stdout")

    p = sub.add_parser("spectrum", help="eigenvalues, gap and phase table of M_hyb")
    p.add_argument("net")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the invariant ladder")
    p.add_argument("net")
    p.add_argument("--epsilon2", type=float)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compile", help="write U1/U2 multiplexor gate lists")
    p.add_argument("net")
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("sample", help="run the quantum or classical sampler")
    p.add_argument("net")
    p.add_argument("--method", choices=("quantum", "classical"), default="quantum")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--epsilon2", type=float)
    p.add_argument("--probe-bits", type=int)
    p.add_argument("--pe-steps", type=int)
    p.add_argument("--grover-iters", type=int)
    p.add_argument("--burn-in", type=int, help="classical sweeps per chain (default 10)")
    p.add_argument("--x0", help="start state as comma-separated node values")
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("compare", help="quantum vs classical cost, one CSV row per net")
    p.add_argument("nets", nargs="+", help="network files or glob patterns")
    p.add_argument("--eps-target", type=float, default=0.25)
    p.add_argument("--shots", type=int, default=2000)
    common(p, fmt="csv")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NetworkFormatError as exc:
        err = {"error": "network_format", "field": exc.field, "message": exc.reason}
    except UsageError as exc:
        err = {"error": "usage", "message": str(exc)}
    except SzegedyGibbsError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(err) + "\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
