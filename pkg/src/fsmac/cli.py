"""Batch command-line front-end.

Subcommands load a channel spec (JSON), run a computation, and write CSV/JSON
artifacts plus a run manifest (parameters, input hashes, wall time) so outputs
are reproducible byte-for-byte.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 resource bound.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from .channels import FeedbackFn, load_channel
from .dirinfo import (
    _noise_chain_of_additive,
    directed_info,
    directed_info_cc,
    entropy_rate_bounds,
)
from .errors import SizingError, SpecError
from .exponents import DEFAULT_RHO_GRID, exponent_curve, save_exponent_curve
from .probcore import CausalKernel, channel_causal_law, joint_law
from .regions import PolicyGrid, region_union, save_region
from .simulate import SimConfig, run_ensemble, save_result
from .verify import SUITES, run_suite


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(args, out_path: str, started: float) -> None:
    params = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": args.command,
        "parameters": params,
        "inputs": {args.spec: _sha256(args.spec)} if getattr(args, "spec", None) else {},
        "tool_version": __version__,
        "seed": getattr(args, "seed", None),
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    with open(out_path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)


def _feedback_pair(mode: str, channel) -> tuple[FeedbackFn, FeedbackFn]:
    if mode == "perfect":
        return FeedbackFn.perfect(1, channel.out), FeedbackFn.perfect(2, channel.out)
    if mode == "none":
        return FeedbackFn.null(1, channel.out), FeedbackFn.null(2, channel.out)
    if mode.startswith("quantized:"):
        K = int(mode.split(":", 1)[1])
        return (FeedbackFn.quantized(1, channel.out, K),
                FeedbackFn.quantized(2, channel.out, K))
    raise SpecError(f"unknown feedback mode {mode!r}")


def _s0_law(channel, s0: str, n: int):
    if s0 == "stationary":
        return channel_causal_law(channel, n=n, average_over_stationary=True)
    if s0.startswith("given:"):
        return channel_causal_law(channel, s0=int(s0.split(":", 1)[1]), n=n)
    raise SpecError(f"s0 mode {s0!r} not usable here (need given:ID or stationary)")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------
def cmd_region(args) -> int:
    channel = load_channel(args.spec)
    feedback = None if args.feedback == "none" else _feedback_pair(args.feedback, channel)
    grid = PolicyGrid(kind=args.grid_kind, resolution=args.grid)
    region = region_union(channel, args.n, grid, feedback=feedback,
                          variant=args.variant, s0_mode=args.s0)
    region.metadata["channel_sha256"] = _sha256(args.spec)
    save_region(region, args.out)
    return 0


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed, count=args.count)
    text = json.dumps(report, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0 if report["ok"] else 1


def cmd_simulate(args) -> int:
    channel = load_channel(args.spec)
    f1, f2 = _feedback_pair(args.feedback, channel)
    Z = max(f1.range_size, 1)
    from .probcore import Alphabet

    Q1 = CausalKernel.uniform(1, args.n, channel.in1, Alphabet(Z))
    Q2 = CausalKernel.uniform(2, args.n, channel.in2, Alphabet(Z))
    config = SimConfig(channel, Q1, Q2, f1, f2, n=args.n, K=args.K,
                       M1=args.M1, M2=args.M2, trials=args.trials,
                       seed=args.seed, s0_mode=args.s0)
    result = run_ensemble(config)
    save_result(result, args.out)
    return 0


def cmd_dirinfo(args) -> int:
    channel = load_channel(args.spec)
    law = _s0_law(channel, args.s0, args.n)
    U1 = CausalKernel.uniform(1, args.n, channel.in1, channel.out)
    U2 = CausalKernel.uniform(2, args.n, channel.in2, channel.out)
    joint = joint_law(U1, U2, law)
    rows = [("I_x1_cc", directed_info_cc(joint, "x1")),
            ("I_x2_cc", directed_info_cc(joint, "x2")),
            ("I_sum", directed_info(joint, "x1x2"))]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quantity", "total_bits", "per_use_bits"]
                        + [f"step_{i+1}" for i in range(args.n)])
        for name, bd in rows:
            writer.writerow([name, f"{bd.total:.12g}", f"{bd.total / args.n:.12g}"]
                            + [f"{v:.12g}" for v in bd.per_step])
    return 0


def cmd_exponent(args) -> int:
    channel = load_channel(args.spec)
    U1 = CausalKernel.uniform(1, args.n, channel.in1, channel.out)
    U2 = CausalKernel.uniform(2, args.n, channel.in2, channel.out)
    ev = exponent_curve(args.type, U1, U2, channel, args.n,
                        rho_grid=DEFAULT_RHO_GRID)
    save_exponent_curve(ev, args.out)
    return 0


def cmd_entropy(args) -> int:
    channel = load_channel(args.spec)
    noise = getattr(channel, "noise_chain", None)
    if noise is None:
        noise = _noise_chain_of_additive(channel)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "lower_bits", "upper_bits"])
        for n in range(1, args.n + 1):
            lo, hi = entropy_rate_bounds(noise, n)
            writer.writerow([n, f"{lo:.12g}", f"{hi:.12g}"])
    return 0


# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsmac",
                                description="finite-state MAC toolkit")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap (current computations are serial)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=True, out=True):
        if spec:
            sp.add_argument("--spec", required=True, help="channel spec JSON")
        if out:
            sp.add_argument("--out", required=True, help="output path")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("region", help="rate-region hull CSV")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--grid", type=int, default=16, help="pmf grid resolution")
    sp.add_argument("--grid-kind", choices=["iid", "causal"], default="iid")
    sp.add_argument("--feedback", default="none")
    sp.add_argument("--variant", choices=["inner", "outer"], default="inner")
    sp.add_argument("--s0", default="worst")
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", choices=sorted(SUITES))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="random code-tree ensemble run")
    common(sp)
    sp.add_argument("--n", type=int, required=True, help="block length")
    sp.add_argument("--K", type=int, default=1, help="concatenated blocks")
    sp.add_argument("--M1", type=int, default=2)
    sp.add_argument("--M2", type=int, default=2)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--feedback", default="perfect")
    sp.add_argument("--s0", default="given:0")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("dirinfo", help="directed informations, uniform inputs")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--s0", default="given:0")
    sp.set_defaults(func=cmd_dirinfo)

    sp = sub.add_parser("exponent", help="exponent curve CSV")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--type", type=int, choices=[1, 2, 3], default=3)
    sp.set_defaults(func=cmd_exponent)

    sp = sub.add_parser("entropy", help="noise entropy-rate bracket CSV")
    common(sp)
    sp.add_argument("--n", type=int, required=True, help="max horizon")
    sp.set_defaults(func=cmd_entropy)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        code = args.func(args)
    except SizingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SpecError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = getattr(args, "out", None)
    if out and code == 0:
        _write_manifest(args, out, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
