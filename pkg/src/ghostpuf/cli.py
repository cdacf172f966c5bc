"""Command-line interface: ``ghostpuf <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import crp as crp_mod
from . import harness, mlp
from .challenge import InvalidInput
from .instance_file import read_instance, write_instance
from .interface import interface
from .puf import WeightModel, default_loops, sample_arbiter, sample_ff, sample_xor


def parse_loops(text: str) -> tuple:
    """'(2,10);(5,20)' -> ((2, 10), (5, 20))."""
    try:
        return tuple(tuple(int(x) for x in part.strip().strip("()").split(","))
                     for part in text.split(";") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad loop list {text!r}") from None


def _weight_model(name: str) -> WeightModel:
    return harness.WEIGHT_MODELS[name]


def cmd_gen_puf(args) -> int:
    rng = np.random.default_rng(args.seed)
    model = _weight_model(args.weight_model)
    if args.type == "arbiter":
        puf = sample_arbiter(rng, args.n, model, args.noisiness)
    elif args.type == "xor":
        puf = sample_xor(rng, args.n, args.k, model, args.noisiness)
    else:
        loops = args.loops if args.loops is not None else default_loops(args.n, args.k)
        puf = sample_ff(rng, args.n, loops, model, args.noisiness)
    if args.m is not None:
        puf = interface(rng, puf, args.m)
    write_instance(args.out, puf, args.seed)
    return 0


def cmd_gen_crps(args) -> int:
    puf, _ = read_instance(args.puf)
    crp_mod.stream_crps(puf, args.count, args.seed, args.out, args.noisy)
    return 0


def _write_report(path, recs, times) -> None:
    if path is None:
        return
    Path(path).write_text(harness.dumps_records(recs))
    Path(str(path) + ".timing.jsonl").write_text(harness.dumps_records(times))


def cmd_attack(args) -> int:
    crps = crp_mod.read_crps(args.crps)
    model, report = harness.attack_crps(crps, args.preset, args.seed, args.raw_bits, args.lr)
    print(f"CRPs {len(crps)}  width {crps.width}  test accuracy {report.test_accuracy:.4f}  "
          f"epochs {report.epochs_run}  time {report.wall_time:.1f} sec  "
          f"{'converged' if report.converged else 'No convergence'}")
    rec = {"crps_file": str(args.crps), "crps": len(crps), "width": crps.width, "type": crps.puf_type,
           "preset": args.preset, "raw_bits": args.raw_bits, "seed": args.seed, "lr": args.lr,
           "epochs": report.epochs_run, "best_epoch": report.best_epoch,
           "validation_accuracy": report.best_validation_accuracy,
           "test_accuracy": report.test_accuracy, "converged": report.converged}
    _write_report(args.report, [rec], [{"crps_file": str(args.crps), "wall_time": report.wall_time}])
    if args.model_out:
        mlp.write_model(model, args.model_out)
    return 0


def _run_specs(specs, report_path) -> int:
    reports = [harness.escalate(spec) for spec in specs]
    print(harness.render_table(reports))
    _write_report(report_path, harness.records(reports), harness.timings(reports))
    return 0


def cmd_escalate(args) -> int:
    raw = json.loads(Path(args.spec).read_text())
    specs = [harness.ExperimentSpec.from_dict(d) for d in (raw if isinstance(raw, list) else [raw])]
    if args.desk_scale:
        specs = [s.desk() for s in specs]
    return _run_specs(specs, args.report)


def cmd_reproduce(args) -> int:
    specs = harness.TABLE_PRESETS[args.table](args.desk_scale, args.seed)
    return _run_specs(specs, args.report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghostpuf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-puf", help="sample a PUF instance file")
    p.add_argument("--type", choices=("arbiter", "xor", "ff"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--loops", type=parse_loops, help="FF loops, e.g. '(16,32);(26,42)'")
    p.add_argument("--noisiness", type=float, default=0.0)
    p.add_argument("--m", type=int, help="ghost bits (adds the obfuscating interface)")
    p.add_argument("--weight-model", choices=sorted(harness.WEIGHT_MODELS), default="standard-normal")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_puf)

    p = sub.add_parser("gen-crps", help="generate CRPs from an instance file")
    p.add_argument("--puf", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--noisy", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_crps)

    p = sub.add_parser("attack", help="train an attack network on a CRP file")
    p.add_argument("--crps", required=True)
    p.add_argument("--preset", choices=sorted(mlp.PRESETS), default="table1")
    p.add_argument("--raw-bits", action="store_true", help="skip the parity input layer")
    p.add_argument("--lr", type=float, default=harness.ATTACK_LR)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report")
    p.add_argument("--model-out")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("escalate", help="run an experiment spec (JSON) with CRP escalation")
    p.add_argument("--spec", required=True)
    p.add_argument("--desk-scale", action="store_true")
    p.add_argument("--report")
    p.set_defaults(func=cmd_escalate)

    p = sub.add_parser("reproduce", help="rerun a table of attack experiments")
    p.add_argument("--table", type=int, choices=sorted(harness.TABLE_PRESETS), required=True)
    p.add_argument("--desk-scale", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidInput, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
