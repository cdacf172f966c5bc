"""End-to-end attack experiments: instance sampling, CRP escalation, reporting.

Every random choice is derived from ``(spec.seed, instance index, purpose)``,
so an instance's results do not depend on how many other instances run.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import crp as crp_mod
from . import mlp
from .challenge import InvalidInput
from .interface import interface
from .puf import GATE_DELAY, STANDARD_NORMAL, default_loops, sample_arbiter, sample_ff, sample_xor

log = logging.getLogger(__name__)

DESK_CAP = 500_000
DESK_INSTANCES = 3
DEFAULT_SCHEDULE = (1_000, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000, 200_000, 500_000)
WEIGHT_MODELS = {"standard-normal": STANDARD_NORMAL, "gate-delay": GATE_DELAY}
# Base Adam step for the attack presets (see README, "Training defaults").
ATTACK_LR = 1e-2


@dataclass(frozen=True)
class ExperimentSpec:
    label: str
    puf_type: str                 # arbiter | xor | ff
    n: int = 64
    k: int = 1                    # XOR components or FF loop count
    loops: tuple | None = None    # FF only; None selects default_loops(n, k)
    weight_model: str = "standard-normal"
    noisiness: float = 0.0
    noisy: bool = False           # noisy responses in generated CRPs
    m: int | None = None          # ghost bits; None means no interface
    preset: str = "table1"
    schedule: tuple = (5_000,)
    success_threshold: float = 0.9
    instances: int = 3
    seed: int = 0
    raw_bits: bool = False
    lr: float = ATTACK_LR

    def __post_init__(self):
        object.__setattr__(self, "schedule", tuple(int(s) for s in self.schedule))
        if self.loops is not None:
            object.__setattr__(self, "loops", tuple(tuple(int(x) for x in lp) for lp in self.loops))
        self.validate()

    def validate(self) -> None:
        if self.puf_type not in ("arbiter", "xor", "ff"):
            raise InvalidInput(f"unknown PUF type {self.puf_type!r}")
        if self.n < 1 or self.k < 1 or (self.puf_type == "arbiter" and self.k != 1):
            raise InvalidInput("need n >= 1, k >= 1 (k = 1 for a plain arbiter)")
        if self.weight_model not in WEIGHT_MODELS:
            raise InvalidInput(f"unknown weight model {self.weight_model!r}")
        if self.preset not in mlp.PRESETS:
            raise InvalidInput(f"unknown attack preset {self.preset!r}")
        s = self.schedule
        if not s or s[0] < 20 or any(b <= a for a, b in zip(s, s[1:])):
            raise InvalidInput("schedule must be nonempty, strictly increasing, each >= 20")
        if not 0.5 < self.success_threshold <= 1:
            raise InvalidInput("success threshold must lie in (0.5, 1]")
        if self.instances < 1 or (self.m is not None and self.m < 0) or self.noisiness < 0:
            raise InvalidInput("need instances >= 1, m >= 0 and noisiness >= 0")
        if self.puf_type == "ff" and self.loops is not None and len(self.loops) != self.k:
            raise InvalidInput("FF loop list length must equal k")

    def desk(self, cap: int = DESK_CAP, instances: int = DESK_INSTANCES) -> "ExperimentSpec":
        schedule = tuple(b for b in self.schedule if b < cap)
        if self.schedule[-1] >= cap:
            schedule += (cap,)
        return dataclasses.replace(self, schedule=schedule, instances=min(self.instances, instances))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["schedule"] = list(self.schedule)
        d["loops"] = None if self.loops is None else [list(lp) for lp in self.loops]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidInput(f"unknown spec fields: {sorted(unknown)}")
        d = dict(d)
        if d.get("loops") is not None:
            d["loops"] = tuple(tuple(lp) for lp in d["loops"])
        if "schedule" in d:
            d["schedule"] = tuple(d["schedule"])
        return cls(**d)


def sub_seed(seed: int, *labels) -> int:
    words = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF]
    words += [int(x) if isinstance(x, int) else zlib.crc32(x.encode()) for x in labels]
    hi, lo = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return (int(hi) << 31) | (int(lo) >> 1)


def build_instance(spec: ExperimentSpec, index: int):
    """The (possibly interfaced) PUF for instance ``index``; deterministic."""
    rng = np.random.default_rng(sub_seed(spec.seed, index, "puf"))
    model = WEIGHT_MODELS[spec.weight_model]
    if spec.puf_type == "arbiter":
        puf = sample_arbiter(rng, spec.n, model, spec.noisiness)
    elif spec.puf_type == "xor":
        puf = sample_xor(rng, spec.n, spec.k, model, spec.noisiness)
    else:
        loops = spec.loops if spec.loops is not None else default_loops(spec.n, spec.k)
        puf = sample_ff(rng, spec.n, loops, model, spec.noisiness)
    if spec.m is not None:
        puf = interface(np.random.default_rng(sub_seed(spec.seed, index, "mask")), puf, spec.m)
    return puf


def attack_crps(crps: crp_mod.CrpSet, preset: str, seed: int, raw_bits: bool = False,
                lr: float = ATTACK_LR, success_threshold: float = 0.9):
    """Split 85-5-10, train the preset network, evaluate; returns (model, TrainReport)."""
    train_set, val_set, test_set = crp_mod.split(crps, crp_mod.PAPER_SPLIT, sub_seed(seed, "split"))
    pre = mlp.PRESETS[preset]
    model = mlp.init_model(pre.architecture(crps.width, raw_bits), sub_seed(seed, "init"))
    config = pre.config(sub_seed(seed, "train"), lr=lr)
    report = mlp.train(model, train_set, val_set, config, test_set, success_threshold)
    return model, report


def run_attack(spec: ExperimentSpec, instance_index: int, budget: int | None = None) -> mlp.TrainReport:
    spec.validate()
    budget = spec.schedule[-1] if budget is None else int(budget)
    target = build_instance(spec, instance_index)
    crps = crp_mod.generate_crps(target, budget, sub_seed(spec.seed, instance_index, "crps"), spec.noisy)
    _, report = attack_crps(crps, spec.preset, sub_seed(spec.seed, instance_index, budget),
                            spec.raw_bits, spec.lr, spec.success_threshold)
    log.info("%s instance %d, %d CRPs: accuracy %.4f (%d epochs, %.1fs)", spec.label,
             instance_index, budget, report.test_accuracy, report.epochs_run, report.wall_time)
    return report


@dataclass
class InstanceOutcome:
    index: int
    runs: list = field(default_factory=list)   # [(crp_count, TrainReport)]

    @property
    def converged_at(self) -> int | None:
        return next((count for count, r in self.runs if r.converged), None)

    @property
    def best_accuracy(self) -> float:
        return max(r.test_accuracy for _, r in self.runs)

    @property
    def final(self):
        return self.runs[-1]


@dataclass
class EscalationReport:
    spec: ExperimentSpec
    instances: list

    @property
    def converged_count(self) -> int:
        return sum(o.converged_at is not None for o in self.instances)

    @property
    def mean_best_accuracy(self) -> float:
        return float(np.mean([o.best_accuracy for o in self.instances]))

    @property
    def mean_final_accuracy(self) -> float:
        return float(np.mean([o.final[1].test_accuracy for o in self.instances]))

    @property
    def all_converged(self) -> bool:
        return self.converged_count == len(self.instances)


def escalate(spec: ExperimentSpec, indices=None) -> EscalationReport:
    """Walk the CRP schedule per instance, stopping at the first converged budget."""
    spec.validate()
    indices = range(spec.instances) if indices is None else indices
    outcomes = []
    for i in indices:
        outcome = InstanceOutcome(i)
        for budget in spec.schedule:
            report = run_attack(spec, i, budget)
            outcome.runs.append((budget, report))
            if report.converged:
                break
        outcomes.append(outcome)
    return EscalationReport(spec, outcomes)


# -- presets -----------------------------------------------------------------

def _escalation_to(budget: int) -> tuple:
    return tuple(b for b in DEFAULT_SCHEDULE if b < budget) + (budget,)


def preset_table3(desk_scale: bool = False, seed: int = 0) -> list:
    common = dict(n=64, weight_model="standard-normal", noisiness=0.01, noisy=True,
                  preset="table1", instances=30, seed=seed)
    rows = [
        ExperimentSpec("1-XPUF", "arbiter", k=1, schedule=(5_000,), **common),
        ExperimentSpec("3-XPUF", "xor", k=3, schedule=(5_000, 9_000, 30_000) if desk_scale
                       else (5_000, 9_000), **common),
        ExperimentSpec("Interfaced 1-XPUF", "arbiter", k=1, m=16,
                       schedule=_escalation_to(4_500_000), **common),
        ExperimentSpec("Interfaced 3-XPUF", "xor", k=3, m=16,
                       schedule=_escalation_to(4_500_000), **common),
    ]
    return [r.desk() for r in rows] if desk_scale else rows


TABLE6_BUDGETS = {4: 70_000, 5: 180_000, 6: 440_000, 7: 520_000, 8: 600_000, 9: 770_000, 10: 1_000_000}
TABLE7_BUDGETS = {4: 370_000, **{k: 4_500_000 for k in range(5, 11)}}


def _ff_common(seed: int) -> dict:
    return dict(n=64, weight_model="gate-delay", noisiness=0.0, noisy=False,
                preset="table4", instances=3, seed=seed)


def preset_table6(desk_scale: bool = False, seed: int = 0) -> list:
    rows = [ExperimentSpec(f"FF {k} loops", "ff", k=k, schedule=(budget,), **_ff_common(seed))
            for k, budget in TABLE6_BUDGETS.items()]
    return [r.desk() for r in rows] if desk_scale else rows


def preset_table7(desk_scale: bool = False, seed: int = 0) -> list:
    rows = [ExperimentSpec(f"Interfaced FF {k} loops", "ff", k=k, m=k,
                           schedule=_escalation_to(budget), **_ff_common(seed))
            for k, budget in TABLE7_BUDGETS.items()]
    return [r.desk() for r in rows] if desk_scale else rows


TABLE_PRESETS = {3: preset_table3, 6: preset_table6, 7: preset_table7}


# -- reporting ---------------------------------------------------------------

def records(reports) -> list:
    """One deterministic record per (instance, budget) run; wall time excluded."""
    out = []
    for rep in reports:
        spec = rep.spec.to_dict()
        for outcome in rep.instances:
            for count, r in outcome.runs:
                out.append({**spec, "instance": outcome.index, "crps": count,
                            "epochs": r.epochs_run, "best_epoch": r.best_epoch,
                            "validation_accuracy": r.best_validation_accuracy,
                            "test_accuracy": r.test_accuracy, "converged": r.converged})
    return out


def timings(reports) -> list:
    return [{"label": rep.spec.label, "instance": o.index, "crps": count, "wall_time": r.wall_time}
            for rep in reports for o in rep.instances for count, r in o.runs]


def dumps_records(recs) -> str:
    return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in recs)


def loads_records(text: str) -> list:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _fmt_count(count: int) -> str:
    if count >= 1_000_000:
        return f"{count / 1e6:g}M"
    if count >= 1_000:
        return f"{count / 1e3:g}K"
    return str(count)


def summary_rows(reports) -> list:
    rows = []
    for rep in reports:
        converged = rep.all_converged
        if converged:
            crps = max(o.converged_at for o in rep.instances)
            acc = float(np.mean([r.test_accuracy for o in rep.instances
                                 for c, r in o.runs if c == o.converged_at]))
            secs = float(np.mean([o.final[1].wall_time for o in rep.instances]))
            time_col = f"{secs:.1f} sec"
        else:
            crps = rep.spec.schedule[-1]
            acc = rep.mean_best_accuracy
            time_col = "No convergence"
        rows.append({"label": rep.spec.label, "crps": crps, "accuracy": acc,
                     "time": time_col, "converged": f"{rep.converged_count}/{len(rep.instances)}"})
    return rows


def render_table(reports) -> str:
    rows = summary_rows(reports)
    if not rows:
        raise InvalidInput("nothing to report")
    head = ("PUF Type", "CRPs", "Accuracy", "Time", "Converged")
    body = [(r["label"], _fmt_count(r["crps"]), f"{100 * r['accuracy']:.1f} %", r["time"], r["converged"])
            for r in rows]
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
    line = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    fmt = lambda cells: "| " + " | ".join(str(c).ljust(w) for c, w in zip(cells, widths)) + " |"
    return "\n".join([line, fmt(head), line, *(fmt(b) for b in body), line])
