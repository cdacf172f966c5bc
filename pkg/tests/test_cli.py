import json

import numpy as np
import pytest

from ghostpuf import cli, harness
from ghostpuf.crp import read_crps
from ghostpuf.instance_file import read_instance
from ghostpuf.interface import InterfacedPuf
from ghostpuf.mlp import read_model


def test_parse_loops():
    assert cli.parse_loops("(2,10);(5,20)") == ((2, 10), (5, 20))


def test_pipeline(tmp_path):
    inst, crps, report, model = (tmp_path / n for n in ("p.txt", "c.txt", "r.jsonl", "m.txt"))
    assert cli.main(["gen-puf", "--type", "xor", "--n", "16", "--k", "2", "--noisiness", "0.01",
                     "--m", "4", "--seed", "5", "--out", str(inst)]) == 0
    puf, seed = read_instance(inst)
    assert isinstance(puf, InterfacedPuf) and seed == 5 and puf.input_width == 20
    assert cli.main(["gen-crps", "--puf", str(inst), "--count", "2000", "--noisy",
                     "--seed", "1", "--out", str(crps)]) == 0
    data = read_crps(crps)
    assert len(data) == 2000 and data.width == 20 and data.noisy
    assert cli.main(["attack", "--crps", str(crps), "--preset", "single-unit", "--seed", "2",
                     "--report", str(report), "--model-out", str(model)]) == 0
    rec = json.loads(report.read_text())
    assert rec["crps"] == 2000 and 0 <= rec["test_accuracy"] <= 1 and "wall_time" not in rec
    assert "wall_time" in json.loads((tmp_path / "r.jsonl.timing.jsonl").read_text())
    assert read_model(model).architecture.input_width == 20


def test_ff_gen_puf_default_loops(tmp_path):
    out = tmp_path / "ff.txt"
    assert cli.main(["gen-puf", "--type", "ff", "--n", "32", "--k", "3", "--weight-model", "gate-delay",
                     "--seed", "1", "--out", str(out)]) == 0
    puf, _ = read_instance(out)
    assert puf.loops == harness.default_loops(32, 3)
    out2 = tmp_path / "ff2.txt"
    assert cli.main(["gen-puf", "--type", "ff", "--n", "32", "--k", "1", "--loops", "(3,9)",
                     "--seed", "1", "--out", str(out2)]) == 0
    assert read_instance(out2)[0].loops == ((3, 9),)


def test_escalate_command(tmp_path, capsys):
    spec = harness.ExperimentSpec("tiny", "arbiter", n=16, preset="single-unit", schedule=(300, 600),
                                  instances=1, success_threshold=0.6)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps([spec.to_dict()]))
    report = tmp_path / "out.jsonl"
    assert cli.main(["escalate", "--spec", str(path), "--desk-scale", "--report", str(report)]) == 0
    assert "tiny" in capsys.readouterr().out
    assert len(harness.loads_records(report.read_text())) >= 1


def test_reproduce_is_byte_deterministic(tmp_path, monkeypatch):
    def tiny_table(desk_scale=False, seed=0):
        return [harness.ExperimentSpec("tiny", "xor", n=16, k=2, noisiness=0.01, noisy=True, m=2,
                                       preset="table1", schedule=(400, 800), instances=2, seed=seed)]
    monkeypatch.setitem(harness.TABLE_PRESETS, 3, tiny_table)
    outs = []
    for name in ("a.jsonl", "b.jsonl"):
        path = tmp_path / name
        assert cli.main(["reproduce", "--table", "3", "--desk-scale", "--report", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0]


def test_errors_give_nonzero_exit(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("#crp width=4 type=arbiter seed=1 noisy=0\n01x1 1\n")
    assert cli.main(["attack", "--crps", str(bad), "--seed", "1"]) != 0
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["gen-crps", "--puf", str(tmp_path / "missing"), "--count", "5",
                     "--seed", "1", "--out", str(tmp_path / "o")]) != 0
    with pytest.raises(SystemExit):
        cli.main(["reproduce", "--table", "5"])
