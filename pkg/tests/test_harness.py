import dataclasses
import json

import numpy as np
import pytest

from ghostpuf import harness as H
from ghostpuf.challenge import InvalidInput
from ghostpuf.interface import InterfacedPuf
from ghostpuf.puf import FfPuf, XorPuf


def small(**kw):
    base = dict(label="tiny", puf_type="arbiter", n=16, noisiness=0.0, preset="single-unit",
                schedule=(300, 600), instances=2, seed=3)
    base.update(kw)
    return H.ExperimentSpec(**base)


@pytest.mark.parametrize("bad", [
    dict(schedule=()), dict(schedule=(600, 300)), dict(schedule=(300, 300)),
    dict(success_threshold=0.5), dict(puf_type="mux"), dict(preset="cnn"),
    dict(puf_type="arbiter", k=2), dict(m=-1), dict(instances=0), dict(weight_model="uniform"),
    dict(puf_type="ff", k=2, loops=((2, 5),)),
])
def test_invalid_specs(bad):
    with pytest.raises(InvalidInput):
        small(**bad)


def test_spec_dict_roundtrip():
    spec = small(puf_type="ff", k=2, loops=((2, 6), (3, 9)), m=2, weight_model="gate-delay")
    again = H.ExperimentSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again == spec
    with pytest.raises(InvalidInput):
        H.ExperimentSpec.from_dict({**spec.to_dict(), "bogus": 1})


def test_build_instance_types():
    assert isinstance(H.build_instance(small(puf_type="xor", k=3), 0), XorPuf)
    ff = H.build_instance(small(puf_type="ff", k=3, n=64, weight_model="gate-delay"), 0)
    assert isinstance(ff, FfPuf) and ff.loops == H.default_loops(64, 3)
    ipuf = H.build_instance(small(m=4), 1)
    assert isinstance(ipuf, InterfacedPuf) and ipuf.input_width == 20


def test_seed_isolation():
    one, three = small(instances=2), small(instances=3)
    assert H.build_instance(one, 1) == H.build_instance(three, 1)
    assert H.run_attack(one, 1, 300) == H.run_attack(three, 1, 300)
    assert H.build_instance(one, 0) != H.build_instance(one, 1)


def test_escalation_stops_at_first_converged_budget():
    spec = small(schedule=(300, 600, 1200), success_threshold=0.6)
    rep = H.escalate(spec)
    for o in rep.instances:
        assert o.converged_at == 300 and [c for c, _ in o.runs] == [300]
    assert rep.all_converged


def test_escalation_exhausts_schedule_when_unlearnable():
    spec = small(puf_type="xor", k=4, n=32, schedule=(200, 400), instances=1, success_threshold=0.99)
    rep = H.escalate(spec)
    o = rep.instances[0]
    assert o.converged_at is None and [c for c, _ in o.runs] == [200, 400]
    assert rep.converged_count == 0


def test_presets_match_tables():
    t3 = H.preset_table3()
    assert [r.label for r in t3] == ["1-XPUF", "3-XPUF", "Interfaced 1-XPUF", "Interfaced 3-XPUF"]
    assert [r.m for r in t3] == [None, None, 16, 16]
    assert t3[0].schedule == (5_000,) and t3[1].schedule[-1] == 9_000
    assert t3[2].schedule[-1] == 4_500_000 and all(r.instances == 30 for r in t3)
    assert all(r.noisiness == 0.01 and r.noisy and r.preset == "table1" for r in t3)
    t6 = H.preset_table6()
    assert (t6[0].k, t6[0].schedule) == (4, (70_000,))
    assert [r.schedule[-1] for r in t6] == [70_000, 180_000, 440_000, 520_000, 600_000, 770_000, 1_000_000]
    assert all(r.preset == "table4" and r.weight_model == "gate-delay" and r.m is None for r in t6)
    t7 = H.preset_table7()
    assert (t7[0].k, t7[0].m, t7[0].schedule[-1]) == (4, 4, 370_000)
    assert all(r.m == r.k for r in t7) and [r.k for r in t7] == list(range(4, 11))


def test_desk_scale_caps():
    for table in (3, 6, 7):
        for row in H.TABLE_PRESETS[table](desk_scale=True):
            assert row.schedule[-1] <= 500_000 and row.instances <= 3
    t3 = H.preset_table3(desk_scale=True)
    assert t3[1].schedule == (5_000, 9_000, 30_000)
    assert t3[2].schedule == H.DEFAULT_SCHEDULE
    assert H.preset_table6(desk_scale=True)[-1].schedule == (500_000,)


def test_records_and_rendering():
    spec_ok = small(success_threshold=0.6, schedule=(300,))
    spec_bad = small(label="hard", puf_type="xor", k=4, n=32, schedule=(200,), instances=1,
                     success_threshold=0.99)
    reports = [H.escalate(spec_ok), H.escalate(spec_bad)]
    recs = H.records(reports)
    assert len(recs) == 3 and all("wall_time" not in r for r in recs)
    assert H.loads_records(H.dumps_records(recs)) == recs
    assert {r["label"] for r in H.timings(reports)} == {"tiny", "hard"}
    table = H.render_table(reports)
    lines = table.splitlines()
    assert "PUF Type" in lines[1] and "Time" in lines[1]
    assert "sec" in lines[3] and "2/2" in lines[3]
    assert "No convergence" in lines[4] and "0/1" in lines[4]
    with pytest.raises(InvalidInput):
        H.render_table([])


def test_count_formatting():
    assert H._fmt_count(5_000) == "5K" and H._fmt_count(4_500_000) == "4.5M" and H._fmt_count(950) == "950"


@pytest.mark.parametrize("kw, budget", [
    (dict(puf_type="arbiter", noisiness=0.01, noisy=True, preset="table1", m=16), 5_000),
    (dict(puf_type="xor", k=3, noisiness=0.01, noisy=True, preset="table1", m=16), 30_000),
    (dict(puf_type="ff", k=4, weight_model="gate-delay", preset="table4", m=4), 30_000),
])
def test_interface_lowers_attack_accuracy(kw, budget):
    spec = H.ExperimentSpec("with interface", n=64, schedule=(budget,), instances=3, seed=21, **kw)
    bare = dataclasses.replace(spec, label="bare", m=None)
    acc = lambda s: np.mean([H.run_attack(s, i).test_accuracy for i in range(s.instances)])
    assert acc(spec) < acc(bare)
