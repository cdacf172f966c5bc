import numpy as np
import pytest

from ghostpuf import crp as C
from ghostpuf import puf as P
from ghostpuf.challenge import InvalidInput
from ghostpuf.interface import interface
from oracles import phi_bruteforce


@pytest.fixture(scope="module")
def ipuf():
    return interface(1, P.sample_xor(1, 64, 3, noisiness=0.01), 16)


def test_width_and_determinism(ipuf):
    a = C.generate_crps(ipuf, 1000, seed=5, noisy=True)
    b = C.generate_crps(ipuf, 1000, seed=5, noisy=True)
    assert a.width == 80 and len(a) == 1000
    assert a == b
    assert a != C.generate_crps(ipuf, 1000, seed=6, noisy=True)


def test_responses_match_independent_evaluation():
    puf = P.sample_arbiter(3, 4)
    crps = C.generate_crps(puf, 200, seed=1)
    for row, r in zip(crps.inputs.tolist(), crps.responses):
        d = puf.v + sum(w * f for w, f in zip(puf.w, phi_bruteforce(row)))
        assert r == (1 if d >= 0 else 0)


def test_order_independence(ipuf):
    whole = C.generate_crps(ipuf, 2_500, seed=9, noisy=True)
    pieces = [C.generate_crps(ipuf, 1_000, seed=9, noisy=True, start=s) for s in (1_500, 0, 1_000)]
    chunked = np.concatenate([pieces[1].inputs, pieces[2].inputs[:500], pieces[0].inputs])
    assert np.array_equal(chunked, whole.inputs)
    assert np.array_equal(pieces[2].responses, whole.responses[1_000:2_000])
    odd = list(C.iter_crps(ipuf, 2_500, 9, True, chunk=333))
    assert np.array_equal(np.concatenate([r for _, r in odd]), whole.responses)


def test_noise_changes_some_responses_reproducibly():
    puf = P.sample_arbiter(4, 64, noisiness=0.05)
    clean = C.generate_crps(puf, 20_000, seed=2)
    noisy = C.generate_crps(puf, 20_000, seed=2, noisy=True)
    assert np.array_equal(clean.inputs, noisy.inputs)
    flips = np.mean(clean.responses != noisy.responses)
    assert 0 < flips < 0.1


def test_response_balance():
    crps = C.generate_crps(P.sample_arbiter(10, 64), 100_000, seed=3)
    assert 0.40 <= crps.responses.mean() <= 0.60


def test_split_sizes_and_partition():
    crps = C.generate_crps(P.sample_arbiter(0, 16), 1001, seed=0)
    tr, va, te = C.split(crps, C.SplitSpec(0.85, 0.05, 0.10), seed=1)
    assert (len(tr), len(va), len(te)) == (851, 50, 100)
    assert C.split_sizes(1000, C.PAPER_SPLIT) == (850, 50, 100)
    union = np.concatenate([np.column_stack([s.inputs, s.responses]) for s in (tr, va, te)])
    orig = np.column_stack([crps.inputs, crps.responses])
    assert sorted(map(bytes, union)) == sorted(map(bytes, orig))
    again = C.split(crps, seed=1)
    assert all(x == y for x, y in zip(again, (tr, va, te)))


def test_split_errors():
    crps = C.generate_crps(P.sample_arbiter(0, 8), 25, seed=0)
    with pytest.raises(InvalidInput):
        C.SplitSpec(0.8, 0.1, 0.2)
    with pytest.raises(InvalidInput):
        C.split(crps, C.SplitSpec(0.98, 0.01, 0.01))
    with pytest.raises(InvalidInput):
        C.split(crps.subset(slice(0, 19)))


def test_file_roundtrip(tmp_path, ipuf):
    crps = C.generate_crps(ipuf, 3_000, seed=4, noisy=True)
    path = tmp_path / "crps.txt"
    C.write_crps(crps, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "#crp width=80 type=xor seed=4 noisy=1"
    assert len(lines[1]) == 82 and lines[1][80] == " "
    assert C.read_crps(path) == crps
    streamed = tmp_path / "streamed.txt"
    C.stream_crps(ipuf, 3_000, 4, streamed, noisy=True)
    assert streamed.read_bytes() == path.read_bytes()


def test_interfaced_file_looks_like_bare(tmp_path, ipuf):
    bare = P.sample_xor(2, 80, 3, noisiness=0.01)
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    C.stream_crps(ipuf, 500, 7, a, noisy=True)
    C.stream_crps(bare, 500, 7, b, noisy=True)
    la, lb = a.read_text().splitlines(), b.read_text().splitlines()
    assert la[0] == lb[0]
    assert [len(x) for x in la] == [len(x) for x in lb]
    assert "mask" not in a.read_text()


@pytest.mark.parametrize("body, line", [
    ("0101 1\n0121 0\n", 3),
    ("0101 1\n010 0\n", 3),
    ("0101 2\n", 2),
    ("0101-1\n", 2),
])
def test_parse_errors_name_line(tmp_path, body, line):
    path = tmp_path / "bad.txt"
    path.write_text("#crp width=4 type=arbiter seed=1 noisy=0\n" + body)
    with pytest.raises(C.CrpFormatError, match=f"line {line}:"):
        C.read_crps(path)


def test_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("#crp width=4 type=arbiter noisy=0\n0101 1\n")
    with pytest.raises(C.CrpFormatError, match="line 1"):
        C.read_crps(path)


def test_million_row_roundtrip(tmp_path):
    crps = C.generate_crps(P.sample_arbiter(5, 64), 1_000_000, seed=8)
    path = tmp_path / "big.txt"
    C.write_crps(crps, path)
    back = C.read_crps(path)
    assert np.array_equal(back.inputs, crps.inputs)
    assert np.array_equal(back.responses, crps.responses)
