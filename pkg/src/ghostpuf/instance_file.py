"""Text serialization of PUF instances (trusted-partner view, mask included)."""
from __future__ import annotations

from pathlib import Path

from .challenge import InvalidInput
from .interface import GhostMask, InterfacedPuf
from .puf import ArbiterPuf, FfPuf, XorPuf


class InstanceFormatError(InvalidInput):
    pass


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _component(p: ArbiterPuf) -> str:
    return f"v={_f(p.v)} w=" + ",".join(_f(x) for x in p.w)


def dumps_instance(puf, seed: int = -1) -> str:
    mask = None
    if isinstance(puf, InterfacedPuf):
        puf, mask = puf.inner, puf.mask
    if isinstance(puf, ArbiterPuf):
        comps, k = [puf], 1
    elif isinstance(puf, XorPuf):
        comps, k = list(puf.components), puf.k
    elif isinstance(puf, FfPuf):
        comps, k = [puf.base], puf.k
    else:
        raise InvalidInput(f"cannot serialize {type(puf).__name__}")
    header = f"#puf type={puf.type_tag} n={puf.n} k={k} noisiness={_f(puf.noisiness)} seed={int(seed)}"
    if mask is not None:
        # n+m is not recoverable from trailing ghost positions alone
        header += f" m={mask.m}"
    lines = [header]
    lines += [_component(p) for p in comps]
    if isinstance(puf, FfPuf):
        lines.append("loops=" + ";".join(f"({a},{b})" for a, b in puf.loops))
        lines.append("inner_bias=" + ",".join(_f(x) for x in puf.inner_bias))
    if mask is not None:
        lines.append("mask=" + ",".join(str(i) for i in mask.selected))
    return "\n".join(lines) + "\n"


def _fields(line: str, lineno: int) -> dict:
    out = {}
    for tok in line.split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise InstanceFormatError(f"line {lineno}: expected key=value, got {tok!r}")
        out[key] = val
    return out


def loads_instance(text: str):
    """Parse instance text; returns ``(puf, seed)``."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#puf "):
        raise InstanceFormatError("line 1: missing '#puf' header")
    try:
        head = _fields(lines[0][5:], 1)
        kind, n, k = head["type"], int(head["n"]), int(head["k"])
        noisiness, seed = float(head["noisiness"]), int(head["seed"])
        m = int(head.get("m", 0))
    except (KeyError, ValueError) as exc:
        raise InstanceFormatError(f"line 1: bad header ({exc})") from None
    ncomp = k if kind == "xor" else 1
    if kind not in ("arbiter", "xor", "ff") or len(lines) < 1 + ncomp:
        raise InstanceFormatError("line 1: unknown type or missing component lines")
    comps = []
    for idx in range(1, 1 + ncomp):
        f = _fields(lines[idx], idx + 1)
        try:
            w = [float(x) for x in f["w"].split(",")]
            comps.append(ArbiterPuf(w, float(f["v"]), noisiness))
        except (KeyError, ValueError) as exc:
            raise InstanceFormatError(f"line {idx + 1}: bad component ({exc})") from None
        if len(w) != n:
            raise InstanceFormatError(f"line {idx + 1}: expected {n} weights, got {len(w)}")
    rest = {}
    for idx in range(1 + ncomp, len(lines)):
        key, sep, val = lines[idx].partition("=")
        if not sep or key not in ("loops", "inner_bias", "mask"):
            raise InstanceFormatError(f"line {idx + 1}: unexpected content")
        rest[key] = (val, idx + 1)
    try:
        if kind == "arbiter":
            puf = comps[0]
        elif kind == "xor":
            puf = XorPuf(tuple(comps))
        else:
            loops = [tuple(int(x) for x in part.strip("()").split(","))
                     for part in rest["loops"][0].split(";") if part]
            bias = [float(x) for x in rest["inner_bias"][0].split(",") if x]
            puf = FfPuf(comps[0], tuple(loops), bias)
            if puf.k != k:
                raise InstanceFormatError(f"header k={k} but {puf.k} loops given")
        if "mask" in rest:
            sel = tuple(int(x) for x in rest["mask"][0].split(","))
            puf = InterfacedPuf(puf, GhostMask(puf.input_width + m, sel))
    except KeyError as exc:
        raise InstanceFormatError(f"missing {exc.args[0]} line") from None
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None
    return puf, seed


def write_instance(path, puf, seed: int = -1) -> None:
    Path(path).write_text(dumps_instance(puf, seed))


def read_instance(path):
    return loads_instance(Path(path).read_text())
