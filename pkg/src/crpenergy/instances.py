"""Benchmark instances: Caserta / Zhu parsers, the native weighted format,
seeded weight attachment and training-set generation.

All formats are whitespace separated; see ``docs/formats.md``.
"""

from __future__ import annotations

import io
import math
import os
import tarfile
import zipfile
from dataclasses import dataclass, field, replace
from pathlib import Path

from crpenergy import seeding
from crpenergy.errors import (
    DatasetUnavailable,
    DuplicateContainerId,
    InstanceFormatError,
    MalformedHeader,
    MissingMaxHeight,
    StackOverfilled,
    WeightsAlreadyPresent,
)

WEIGHT_RANGE = (1.0, 30.0)
NATIVE_MAGIC = "crpenergy-instance 1"
DATA_ENV = "CRPENERGY_DATA"


@dataclass(frozen=True, eq=True)
class Instance:
    id: str
    stacks: tuple
    max_height: int
    weights: dict | None = field(default=None, hash=False)
    origin: str = "generated"

    def __post_init__(self):
        object.__setattr__(self, "stacks", tuple(tuple(int(c) for c in s) for s in self.stacks))
        ids = [c for s in self.stacks for c in s]
        if len(set(ids)) != len(ids):
            raise DuplicateContainerId(f"{self.id}: duplicate container id")
        if sorted(ids) != list(range(1, len(ids) + 1)):
            raise InstanceFormatError(f"{self.id}: container ids must be exactly 1..C")
        if any(len(s) > self.max_height for s in self.stacks):
            raise StackOverfilled(f"{self.id}: a stack exceeds the maximum height {self.max_height}")
        if self.weights is not None:
            if set(self.weights) != set(ids):
                raise InstanceFormatError(f"{self.id}: weights do not cover exactly the container ids")
            object.__setattr__(self, "weights", {int(k): float(v) for k, v in sorted(self.weights.items())})

    @property
    def n_stacks(self):
        return len(self.stacks)

    @property
    def n_containers(self):
        return sum(len(s) for s in self.stacks)

    def to_bay(self, kinematics_config=None, crane_weight=0.5):
        from crpenergy.yard import Bay

        return Bay(
            self.stacks,
            self.max_height,
            self.weights,
            n_containers=self.n_containers,
            kinematics_config=kinematics_config,
            crane_weight=crane_weight,
        )


def _int_lines(text):
    rows = []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if ln:
            rows.append(ln.split())
    return rows


def _ints(tokens, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MalformedHeader(f"non-integer token in {what}: {tokens}") from None


def _read_stacks(rows, n_stacks, limit=None):
    stacks = []
    if len(rows) < n_stacks:
        raise MalformedHeader(f"expected {n_stacks} stack lines, found {len(rows)}")
    for k in range(n_stacks):
        vals = _ints(rows[k], f"stack line {k + 1}")
        if not vals or vals[0] != len(vals) - 1:
            raise MalformedHeader(f"stack line {k + 1}: count does not match the ids that follow")
        if limit is not None and vals[0] > limit:
            raise StackOverfilled(f"stack {k + 1} holds {vals[0]} containers, limit {limit}")
        stacks.append(tuple(vals[1:]))
    ids = [c for s in stacks for c in s]
    if len(set(ids)) != len(ids):
        raise DuplicateContainerId("duplicate container id")
    return stacks, rows[n_stacks:]


def _trailing_weights(rows, n_containers):
    """Weights appended after the stack lines: C values in id order or ``id weight`` pairs."""
    if not rows:
        return None
    flat = [t for r in rows for t in r]
    if all(len(r) == 2 for r in rows) and len(rows) == n_containers:
        return {int(r[0]): float(r[1]) for r in rows}
    if len(flat) == n_containers:
        return {i + 1: float(v) for i, v in enumerate(flat)}
    raise InstanceFormatError("trailing lines are neither C weights nor C 'id weight' pairs")


def parse_caserta(text, instance_id="caserta"):
    """Header ``S N`` (``N`` = total containers or per-stack fill), then one
    line per stack: its count followed by the ids bottom-to-top.

    The maximum height is the initial (uniform) fill plus two.
    """
    rows = _int_lines(text)
    if not rows:
        raise MalformedHeader("empty file")
    head = _ints(rows[0], "header")
    if len(head) != 2 or head[0] < 1:
        raise MalformedHeader(f"expected 'stacks containers' header, got {rows[0]}")
    n_stacks, second = head
    stacks, rest = _read_stacks(rows[1:], n_stacks)
    total = sum(len(s) for s in stacks)
    if second == total:
        per_stack = None
    elif second * n_stacks == total:
        per_stack = second
    else:
        raise MalformedHeader(f"header count {second} matches neither total {total} nor per-stack fill")
    if per_stack is not None and any(len(s) > per_stack for s in stacks):
        raise StackOverfilled(f"a stack holds more than the declared fill {per_stack}")
    fill = max(len(s) for s in stacks)
    weights = _trailing_weights(rest, total)
    return Instance(instance_id, tuple(stacks), fill + 2, weights, "caserta")


def _weight_lines(inst):
    if inst.weights is None:
        return []
    return [f"{cid} {w!r}" for cid, w in sorted(inst.weights.items())]


def format_caserta(inst):
    lines = [f"{inst.n_stacks} {inst.n_containers}"]
    lines += [" ".join(str(v) for v in (len(s), *s)) for s in inst.stacks]
    lines += _weight_lines(inst)
    return "\n".join(lines) + "\n"


def parse_zhu(text, instance_id="zhu"):
    """Header ``S H C`` (stacks, maximum height, containers), then stack lines as for Caserta."""
    rows = _int_lines(text)
    if not rows:
        raise MalformedHeader("empty file")
    head = _ints(rows[0], "header")
    if len(head) == 2:
        raise MissingMaxHeight(f"header {rows[0]} has no maximum height")
    if len(head) != 3 or head[0] < 1:
        raise MalformedHeader(f"expected 'stacks max_height containers' header, got {rows[0]}")
    n_stacks, max_height, total = head
    stacks, rest = _read_stacks(rows[1:], n_stacks, limit=max_height)
    if sum(len(s) for s in stacks) != total:
        raise MalformedHeader("container count in header does not match the stack lines")
    weights = _trailing_weights(rest, total)
    return Instance(instance_id, tuple(stacks), max_height, weights, "zhu")


def format_zhu(inst):
    lines = [f"{inst.n_stacks} {inst.max_height} {inst.n_containers}"]
    lines += [" ".join(str(v) for v in (len(s), *s)) for s in inst.stacks]
    lines += _weight_lines(inst)
    return "\n".join(lines) + "\n"


def format_native(inst):
    lines = [
        NATIVE_MAGIC,
        f"id {inst.id}",
        f"origin {inst.origin}",
        f"max_height {inst.max_height}",
        f"stacks {inst.n_stacks}",
    ]
    lines += [" ".join(str(v) for v in (len(s), *s)) for s in inst.stacks]
    if inst.weights is None:
        lines.append("weights -")
    else:
        lines.append(f"weights {len(inst.weights)}")
        lines += [f"{cid} {w!r}" for cid, w in sorted(inst.weights.items())]
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_native(text):
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0] != NATIVE_MAGIC:
        raise MalformedHeader("missing native instance header")
    try:
        meta = {}
        i = 1
        for key in ("id", "origin", "max_height", "stacks"):
            k, v = rows[i].split(None, 1)
            if k != key:
                raise MalformedHeader(f"expected '{key}', got '{k}'")
            meta[key] = v
            i += 1
        n_stacks = int(meta["stacks"])
        stacks, _ = _read_stacks([r.split() for r in rows[i : i + n_stacks]], n_stacks)
        i += n_stacks
        k, v = rows[i].split()
        if k != "weights":
            raise MalformedHeader("expected 'weights' section")
        i += 1
        weights = None
        if v != "-":
            weights = {}
            for r in rows[i : i + int(v)]:
                cid, w = r.split()
                weights[int(cid)] = float(w)
            i += int(v)
        if rows[i] != "end":
            raise MalformedHeader("missing 'end' line")
    except (IndexError, ValueError) as exc:
        raise MalformedHeader(f"truncated or malformed native instance: {exc}") from None
    return Instance(meta["id"], tuple(stacks), int(meta["max_height"]), weights, meta["origin"])


def parse_any(text, instance_id):
    """Sniff the format: native header, 3-int header (Zhu) or 2-int header (Caserta)."""
    stripped = text.lstrip()
    if stripped.startswith(NATIVE_MAGIC):
        return parse_native(text)
    rows = _int_lines(text)
    if rows and len(rows[0]) == 3:
        return parse_zhu(text, instance_id)
    return parse_caserta(text, instance_id)


# -- weights and generation ---------------------------------------------------


def attach_weights(inst, seed):
    """Draw an independent U[1, 30] weight per container, keyed on (instance id, seed)."""
    if inst.weights is not None:
        raise WeightsAlreadyPresent(inst.id)
    rng = seeding.stream(seed, "weights", inst.id)
    n = inst.n_containers
    values = rng.uniform(*WEIGHT_RANGE, size=n)
    return replace(inst, weights={cid: float(values[cid - 1]) for cid in range(1, n + 1)})


def _caserta_like(rng, idx, prefix):
    while True:
        n_stacks = int(rng.integers(3, 11))
        fill = int(rng.integers(3, 11))
        # 2S >= fill + 1 keeps the restricted scheme deadlock-free with H = fill + 2.
        if 2 * n_stacks >= fill + 1:
            break
    perm = rng.permutation(n_stacks * fill) + 1
    stacks = tuple(tuple(int(c) for c in perm[k * fill : (k + 1) * fill]) for k in range(n_stacks))
    return Instance(f"{prefix}-{idx:04d}", stacks, fill + 2, None, "generated")


def _zhu_like(rng, idx, prefix):
    n_stacks = int(rng.integers(6, 11))
    n = int(rng.integers(15, 70))
    # S*H - C >= H - 1 guarantees a free slot outside the origin for every blocker.
    lo = max(3, math.ceil((n - 1) / (n_stacks - 1)))
    max_height = int(rng.integers(lo, lo + 3))
    heights = [0] * n_stacks
    for _ in range(n):
        open_ = [k for k in range(n_stacks) if heights[k] < max_height]
        heights[open_[int(rng.integers(len(open_)))]] += 1
    perm = (rng.permutation(n) + 1).tolist()
    stacks, at = [], 0
    for h in heights:
        stacks.append(tuple(perm[at : at + h]))
        at += h
    return Instance(f"{prefix}-{idx:04d}", tuple(stacks), max_height, None, "generated")


def generate_training_set(kind, count, seed, weighted=True):
    """Seeded random instances shaped like the Caserta or Zhu benchmarks."""
    if count < 1:
        raise ValueError("count must be >= 1")
    makers = {"caserta-like": _caserta_like, "zhu-like": _zhu_like}
    if kind not in makers:
        raise ValueError(f"kind must be one of {sorted(makers)}")
    rng = seeding.stream(seed, "instances", kind)
    prefix = f"{kind.split('-')[0]}-s{seed}"
    out = []
    for i in range(count):
        inst = makers[kind](rng, i, prefix)
        out.append(attach_weights(inst, seed) if weighted else inst)
    return out


# -- loading ------------------------------------------------------------------


def _archive_members(path):
    if zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as zf:
            for name in sorted(zf.namelist()):
                if not name.endswith("/"):
                    yield name, zf.read(name).decode()
    elif tarfile.is_tarfile(path):
        with tarfile.open(path) as tf:
            for m in sorted(tf.getmembers(), key=lambda m: m.name):
                if m.isfile():
                    yield m.name, tf.extractfile(m).read().decode()
    else:
        raise DatasetUnavailable(f"{path}: unsupported archive (extract 7z archives first)")


def _dir_members(path):
    for p in sorted(path.rglob("*")):
        if p.is_file() and not p.name.startswith(".") and p.suffix not in (".weights", ".md"):
            yield str(p.relative_to(path)), p.read_text()


def load_adapted_dataset(path=None, require_weights=True):
    """Load every instance under a directory or zip/tar archive, in sorted order.

    ``path`` defaults to ``$CRPENERGY_DATA``.  A sidecar ``<file>.weights``
    (lines ``id weight``) supplies weights for files that carry none.
    """
    if path is None:
        path = os.environ.get(DATA_ENV)
        if not path:
            raise DatasetUnavailable(f"no dataset path given and ${DATA_ENV} is unset")
    path = Path(path)
    if not path.exists():
        raise DatasetUnavailable(f"{path} does not exist")
    members = _dir_members(path) if path.is_dir() else _archive_members(path)
    out = []
    for name, text in members:
        stem = name.rsplit(".", 1)[0] if "." in Path(name).name else name
        inst = parse_any(text, stem.replace(os.sep, "/"))
        if inst.weights is None and path.is_dir():
            side = path / (name + ".weights")
            if side.exists():
                w = {int(a): float(b) for a, b in (ln.split() for ln in side.read_text().split("\n") if ln.strip())}
                inst = replace(inst, weights=w)
        if require_weights and inst.weights is None:
            raise DatasetUnavailable(f"{name}: instance carries no container weights")
        out.append(inst)
    if not out:
        raise DatasetUnavailable(f"{path}: no instances found")
    return out


def write_instances(instances, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for inst in instances:
        (directory / f"{inst.id}.txt").write_text(format_native(inst))


def dumps_set(instances):
    buf = io.StringIO()
    for inst in instances:
        buf.write(format_native(inst))
    return buf.getvalue()
