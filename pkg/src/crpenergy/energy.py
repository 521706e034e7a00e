"""Crane energy model.

Energy of one move is ``W_m * (h * hoisted + l * lowered + x * crossed)``
with ``W_m`` the crane weight plus the carried container weight (zero when
the crane travels empty).  The episode total is the plain sum over the
recorded move trace.

How many tiers a move hoists and lowers depends on a lift convention:

``direct``
    hoist or lower straight to the landing tier, ignoring the stacks in
    between (default; at most one of hoisted/lowered is non-zero).
``clear``
    rise just high enough to pass over every stack strictly between origin
    and destination, then lower onto the landing tier.
``top``
    always travel at the safe tier ``H + 1``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

LIFT_MODES = ("direct", "clear", "top")


@dataclass(frozen=True)
class EnergyParams:
    """Energy consumed per ton per tier hoisted/lowered and per stack crossed."""

    h: float = 0.9
    l: float = 0.02  # noqa: E741
    x: float = 0.08
    crane_weight: float = 0.5

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    def scaled(self, factor):
        return replace(self, h=self.h * factor, l=self.l * factor, x=self.x * factor)


@dataclass(frozen=True)
class KinematicsConfig:
    """Crane travel conventions the energy total depends on.

    Attributes:
        count_empty_moves: emit and charge empty repositioning moves between
            consecutive pick-ups.
        count_initial_approach: also charge the first empty move from
            ``initial_crane_position`` to the first pick-up.
        truck_tier: tier at which retrieved containers are released onto the
            truck in lane 0.
        initial_crane_position: ``(stack, tier)``; ``None`` means
            ``(0, truck_tier)``.
        lift_mode: one of ``LIFT_MODES``.
    """

    count_empty_moves: bool = True
    count_initial_approach: bool = True
    truck_tier: int = 1
    initial_crane_position: tuple[int, int] | None = None
    lift_mode: str = "direct"

    def __post_init__(self):
        if self.truck_tier < 0:
            raise ValueError("truck_tier must be >= 0")
        if self.lift_mode not in LIFT_MODES:
            raise ValueError(f"lift_mode must be one of {LIFT_MODES}")

    @property
    def start(self):
        if self.initial_crane_position is None:
            return (0, self.truck_tier)
        return tuple(self.initial_crane_position)


@dataclass(frozen=True)
class EnergyConfig:
    """The pair persisted in the configuration file."""

    params: EnergyParams = field(default_factory=EnergyParams)
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)


def kinematics(frm, to, *, mode="direct", heights=None, max_height=None):
    """Return ``(hoisted, lowered, crossed)`` for a hook travel ``frm -> to``.

    ``frm`` and ``to`` are ``(stack, tier)`` pairs.  ``heights`` (indexable by
    stack) is needed by the ``clear`` mode and ``max_height`` by ``top``.
    """
    (s0, t0), (s1, t1) = frm, to
    travel = max(t0, t1)
    if mode == "clear":
        lo, hi = (s0, s1) if s0 <= s1 else (s1, s0)
        for j in range(lo + 1, hi):
            travel = max(travel, heights[j] + 1)
    elif mode == "top":
        travel = max(travel, max_height + 1)
    elif mode != "direct":
        raise ValueError(f"unknown lift mode {mode!r}")
    return travel - t0, travel - t1, abs(s1 - s0)


def move_energy(m, p=EnergyParams()):
    return m.moving_weight * (p.h * m.hoisted + p.l * m.lowered + p.x * m.crossed)


def episode_energy(moves, p=EnergyParams()):
    total = 0.0
    for m in moves:
        total += move_energy(m, p)
    return total


# -- configuration file -------------------------------------------------------

DEFAULT_CONFIG_NAME = "default.cfg"


def _parse_bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config(path=None):
    """Read an :class:`EnergyConfig` from a key-value file.

    Without ``path`` the packaged default configuration is used.  Missing keys
    fall back to the dataclass defaults.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if path is None:
        cp.read_string(resources.files("crpenergy.data").joinpath(DEFAULT_CONFIG_NAME).read_text())
    else:
        text = Path(path).read_text()
        cp.read_string(text)
    e = cp["energy"] if cp.has_section("energy") else {}
    k = cp["kinematics"] if cp.has_section("kinematics") else {}
    params = EnergyParams(
        h=float(e.get("hoist", 0.9)),
        l=float(e.get("lower", 0.02)),
        x=float(e.get("trolley", 0.08)),
        crane_weight=float(e.get("crane_weight", 0.5)),
    )
    start = None
    if "initial_stack" in k or "initial_tier" in k:
        truck = int(k.get("truck_tier", 1))
        start = (int(k.get("initial_stack", 0)), int(k.get("initial_tier", truck)))
    kin = KinematicsConfig(
        count_empty_moves=_parse_bool(k.get("count_empty_moves", "true")),
        count_initial_approach=_parse_bool(k.get("count_initial_approach", "true")),
        truck_tier=int(k.get("truck_tier", 1)),
        initial_crane_position=start,
        lift_mode=k.get("lift_mode", "direct").strip(),
    )
    return EnergyConfig(params, kin)


def dump_config(cfg, comment=None):
    lines = []
    if comment:
        lines += [f"# {ln}" for ln in comment.splitlines()]
    p, k = cfg.params, cfg.kinematics
    lines += [
        "[energy]",
        f"hoist = {p.h!r}",
        f"lower = {p.l!r}",
        f"trolley = {p.x!r}",
        f"crane_weight = {p.crane_weight!r}",
        "",
        "[kinematics]",
        f"count_empty_moves = {str(k.count_empty_moves).lower()}",
        f"count_initial_approach = {str(k.count_initial_approach).lower()}",
        f"truck_tier = {k.truck_tier}",
        f"lift_mode = {k.lift_mode}",
    ]
    if k.initial_crane_position is not None:
        lines += [
            f"initial_stack = {k.initial_crane_position[0]}",
            f"initial_tier = {k.initial_crane_position[1]}",
        ]
    return "\n".join(lines) + "\n"


def config_as_dict(cfg):
    return {"energy": asdict(cfg.params), "kinematics": asdict(cfg.kinematics)}


# -- calibration --------------------------------------------------------------


def candidate_space(lift_modes=("direct",), truck_tiers=(0, 1)):
    """Cartesian grid of kinematics conventions to calibrate over."""
    out = []
    for mode in lift_modes:
        for empty in (True, False):
            for initial in (True, False) if empty else (False,):
                for tt in truck_tiers:
                    out.append(
                        KinematicsConfig(
                            count_empty_moves=empty,
                            count_initial_approach=initial,
                            truck_tier=tt,
                            lift_mode=mode,
                        )
                    )
    return out


def calibrate(candidates, total_for, target):
    """Pick the kinematics convention whose total is closest to ``target``.

    ``total_for`` maps a :class:`KinematicsConfig` to the episode-energy sum
    of the reference rule over the calibration dataset.  Returns
    ``(best_config, {config: total})``; ties go to the earlier candidate.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("empty candidate space")
    totals = {}
    best, best_gap = None, math.inf
    for cand in candidates:
        t = float(total_for(cand))
        totals[cand] = t
        gap = abs(t - target)
        if gap < best_gap:
            best, best_gap = cand, gap
    return best, totals
