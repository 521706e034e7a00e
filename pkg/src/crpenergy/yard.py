"""Single-bay yard state and the crane moves that change it.

Stack index 0 is the truck lane; physical stacks are ``1..S``.  Tiers are
1-based, so a stack's height equals the tier of its top container.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from crpenergy.energy import KinematicsConfig, kinematics
from crpenergy.errors import EmptyOriginStack, RelocationToFullStack, SameStack, TargetBlocked


class MoveKind(enum.Enum):
    RELOCATE = "relocate"
    RETRIEVE = "retrieve"
    EMPTY = "empty"


@dataclass(frozen=True)
class Container:
    id: int
    weight: float


@dataclass(frozen=True)
class Move:
    kind: MoveKind
    container_id: int | None
    frm: tuple[int, int]
    to: tuple[int, int]
    hoisted: int
    lowered: int
    crossed: int
    moving_weight: float


class Bay:
    """Mutable bay: ``S`` stacks of at most ``max_height`` containers.

    ``stacks`` lists the physical stacks bottom-to-top; they are stored with
    an empty truck lane prepended so that ``bay.stacks[s]`` is stack ``s``.
    Missing weights default to 1 t; ``crane_weight`` is the empty-crane
    weight added to every move.  ``n_containers`` is the initial count
    ``C``; it stays fixed while containers are retrieved because the Table-2
    style features normalise by it.
    """

    def __init__(
        self,
        stacks,
        max_height,
        weights=None,
        *,
        n_containers=None,
        kinematics_config=None,
        crane_at=None,
        crane_weight=0.5,
    ):
        self.stacks = [[]] + [list(s) for s in stacks]
        self.max_height = int(max_height)
        ids = [c for s in self.stacks for c in s]
        if len(set(ids)) != len(ids):
            raise ValueError("container ids must be distinct")
        if any(len(s) > self.max_height for s in self.stacks):
            raise ValueError("stack exceeds max_height")
        if len(self.stacks) < 2:
            raise ValueError("a bay needs at least one stack")
        self.weights = {c: 1.0 for c in ids} if weights is None else {c: float(weights[c]) for c in ids}
        self.n_containers = n_containers if n_containers is not None else max(ids, default=0)
        self.kinematics = kinematics_config or KinematicsConfig()
        self.crane_weight = float(crane_weight)
        self.crane_at = tuple(crane_at) if crane_at is not None else self.kinematics.start
        self._where = {c: s for s, stack in enumerate(self.stacks) for c in stack}

    @property
    def n_stacks(self):
        return len(self.stacks) - 1

    @property
    def heights(self):
        return [len(s) for s in self.stacks]

    @property
    def weight_max(self):
        return max(self.weights.values(), default=0.0)

    def height(self, s):
        return len(self.stacks[s])

    def top(self, s):
        st = self.stacks[s]
        return st[-1] if st else None

    def stack_of(self, cid):
        return self._where[cid]

    def tier_of(self, cid):
        return self.stacks[self._where[cid]].index(cid) + 1

    def min_id(self, s):
        """Lowest id in stack ``s``, or ``C + 1`` for an empty stack."""
        st = self.stacks[s]
        return min(st) if st else self.n_containers + 1

    def container(self, cid):
        return Container(cid, self.weights[cid])

    def ids(self):
        return set(self._where)

    def is_empty(self):
        return not self._where

    def copy(self):
        b = Bay.__new__(Bay)
        b.stacks = [list(s) for s in self.stacks]
        b.max_height = self.max_height
        b.weights = self.weights
        b.n_containers = self.n_containers
        b.kinematics = self.kinematics
        b.crane_weight = self.crane_weight
        b.crane_at = self.crane_at
        b._where = dict(self._where)
        return b

    def layout(self):
        """Physical stacks as a tuple of tuples (bottom-to-top)."""
        return tuple(tuple(s) for s in self.stacks[1:])

    def travel(self, frm, to):
        k = self.kinematics
        return kinematics(frm, to, mode=k.lift_mode, heights=self.heights, max_height=self.max_height)

    def __repr__(self):
        return f"Bay({[list(s) for s in self.stacks[1:]]}, max_height={self.max_height})"


def target_container(bay):
    ids = bay.ids()
    return min(ids) if ids else None


def legal_destinations(bay, origin):
    return [d for d in range(1, bay.n_stacks + 1) if d != origin and bay.height(d) < bay.max_height]


def apply_reposition(bay, to):
    """Move the empty hook to ``to``; returns ``None`` if it is already there."""
    to = tuple(to)
    if bay.crane_at == to:
        return None
    up, down, across = bay.travel(bay.crane_at, to)
    m = Move(MoveKind.EMPTY, None, bay.crane_at, to, up, down, across, bay.crane_weight)
    bay.crane_at = to
    return m


def apply_relocate(bay, origin, dest):
    if origin == dest:
        raise SameStack(f"origin and destination are both {origin}")
    if not bay.stacks[origin]:
        raise EmptyOriginStack(f"stack {origin} is empty")
    if bay.height(dest) >= bay.max_height:
        raise RelocationToFullStack(f"stack {dest} is full")
    frm = (origin, bay.height(origin))
    to = (dest, bay.height(dest) + 1)
    cid = bay.stacks[origin].pop()
    up, down, across = bay.travel(frm, to)
    bay.stacks[dest].append(cid)
    bay._where[cid] = dest
    bay.crane_at = to
    return Move(MoveKind.RELOCATE, cid, frm, to, up, down, across, bay.crane_weight + bay.weights[cid])


def apply_retrieve(bay):
    cid = target_container(bay)
    if cid is None:
        raise TargetBlocked("bay is empty")
    s = bay.stack_of(cid)
    if bay.top(s) != cid:
        raise TargetBlocked(f"container {cid} is not on top of stack {s}")
    frm = (s, bay.height(s))
    to = (0, bay.kinematics.truck_tier)
    bay.stacks[s].pop()
    del bay._where[cid]
    up, down, across = bay.travel(frm, to)
    bay.crane_at = to
    return Move(MoveKind.RETRIEVE, cid, frm, to, up, down, across, bay.crane_weight + bay.weights[cid])
