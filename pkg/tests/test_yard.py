import pytest

from crpenergy.errors import EmptyOriginStack, RelocationToFullStack, SameStack, TargetBlocked
from crpenergy.yard import Bay, MoveKind, apply_relocate, apply_retrieve, legal_destinations, target_container

from conftest import random_small_bay


def bay_with_heights(heights, H):
    stacks, nxt = [], 1
    for h in heights:
        stacks.append(list(range(nxt, nxt + h)))
        nxt += h
    return Bay(stacks, H)


def test_target_container():
    assert target_container(Bay([[7, 3], [2]], 3)) == 2
    assert target_container(Bay([[], []], 3)) is None
    assert target_container(Bay([[5, 9, 4], [2, 3, 7], [1], [8, 6]], 5)) == 1


@pytest.mark.parametrize(
    "heights,H,origin,expected",
    [
        ([2, 1, 0], 2, 1, [2, 3]),
        ([1, 2, 2], 2, 1, []),
        ([3, 4, 2, 0], 4, 3, [1, 4]),
    ],
)
def test_legal_destinations(heights, H, origin, expected):
    assert legal_destinations(bay_with_heights(heights, H), origin) == expected


def test_relocate_moves_top():
    bay = Bay([[1, 2], [3]], 3)
    m = apply_relocate(bay, 1, 2)
    assert bay.heights[1:] == [1, 2]
    assert bay.top(2) == 2 and m.container_id == 2
    assert m.kind is MoveKind.RELOCATE
    assert bay.crane_at == (2, 2)


def test_relocate_errors_leave_bay_unchanged():
    bay = Bay([[1, 2, 3], [4, 5, 6]], 3)
    before = bay.layout()
    with pytest.raises(RelocationToFullStack):
        apply_relocate(bay, 1, 2)
    with pytest.raises(SameStack):
        apply_relocate(bay, 1, 1)
    assert bay.layout() == before
    empty = Bay([[], [1]], 3)
    with pytest.raises(EmptyOriginStack):
        apply_relocate(empty, 1, 2)


def test_relocate_kinematics():
    # pick-up at tier 2 of stack 1, landing at tier 3 of stack 4
    bay = Bay([[1, 2], [], [], [3, 4]], 4)
    m = apply_relocate(bay, 1, 4)
    assert (m.frm, m.to) == ((1, 2), (4, 3))
    assert (m.hoisted, m.lowered, m.crossed) == (1, 0, 3)


def test_retrieve_kinematics():
    bay = Bay([[2], [1]], 3)
    m = apply_retrieve(bay)
    assert (m.hoisted, m.lowered, m.crossed) == (0, 0, 2)
    assert m.to == (0, 1) and bay.crane_at == (0, 1)
    bay = Bay([[3, 4, 1]], 3)
    m = apply_retrieve(bay)
    assert (m.hoisted, m.lowered, m.crossed) == (0, 2, 1)


def test_retrieve_blocked():
    with pytest.raises(TargetBlocked):
        apply_retrieve(Bay([[1, 2]], 3))


def test_moving_weight():
    bay = Bay([[1, 2], []], 3, {1: 4.0, 2: 7.5}, crane_weight=0.5)
    m = apply_relocate(bay, 1, 2)
    assert m.moving_weight == 8.0


def test_relocate_inverse_restores_heights_and_tops(rng):
    for _ in range(200):
        bay = random_small_bay(rng)
        origins = [s for s in range(1, bay.n_stacks + 1) if bay.height(s)]
        o = origins[int(rng.integers(len(origins)))]
        dests = legal_destinations(bay, o)
        if not dests:
            continue
        d = dests[int(rng.integers(len(dests)))]
        heights, tops = bay.heights, [bay.top(s) for s in range(bay.n_stacks + 1)]
        ids = sorted(bay.ids())
        apply_relocate(bay, o, d)
        assert sorted(bay.ids()) == ids
        apply_relocate(bay, d, o)
        assert bay.heights == heights
        assert [bay.top(s) for s in range(bay.n_stacks + 1)] == tops


def test_retrieve_removes_minimum(rng):
    for _ in range(100):
        bay = random_small_bay(rng)
        low = target_container(bay)
        s = bay.stack_of(low)
        while bay.top(s) != low:
            d = legal_destinations(bay, s)[0]
            apply_relocate(bay, s, d)
        before = bay.ids()
        apply_retrieve(bay)
        assert bay.ids() == before - {low}
