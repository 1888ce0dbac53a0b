"""Layout geometry tables.

Maps each (problem type, layout attributes) pair to concrete geometry:
number-slot positions in the unit panel, center-slot availability, the
canonical reading order, and the perceptually valid slot groupings used
by the analytic interpretation.

Slot positions use normalized [0,1]^2 coordinates with y growing
downward (the SVG convention). Groupings are derived from per-layout
adjacency and symmetry relations and deduplicated up to the layout's
symmetry group, so each returned grouping is a canonical representative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional

from .errors import IncompatibleLayout

SHAPES = ("triangle", "square", "circle", "hexagon", "rectangle")
RELATIONS = ("overlap", "include", "tangent_triple")
ARRANGEMENTS = ("line", "cross", "triangle", "square", "circle")
RING_SIZES = (6, 8)
PART_COUNT_RANGE = (2, 8)

SHOWN_VARYING = "shown_varying"
HIDDEN_FIXED = "hidden_fixed"

MIN_SLOT_SEPARATION = 0.08


@dataclass(frozen=True)
class Slot:
    id: int
    x: float
    y: float
    is_center: bool
    region_tag: str


@dataclass(frozen=True)
class Grouping:
    """A partition of the non-center slot ids into equal-size parts."""

    parts: tuple  # tuple of tuples of slot ids, each sorted, parts sorted

    def __len__(self) -> int:
        return len(self.parts)


# ---------------------------------------------------------------------------
# unit outlines (centered at the origin, max extent 1, y down)

_SQRT3_2 = math.sqrt(3.0) / 2.0

UNIT_OUTLINES = {
    "triangle": ((0.0, -1.0), (_SQRT3_2, 0.5), (-_SQRT3_2, 0.5)),
    "square": ((0.7071, -0.7071), (0.7071, 0.7071), (-0.7071, 0.7071), (-0.7071, -0.7071)),
    "rectangle": ((0.84, -0.54), (0.84, 0.54), (-0.84, 0.54), (-0.84, -0.54)),
    "hexagon": (
        (0.0, -1.0),
        (_SQRT3_2, -0.5),
        (_SQRT3_2, 0.5),
        (0.0, 1.0),
        (-_SQRT3_2, 0.5),
        (-_SQRT3_2, -0.5),
    ),
    # circle handled analytically
}


def direction(theta_deg: float) -> tuple:
    """Unit vector for an angle measured clockwise from 12 o'clock, y down."""
    t = math.radians(theta_deg)
    return (math.sin(t), -math.cos(t))


def shape_support(shape: str, theta_deg: float) -> float:
    """Distance from the shape center to its outline along `theta_deg`."""
    if shape == "circle":
        return 1.0
    ux, uy = direction(theta_deg)
    verts = UNIT_OUTLINES[shape]
    best = 0.0
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        # solve t*u = a + s*(b-a) for t >= 0, 0 <= s <= 1
        dx, dy = bx - ax, by - ay
        den = ux * dy - uy * dx
        if abs(den) < 1e-12:
            continue
        t = (ax * dy - ay * dx) / den
        s = (ax * uy - ay * ux) / -den
        if t > best and -1e-9 <= s <= 1 + 1e-9:
            best = t
    return best


# ---------------------------------------------------------------------------
# layout construction

PARTITION_OUTLINE_SCALE = 0.42
PARTITION_CAP_RADIAL = 0.72  # fraction of support, cap slots (part_count 2..4)
PARTITION_WEDGE_RADIAL = 0.60  # fraction of support, wedge slots (part_count 5..8)
PARTITION_CUT_RADIAL = 0.52  # fraction of support where cap cut lines sit

CENTER = (0.5, 0.5)


def _slot(i, x, y, tag, center=False) -> Slot:
    return Slot(id=i, x=round(x, 4), y=round(y, 4), is_center=center, region_tag=tag)


def partition_cap_angles(part_count: int) -> tuple:
    if part_count == 2:
        return (90.0, 270.0)
    if part_count == 3:
        return (0.0, 120.0, 240.0)
    return (45.0, 135.0, 225.0, 315.0)


def partition_wedge_angles(part_count: int) -> tuple:
    return tuple(360.0 * i / part_count for i in range(part_count))


def _radial_slot(i, shape, theta, radial_frac, tag) -> Slot:
    r = radial_frac * shape_support(shape, theta) * PARTITION_OUTLINE_SCALE
    ux, uy = direction(theta)
    return _slot(i, CENTER[0] + r * ux, CENTER[1] + r * uy, tag)


def _ring_perm(n: int, step: int) -> tuple:
    return tuple((i + step) % n for i in range(n))


def _mirror_perm(n: int) -> tuple:
    """Reflection fixing slot 0 on an n-ring."""
    return tuple((n - i) % n for i in range(n))


@dataclass(frozen=True)
class LayoutTable:
    slots: tuple  # tuple of Slot
    adjacency: frozenset  # frozenset of frozenset pairs over non-center ids
    symmetry_generators: tuple  # permutations of the non-center ids


def _combination_table(layout) -> LayoutTable:
    rel = layout.relation
    if rel == "overlap":
        slots = (
            _slot(0, 0.28, 0.50, "region-left"),
            _slot(1, 0.72, 0.50, "region-right"),
        )
        return LayoutTable(slots, frozenset({frozenset({0, 1})}), ((1, 0),))
    if rel == "include":
        # outer slot sits in the ring region, above the inner shape
        r = 0.62 * shape_support(layout.shape, 0.0) * 0.42
        slots = (
            _slot(0, 0.50, 0.60, "inner"),
            _slot(1, 0.50, 0.50 - r, "outer"),
        )
        return LayoutTable(slots, frozenset({frozenset({0, 1})}), ())
    if rel == "tangent_triple":
        slots = (
            _slot(0, 0.500, 0.30, "disc-0"),
            _slot(1, 0.674, 0.60, "disc-1"),
            _slot(2, 0.326, 0.60, "disc-2"),
        )
        adj = frozenset(frozenset(p) for p in ((0, 1), (1, 2), (2, 0)))
        return LayoutTable(slots, adj, (_ring_perm(3, 1), _mirror_perm(3)))
    raise IncompatibleLayout(f"unknown combination relation: {rel!r}")


def _ring_positions(n: int, radius: float, start_deg: float = 0.0) -> list:
    out = []
    for i in range(n):
        ux, uy = direction(start_deg + 360.0 * i / n)
        out.append((CENTER[0] + radius * ux, CENTER[1] + radius * uy))
    return out


def _composition_table(layout) -> LayoutTable:
    arr = layout.arrangement
    if arr == "line":
        slots = tuple(
            _slot(i, 0.20 + 0.20 * i, 0.50, f"pos-{i}") for i in range(4)
        )
        adj = frozenset(frozenset((i, i + 1)) for i in range(3))
        return LayoutTable(slots, adj, ((3, 2, 1, 0),))
    if arr == "cross":
        slots = (
            _slot(0, 0.50, 0.22, "arm-top"),
            _slot(1, 0.78, 0.50, "arm-right"),
            _slot(2, 0.50, 0.78, "arm-bottom"),
            _slot(3, 0.22, 0.50, "arm-left"),
            _slot(4, 0.50, 0.50, "center", center=True),
        )
        adj = frozenset(frozenset(p) for p in ((0, 1), (1, 2), (2, 3), (3, 0)))
        return LayoutTable(slots, adj, (_ring_perm(4, 1), (0, 3, 2, 1)))
    if arr == "triangle":
        pts = (
            (0.500, 0.16),
            (0.665, 0.455),
            (0.830, 0.75),
            (0.500, 0.75),
            (0.170, 0.75),
            (0.335, 0.455),
        )
        tags = ("corner-0", "edge-0", "corner-1", "edge-1", "corner-2", "edge-2")
        slots = tuple(_slot(i, x, y, tags[i]) for i, (x, y) in enumerate(pts))
        adj = frozenset(frozenset((i, (i + 1) % 6)) for i in range(6))
        return LayoutTable(slots, adj, (_ring_perm(6, 2), _mirror_perm(6)))
    if arr == "square":
        xs = (0.50, 0.82, 0.82, 0.82, 0.50, 0.18, 0.18, 0.18)
        ys = (0.18, 0.18, 0.50, 0.82, 0.82, 0.82, 0.50, 0.18)
        tags = ("edge-0", "corner-0", "edge-1", "corner-1", "edge-2", "corner-2", "edge-3", "corner-3")
        slots = tuple(_slot(i, xs[i], ys[i], tags[i]) for i in range(8))
        adj = frozenset(frozenset((i, (i + 1) % 8)) for i in range(8))
        return LayoutTable(slots, adj, (_ring_perm(8, 2), _mirror_perm(8)))
    if arr == "circle":
        n = layout.ring_size
        if n not in RING_SIZES:
            raise IncompatibleLayout(f"circle arrangement needs ring_size in {RING_SIZES}")
        pts = _ring_positions(n, 0.32)
        slots = tuple(_slot(i, x, y, f"ring-{i}") for i, (x, y) in enumerate(pts))
        adj = frozenset(frozenset((i, (i + 1) % n)) for i in range(n))
        return LayoutTable(slots, adj, (_ring_perm(n, 1), _mirror_perm(n)))
    raise IncompatibleLayout(f"unknown composition arrangement: {arr!r}")


def _partition_table(layout) -> LayoutTable:
    k = layout.part_count
    if not PART_COUNT_RANGE[0] <= k <= PART_COUNT_RANGE[1]:
        raise IncompatibleLayout(f"part_count {k} outside {PART_COUNT_RANGE}")
    shape = layout.shape
    if k <= 4:
        angles = partition_cap_angles(k)
        slots = [
            _radial_slot(i, shape, angles[i], PARTITION_CAP_RADIAL, f"part-{i}")
            for i in range(k)
        ]
        slots.append(_slot(k, *CENTER, "center", center=True))
        if k == 2:
            adj = frozenset()
            gens = ((1, 0),)
        else:
            adj = frozenset(frozenset((i, (i + 1) % k)) for i in range(k))
            gens = (_ring_perm(k, 1), _mirror_perm(k))
        return LayoutTable(tuple(slots), adj, gens)
    angles = partition_wedge_angles(k)
    slots = tuple(
        _radial_slot(i, shape, angles[i], PARTITION_WEDGE_RADIAL, f"part-{i}")
        for i in range(k)
    )
    adj = frozenset(frozenset((i, (i + 1) % k)) for i in range(k))
    return LayoutTable(slots, adj, (_ring_perm(k, 1), _mirror_perm(k)))


@lru_cache(maxsize=None)
def _table_for(ptype: str, layout) -> LayoutTable:
    if layout.shape not in SHAPES:
        raise IncompatibleLayout(f"unknown shape: {layout.shape!r}")
    if ptype == "combination":
        if layout.relation is None:
            raise IncompatibleLayout("combination layout needs a relation")
        return _combination_table(layout)
    if ptype == "composition":
        if layout.arrangement is None:
            raise IncompatibleLayout("composition layout needs an arrangement")
        return _composition_table(layout)
    if ptype == "partition":
        if layout.part_count is None:
            raise IncompatibleLayout("partition layout needs a part_count")
        return _partition_table(layout)
    raise IncompatibleLayout(f"unknown problem type: {ptype!r}")


# ---------------------------------------------------------------------------
# public operations


def slots_for(ptype: str, layout) -> list:
    """All number slots of the layout, center slot (if any) included."""
    return list(_table_for(ptype, layout).slots)


def slot_angle(slot: Slot) -> float:
    """Angle of the slot about the panel center, clockwise from 12 o'clock."""
    dx = slot.x - CENTER[0]
    dy = slot.y - CENTER[1]
    if abs(dx) < 1e-12 and abs(dy) < 1e-12:
        return 0.0
    ang = math.degrees(math.atan2(dx, -dy))
    return ang + 360.0 if ang < 0 else ang


def slot_radius(slot: Slot) -> float:
    return math.hypot(slot.x - CENTER[0], slot.y - CENTER[1])


def canonical_order(slots) -> list:
    """Slot ids in reading order: by (angle, radius, id), center last."""
    if not slots:
        raise ValueError("canonical_order() needs at least one slot")
    others = [s for s in slots if not s.is_center]
    center = [s for s in slots if s.is_center]
    others.sort(key=lambda s: (round(slot_angle(s), 6), round(slot_radius(s), 6), s.id))
    return [s.id for s in others] + [s.id for s in center]


def center_mode_for(ptype: str, layout) -> str:
    """shown_varying when the layout exposes a center slot, else hidden_fixed."""
    table = _table_for(ptype, layout)
    return SHOWN_VARYING if any(s.is_center for s in table.slots) else HIDDEN_FIXED


def _close_group(generators, n: int) -> tuple:
    """All non-identity permutations generated by `generators` (BFS closure)."""
    identity = tuple(range(n))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in generators:
                q = tuple(g[p[i]] for i in range(n))
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return tuple(sorted(seen - {identity}))


def _connected(part, adjacency) -> bool:
    part = set(part)
    start = next(iter(part))
    seen = {start}
    stack = [start]
    while stack:
        a = stack.pop()
        for b in part - seen:
            if frozenset((a, b)) in adjacency:
                seen.add(b)
                stack.append(b)
    return seen == part


def _single_orbit(part, perm) -> bool:
    """True when `part` is one orbit of the cyclic group generated by `perm`."""
    part = frozenset(part)
    start = next(iter(part))
    orbit = {start}
    cur = perm[start]
    while cur != start:
        orbit.add(cur)
        cur = perm[cur]
    return orbit == part


def _part_valid(part, adjacency, group_perms) -> bool:
    if len(part) == 1:
        return True
    if _connected(part, adjacency):
        return True
    return any(_single_orbit(part, p) for p in group_perms)


def _equal_partitions(ids, parts: int):
    """All partitions of `ids` into `parts` equal-size unordered blocks."""
    ids = sorted(ids)
    size = len(ids) // parts

    def rec(remaining):
        if not remaining:
            yield ()
            return
        head = remaining[0]
        rest = remaining[1:]
        for combo in combinations(rest, size - 1):
            block = (head,) + combo
            left = [x for x in rest if x not in combo]
            for tail in rec(left):
                yield (block,) + tail

    yield from rec(ids)


def _canonical_form(partition, group_perms) -> tuple:
    """Lexicographically smallest image of the partition under the group."""
    def normalize(p):
        return tuple(sorted(tuple(sorted(block)) for block in p))

    best = normalize(partition)
    for perm in group_perms:
        image = normalize(tuple(tuple(perm[i] for i in block) for block in partition))
        if image < best:
            best = image
    return best


@lru_cache(maxsize=None)
def _groupings_cached(ptype: str, layout, parts: int) -> tuple:
    table = _table_for(ptype, layout)
    ids = [s.id for s in table.slots if not s.is_center]
    if parts < 2 or parts > 4 or len(ids) % parts != 0 or len(ids) < parts:
        return ()
    n = len(ids)
    group_perms = _close_group(table.symmetry_generators, n) if table.symmetry_generators else ()
    seen = set()
    out = []
    for partition in _equal_partitions(ids, parts):
        if not all(_part_valid(b, table.adjacency, group_perms) for b in partition):
            continue
        canon = _canonical_form(partition, group_perms)
        if canon not in seen:
            seen.add(canon)
            out.append(canon)
    out.sort()
    return tuple(Grouping(parts=p) for p in out)


def groupings_for(ptype: str, layout, parts: int) -> list:
    """Canonical perceptual groupings; empty when analytic(parts) is unavailable."""
    return list(_groupings_cached(ptype, layout, parts))


def analytic_parts_options(ptype: str, layout) -> list:
    """The part counts for which at least one grouping exists."""
    return [k for k in (2, 3, 4) if _groupings_cached(ptype, layout, k)]


def layout_tables_doc() -> dict:
    """All layout tables as a JSON-compatible document (diagnostics)."""
    from .grammar import LayoutAttrs, iter_layouts  # local import: avoids a cycle

    doc = {"min_slot_separation": MIN_SLOT_SEPARATION, "layouts": []}
    for ptype, layout in iter_layouts():
        table = _table_for(ptype, layout)
        entry = {
            "type": ptype,
            "layout": layout.to_doc(),
            "slots": [
                {
                    "id": s.id,
                    "x": s.x,
                    "y": s.y,
                    "is_center": s.is_center,
                    "region_tag": s.region_tag,
                }
                for s in table.slots
            ],
            "canonical_order": canonical_order(list(table.slots)),
            "constant_mode": center_mode_for(ptype, layout),
            "adjacency": sorted(sorted(p) for p in table.adjacency),
            "groupings": {
                str(k): [list(map(list, g.parts)) for g in groupings_for(ptype, layout, k)]
                for k in (2, 3, 4)
            },
        }
        doc["layouts"].append(entry)
    return doc
