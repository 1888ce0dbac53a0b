"""Step-budgeted symbolic solvers.

Two modes share one mechanism: enumerate candidate rules in a fixed
canonical order and test each against panels 1 and 2, stopping at the
first consistent rule or when the step budget runs out. One consistency
check is one search step.

* pure mode sees only the integer sequence of each panel (canonical
  reading order) and must guess the constant's role, the grouping, and
  the operand order.
* context mode additionally knows the layout: which position is the
  center constant, which groupings are perceptually valid, and that
  operands read in canonical order, so its stream is a pruned and
  reordered subset of the pure stream.

The enumeration interleaves hypothesis families (one per constant-role
and interpretation class) round-robin, so cheap rule classes are reached
early regardless of how large the holistic space grows.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations, product
from typing import NamedTuple, Optional

from . import layout as layout_mod
from .calctree import catalan, count_leaves, enumerate_skeleton_shapes
from .errors import SchemaViolation
from .grammar import OPERATORS, VALUE_MAX, VALUE_MIN, LayoutAttrs
from .rng import Pcg32

LATENT = ("latent",)

PURE = "pure"
CONTEXT = "context"
MODES = (PURE, CONTEXT)


class Group(NamedTuple):
    positions: tuple  # ascending view positions
    shape_id: int  # index into enumerate_skeleton_shapes(len(positions))
    ops: tuple  # one operator per internal node, pre-order
    perm: tuple  # leaf i reads positions[perm[i]]


class Hypothesis(NamedTuple):
    role: tuple  # ("latent",) or ("shown", position)
    groups: tuple  # tuple of Group, partitioning the operand positions


class ViewContext(NamedTuple):
    problem_type: str
    center_pos: Optional[int]
    groupings: dict  # parts -> tuple of partitions (tuples of position tuples)


class ProblemView(NamedTuple):
    panels: tuple  # 3 tuples of ints; panel 3 holds None at the masked position
    masked_pos: int
    context: Optional[ViewContext]


class SolveResult(NamedTuple):
    status: str  # "solved" | "unsolved"
    answer: Optional[int]
    hypothesis: Optional[Hypothesis]
    steps_used: int
    budget: int


def interpretation_of(h: Hypothesis) -> str:
    return "holistic" if len(h.groups) == 1 else "analytic"


# ---------------------------------------------------------------------------
# evaluation programs


@lru_cache(maxsize=None)
def _program(n_leaves: int, shape_id: int) -> tuple:
    """Postfix program for a shape: leaf tokens >= 0, op token -(pre+1)."""
    shape = enumerate_skeleton_shapes(n_leaves)[shape_id]
    prog: list = []
    counters = [0, 0]  # leaf cursor, pre-order op cursor

    def walk(sh):
        if sh is None:
            prog.append(counters[0])
            counters[0] += 1
            return
        my_op = counters[1]
        counters[1] += 1
        walk(sh[0])
        walk(sh[1])
        prog.append(-(my_op + 1))

    walk(shape)
    return tuple(prog)


def _eval_group(group: Group, panel) -> Optional[int]:
    """Exact value of the group expression, or None when invalid.

    Invalid means inexact division or any computed value outside [1, 99];
    both rule the hypothesis out for this panel.
    """
    positions, shape_id, ops, perm = group
    prog = _program(len(positions), shape_id)
    stack: list = []
    push = stack.append
    for tok in prog:
        if tok >= 0:
            push(panel[positions[perm[tok]]])
        else:
            r = stack.pop()
            l = stack.pop()
            op = ops[-tok - 1]
            if op == "+":
                v = l + r
            elif op == "-":
                v = l - r
            elif op == "*":
                v = l * r
            else:
                if l % r:
                    return None
                v = l // r
            if v < VALUE_MIN or v > VALUE_MAX:
                return None
            push(v)
    return stack[0]


def _panel_constant(h: Hypothesis, panel) -> Optional[int]:
    """The constant implied by the panel under h, or None if h fails."""
    if h.role[0] == "shown":
        c = panel[h.role[1]]
        have = True
    else:
        c = 0
        have = False
    for group in h.groups:
        v = _eval_group(group, panel)
        if v is None:
            return None
        if have:
            if v != c:
                return None
        else:
            c = v
            have = True
    return c


def check_hypothesis(h: Hypothesis, view: ProblemView) -> bool:
    """Consistent iff h holds exactly on panels 1 and 2 (one search step)."""
    c0 = _panel_constant(h, view.panels[0])
    if c0 is None:
        return False
    c1 = _panel_constant(h, view.panels[1])
    if c1 is None:
        return False
    if h.role[0] == "latent" and c0 != c1:
        return False
    return True


# ---------------------------------------------------------------------------
# solving for the masked value


def _subtree_eval(shape, ops, oi, leaves, li):
    """Evaluate a fully visible subtree; returns (value|None, oi, li)."""
    if shape is None:
        return leaves[li], oi + 0, li + 1
    op = ops[oi]
    lv, oi, li = _subtree_eval(shape[0], ops, oi + 1, leaves, li)
    rv, oi, li = _subtree_eval(shape[1], ops, oi, leaves, li)
    if lv is None or rv is None:
        return None, oi, li
    if op == "+":
        v = lv + rv
    elif op == "-":
        v = lv - rv
    elif op == "*":
        v = lv * rv
    else:
        if rv == 0 or lv % rv:
            return None, oi, li
        v = lv // rv
    if v < VALUE_MIN or v > VALUE_MAX:
        return None, oi, li
    return v, oi, li


def _invert(shape, ops, oi, leaves, li, target):
    """Solve for the single None leaf so the subtree evaluates to `target`."""
    if target is None or target < VALUE_MIN or target > VALUE_MAX:
        return None
    if shape is None:
        return target
    op = ops[oi]
    nl = count_leaves(shape[0])
    left_leaves = leaves[li : li + nl]
    left_oi = oi + 1
    right_oi = left_oi + (nl - 1)
    if None in left_leaves:
        s, _, _ = _subtree_eval(shape[1], ops, right_oi, leaves, li + nl)
        if s is None:
            return None
        if op == "+":
            sub = target - s
        elif op == "-":
            sub = target + s
        elif op == "*":
            if target % s:
                return None
            sub = target // s
        else:
            sub = target * s
        return _invert(shape[0], ops, left_oi, leaves, li, sub)
    s, _, _ = _subtree_eval(shape[0], ops, left_oi, leaves, li)
    if s is None:
        return None
    if op == "+":
        sub = target - s
    elif op == "-":
        sub = s - target
    elif op == "*":
        if target % s:
            return None
        sub = target // s
    else:
        # s / x = target
        if target == 0 or s % target:
            return None
        sub = s // target
    return _invert(shape[1], ops, right_oi, leaves, li + nl, sub)


def _invert_group(group: Group, panel, target: int, masked_pos: int) -> Optional[int]:
    positions, shape_id, ops, perm = group
    shape = enumerate_skeleton_shapes(len(positions))[shape_id]
    leaves = [panel[positions[perm[i]]] for i in range(len(positions))]
    x = _invert(shape, ops, 0, leaves, 0, target)
    if x is None:
        return None
    # forward verification closes any inversion corner case
    full = list(panel)
    full[masked_pos] = x
    if _eval_group(group, full) != target:
        return None
    return x


def solve_for_missing(h: Hypothesis, view: ProblemView) -> Optional[int]:
    """The unique x in [1,99] completing panel 3 under h, or None."""
    panel3 = view.panels[2]
    masked = view.masked_pos
    if h.role[0] == "shown" and h.role[1] == masked:
        # the constant itself is masked: all groups are visible and must agree
        c = None
        for group in h.groups:
            v = _eval_group(group, panel3)
            if v is None or (c is not None and v != c):
                return None
            c = v
        return c
    if h.role[0] == "shown":
        target = panel3[h.role[1]]
    else:
        target = _panel_constant(h, view.panels[0])
        if target is None:
            return None
    x = None
    for group in h.groups:
        if masked in group.positions:
            x = _invert_group(group, panel3, target, masked)
            if x is None:
                return None
        else:
            v = _eval_group(group, panel3)
            if v is None or v != target:
                return None
    return x


# ---------------------------------------------------------------------------
# hypothesis enumeration


def _equal_position_partitions(positions, parts: int):
    """Partitions of `positions` into equal-size blocks, lexicographic."""
    size = len(positions) // parts

    def rec(remaining):
        if not remaining:
            yield ()
            return
        head = remaining[0]
        rest = remaining[1:]
        for combo in combinations(rest, size - 1):
            block = (head,) + combo
            left = tuple(x for x in rest if x not in combo)
            for tail in rec(left):
                yield (block,) + tail

    yield from rec(tuple(positions))


@lru_cache(maxsize=None)
def _group_combos(g: int, identity_only: bool) -> tuple:
    """Materialized (shape_id, ops, perm) combos for small groups (g <= 4)."""
    combos = []
    n_shapes = catalan(g - 1)
    perms = (tuple(range(g)),) if identity_only else tuple(permutations(range(g)))
    for shape_id in range(n_shapes):
        for ops in product(OPERATORS, repeat=g - 1):
            for perm in perms:
                combos.append((shape_id, ops, perm))
    return tuple(combos)


def _holistic_combos(g: int, identity_only: bool):
    """Lazy (shape_id, ops, perm) stream; holistic groups can be large."""
    n_shapes = catalan(g - 1)
    if identity_only:
        identity = tuple(range(g))
        for shape_id in range(n_shapes):
            for ops in product(OPERATORS, repeat=g - 1):
                yield (shape_id, ops, identity)
        return
    for shape_id in range(n_shapes):
        for ops in product(OPERATORS, repeat=g - 1):
            for perm in permutations(range(g)):
                yield (shape_id, ops, perm)


def _family_stream(role, partitions, identity_only: bool):
    """All hypotheses of one (role, interpretation-class) family, in order."""
    for partition in partitions:
        if len(partition) == 1:
            positions = partition[0]
            for shape_id, ops, perm in _holistic_combos(len(positions), identity_only):
                yield Hypothesis(role=role, groups=(Group(positions, shape_id, ops, perm),))
        else:
            pools = [_group_combos(len(block), identity_only) for block in partition]
            for picks in product(*pools):
                groups = tuple(
                    Group(block, shape_id, ops, perm)
                    for block, (shape_id, ops, perm) in zip(partition, picks)
                )
                yield Hypothesis(role=role, groups=groups)


def _context_partitions(view: ProblemView, operand_positions, parts: int):
    ctx = view.context
    cand = ctx.groupings.get(parts, ())
    ops_set = set(operand_positions)
    return tuple(p for p in cand if set().union(*map(set, p)) == ops_set)


def _families(view: ProblemView, mode: str):
    n = len(view.panels[0])
    families = []
    if mode == CONTEXT:
        ctx = view.context
        if ctx is None:
            raise ValueError("context mode needs a context view")
        roles = [("shown", ctx.center_pos) if ctx.center_pos is not None else LATENT]
    else:
        roles = [LATENT] + [("shown", j) for j in range(n)]
    for role in roles:
        if role[0] == "shown":
            operand_positions = tuple(p for p in range(n) if p != role[1])
        else:
            operand_positions = tuple(range(n))
        m = len(operand_positions)
        if m == 0:
            continue
        families.append((role, ((operand_positions,),), mode == CONTEXT))
        for parts in (2, 3, 4):
            if parts > m or m % parts != 0:
                continue
            if mode == CONTEXT:
                partitions = _context_partitions(view, operand_positions, parts)
            else:
                partitions = tuple(_equal_position_partitions(operand_positions, parts))
            if partitions:
                families.append((role, partitions, mode == CONTEXT))
    return families


def enumerate_hypotheses(view: ProblemView, mode: str, shuffle_seed: Optional[int] = None):
    """Deterministic hypothesis stream; round-robin over families.

    With `shuffle_seed` set, the family rotation order is shuffled (for
    robustness studies); the default order is fixed and canonical.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    fams = [_family_stream(role, partitions, ident) for role, partitions, ident in _families(view, mode)]
    if shuffle_seed is not None:
        rng = Pcg32(shuffle_seed, seq=0x5F0FF)
        rng.shuffle(fams)
    active = [iter(f) for f in fams]
    while active:
        still = []
        for it in active:
            try:
                yield next(it)
            except StopIteration:
                continue
            still.append(it)
        active = still


def _holds_on_all_panels(h: Hypothesis, view: ProblemView, answer: int) -> bool:
    full3 = list(view.panels[2])
    full3[view.masked_pos] = answer
    c0 = _panel_constant(h, view.panels[0])
    c1 = _panel_constant(h, view.panels[1])
    c2 = _panel_constant(h, tuple(full3))
    if None in (c0, c1, c2):
        return False
    if h.role[0] == "latent":
        return c0 == c1 == c2
    return True


def solve(
    view: ProblemView,
    mode: str,
    max_steps: int,
    shuffle_seed: Optional[int] = None,
) -> SolveResult:
    """Search until the first consistent rule or the budget runs out."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    steps = 0
    for h in enumerate_hypotheses(view, mode, shuffle_seed):
        if steps >= max_steps:
            return SolveResult("unsolved", None, None, steps, max_steps)
        steps += 1
        if check_hypothesis(h, view):
            answer = solve_for_missing(h, view)
            if answer is None:
                continue
            if not _holds_on_all_panels(h, view, answer):
                raise AssertionError("solver soundness violated")
            return SolveResult("solved", answer, h, steps, max_steps)
    return SolveResult("unsolved", None, None, steps, max_steps)


# ---------------------------------------------------------------------------
# view building and the hypothesis codec


def build_view(doc: dict, mode: str) -> ProblemView:
    """Build a solver view from a (stripped) problem document.

    Only public fields are read, so passing a document with `answer`
    and `generating_rule` removed is always sufficient.
    """
    layout = LayoutAttrs.from_doc(doc["layout"])
    ptype = doc["type"]
    slots = layout_mod.slots_for(ptype, layout)
    order = layout_mod.canonical_order(slots)
    center_ids = {s.id for s in slots if s.is_center}
    pos_of = {sid: i for i, sid in enumerate(order)}
    panels = []
    for pi, pdoc in enumerate(doc["panels"]):
        seq = []
        for sid in order:
            if sid in center_ids:
                seq.append(pdoc["shown_constant"])
            else:
                seq.append(pdoc["values"][str(sid)])
        panels.append(tuple(seq))
    masked_pos = pos_of[doc["masked_slot"]]
    context = None
    if mode == CONTEXT:
        groupings = {}
        for parts in (2, 3, 4):
            gs = layout_mod.groupings_for(ptype, layout, parts)
            if gs:
                groupings[parts] = tuple(
                    tuple(sorted(tuple(sorted(pos_of[sid] for sid in block)) for block in g.parts))
                    for g in gs
                )
        center_pos = pos_of[next(iter(center_ids))] if center_ids else None
        context = ViewContext(problem_type=ptype, center_pos=center_pos, groupings=groupings)
    return ProblemView(panels=tuple(panels), masked_pos=masked_pos, context=context)


def view_to_doc(view: ProblemView) -> dict:
    doc = {
        "panels": [list(p) for p in view.panels],
        "masked_pos": view.masked_pos,
    }
    if view.context is not None:
        doc["context"] = {
            "problem_type": view.context.problem_type,
            "center_pos": view.context.center_pos,
            "groupings": {
                str(k): [list(map(list, part)) for part in parts]
                for k, parts in view.context.groupings.items()
            },
        }
    return doc


def hypothesis_to_doc(h: Hypothesis) -> dict:
    role = {"kind": "latent"} if h.role[0] == "latent" else {"kind": "shown", "position": h.role[1]}
    return {
        "role": role,
        "groups": [
            {
                "positions": list(g.positions),
                "shape_id": g.shape_id,
                "ops": list(g.ops),
                "perm": list(g.perm),
            }
            for g in h.groups
        ],
    }


def hypothesis_from_doc(doc: dict) -> Hypothesis:
    try:
        role_doc = doc["role"]
        kind = role_doc["kind"]
    except (KeyError, TypeError) as exc:
        raise SchemaViolation("/role", str(exc))
    if kind == "latent":
        role = LATENT
    elif kind == "shown":
        role = ("shown", int(role_doc["position"]))
    else:
        raise SchemaViolation("/role/kind", f"unknown kind {kind!r}")
    groups = []
    seen_positions: set = set()
    for i, gdoc in enumerate(doc.get("groups", ())):
        path = f"/groups/{i}"
        try:
            positions = tuple(int(p) for p in gdoc["positions"])
            shape_id = int(gdoc["shape_id"])
            ops = tuple(gdoc["ops"])
            perm = tuple(int(p) for p in gdoc["perm"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(path, str(exc))
        g = len(positions)
        if g == 0 or positions != tuple(sorted(positions)):
            raise SchemaViolation(path + "/positions", "must be non-empty ascending")
        if seen_positions & set(positions):
            raise SchemaViolation(path + "/positions", "groups must be disjoint")
        seen_positions |= set(positions)
        if not 0 <= shape_id < catalan(g - 1):
            raise SchemaViolation(path + "/shape_id", "out of range")
        if len(ops) != g - 1 or not set(ops) <= set(OPERATORS):
            raise SchemaViolation(path + "/ops", "bad operator tuple")
        if sorted(perm) != list(range(g)):
            raise SchemaViolation(path + "/perm", "not a permutation")
        groups.append(Group(positions, shape_id, ops, perm))
    if not groups:
        raise SchemaViolation("/groups", "at least one group required")
    return Hypothesis(role=role, groups=tuple(groups))
