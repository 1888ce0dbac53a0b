"""Problem generation: orchestration, masking, serialization.

A problem is three panels that satisfy one shared rule. Generation
samples a spec for the seed, builds the rule (grouping, expression
skeletons, operators), draws the panel constants, then fills every
group of every panel with a constraint-satisfying calculation tree.
Any dead end restarts the instantiation; the restart budget bounds
worst-case latency.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from . import layout as layout_mod
from .calctree import Skeleton, catalan, enumerate_skeleton_shapes, sample_values
from .errors import GenerationExhausted, SchemaViolation
from .grammar import (
    ANALYTIC,
    OPERATORS,
    VALUE_MAX,
    VALUE_MIN,
    AlgebraAttrs,
    LayoutAttrs,
    ProblemSpec,
    SpecFilter,
    sample_problem_spec,
)
from .layout import SHOWN_VARYING
from .rng import Pcg32
from .solver import Group, Hypothesis, hypothesis_from_doc, hypothesis_to_doc

SCHEMA_VERSION = 1
RESTART_BUDGET = 256
_INST_STREAM = 0x1257A27


@dataclass(frozen=True)
class Panel:
    """values maps every non-center slot id to its integer (None = masked)."""

    values: dict
    shown_constant: Optional[int] = None


@dataclass(frozen=True)
class Problem:
    id: str
    seed: int
    spec: ProblemSpec
    generating_rule: Hypothesis
    panels: tuple  # exactly 3 Panels
    masked_slot: int
    answer: int


def spec_digest(spec: ProblemSpec) -> str:
    doc = {"type": spec.problem_type, "layout": spec.layout.to_doc(), "algebra": spec.algebra.to_doc()}
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:8]


def problem_id(spec: ProblemSpec) -> str:
    return f"{spec.seed:020d}-{spec_digest(spec)}"


def integer_count(spec: ProblemSpec) -> int:
    """Visible integers per panel: operand slots plus a shown center."""
    slots = layout_mod.slots_for(spec.problem_type, spec.layout)
    return len(slots)  # the center slot displays the shown constant


def _rule_for_spec(spec: ProblemSpec, order, center_ids, rng: Pcg32) -> Hypothesis:
    pos_of = {sid: i for i, sid in enumerate(order)}
    operand_positions = tuple(pos_of[sid] for sid in order if sid not in center_ids)
    if spec.algebra.interpretation == ANALYTIC:
        grouping = layout_mod.groupings_for(spec.problem_type, spec.layout, spec.algebra.parts)[
            spec.algebra.grouping_id
        ]
        blocks = tuple(
            sorted(tuple(sorted(pos_of[sid] for sid in block)) for block in grouping.parts)
        )
    else:
        blocks = (tuple(sorted(operand_positions)),)
    groups = []
    for block in blocks:
        g = len(block)
        shape_id = rng.randrange(catalan(g - 1))
        ops = tuple(OPERATORS[rng.randrange(4)] for _ in range(g - 1))
        groups.append(Group(positions=block, shape_id=shape_id, ops=ops, perm=tuple(range(g))))
    if spec.algebra.constant_mode == SHOWN_VARYING:
        center_pos = pos_of[next(iter(center_ids))]
        role = ("shown", center_pos)
    else:
        role = ("latent",)
    return Hypothesis(role=role, groups=tuple(groups))


def mask_answer(panel: Panel, slots, rng: Pcg32):
    """Pick the masked slot uniformly among non-center slots; return (slot, answer)."""
    candidates = sorted(s.id for s in slots if not s.is_center)
    slot = candidates[rng.randrange(len(candidates))]
    return slot, panel.values[slot]


def generate_problem(seed: int, spec_filter: Optional[SpecFilter] = None) -> Problem:
    """Deterministically generate one complete problem for the seed."""
    spec = sample_problem_spec(seed, spec_filter)
    slots = layout_mod.slots_for(spec.problem_type, spec.layout)
    order = layout_mod.canonical_order(slots)
    center_ids = {s.id for s in slots if s.is_center}
    slot_at_pos = {i: sid for i, sid in enumerate(order)}
    shown = spec.algebra.constant_mode == SHOWN_VARYING
    rng = Pcg32(seed, seq=_INST_STREAM)

    for _ in range(RESTART_BUDGET):
        rule = _rule_for_spec(spec, order, center_ids, rng)
        if shown:
            constants = rng.sample_distinct(VALUE_MIN, VALUE_MAX, 3)
        else:
            constants = [rng.randint(VALUE_MIN, VALUE_MAX)] * 3
        skeletons = [
            Skeleton(shape=enumerate_skeleton_shapes(len(g.positions))[g.shape_id], ops=g.ops)
            for g in rule.groups
        ]
        panels = []
        failed = False
        for constant in constants:
            values: dict = {}
            for group, skeleton in zip(rule.groups, skeletons):
                tree = sample_values(skeleton, constant, rng)
                if tree is None:
                    failed = True
                    break
                for pos, leaf in zip(group.positions, tree.leaf_values()):
                    values[slot_at_pos[pos]] = leaf
            if failed:
                break
            panels.append(Panel(values=values, shown_constant=constant if shown else None))
        if failed:
            continue
        masked_slot, answer = mask_answer(panels[2], slots, rng)
        masked_values = dict(panels[2].values)
        masked_values[masked_slot] = None
        panels[2] = Panel(values=masked_values, shown_constant=panels[2].shown_constant)
        return Problem(
            id=problem_id(spec),
            seed=seed,
            spec=spec,
            generating_rule=rule,
            panels=tuple(panels),
            masked_slot=masked_slot,
            answer=answer,
        )
    raise GenerationExhausted(seed, RESTART_BUDGET)


# ---------------------------------------------------------------------------
# serialization


def problem_to_doc(problem: Problem) -> dict:
    spec = problem.spec
    return {
        "schema_version": SCHEMA_VERSION,
        "id": problem.id,
        "seed": problem.seed,
        "type": spec.problem_type,
        "layout": spec.layout.to_doc(),
        "algebra": spec.algebra.to_doc(),
        "generating_rule": hypothesis_to_doc(problem.generating_rule),
        "panels": [
            {
                "values": {str(k): v for k, v in sorted(p.values.items())},
                **({"shown_constant": p.shown_constant} if p.shown_constant is not None else {}),
            }
            for p in problem.panels
        ],
        "masked_slot": problem.masked_slot,
        "answer": problem.answer,
    }


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def serialize(problem: Problem) -> str:
    """Canonical JSON text; equal problems produce byte-identical output."""
    return canonical_json(problem_to_doc(problem))


def _require(doc: dict, key: str, path: str):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaViolation(f"{path}/{key}".replace("//", "/"), "missing field")
    return doc[key]


def _check_int(value, path: str, lo: Optional[int] = None, hi: Optional[int] = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaViolation(path, "expected an integer")
    if lo is not None and value < lo:
        raise SchemaViolation(path, f"below {lo}")
    if hi is not None and value > hi:
        raise SchemaViolation(path, f"above {hi}")
    return value


def deserialize(document) -> Problem:
    """Parse and validate a problem document (JSON text or dict)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaViolation("/", f"invalid JSON: {exc}")
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaViolation("/", "expected an object")
    version = _require(doc, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise SchemaViolation("/schema_version", f"unsupported version {version!r}")
    pid = _require(doc, "id", "")
    seed = _check_int(_require(doc, "seed", ""), "/seed", lo=0)
    ptype = _require(doc, "type", "")
    layout_doc = _require(doc, "layout", "")
    algebra_doc = _require(doc, "algebra", "")
    rule_doc = _require(doc, "generating_rule", "")
    panels_doc = _require(doc, "panels", "")
    masked_slot = _check_int(_require(doc, "masked_slot", ""), "/masked_slot", lo=0)
    answer = _check_int(_require(doc, "answer", ""), "/answer", lo=VALUE_MIN, hi=VALUE_MAX)

    try:
        layout = LayoutAttrs.from_doc(layout_doc)
        algebra = AlgebraAttrs.from_doc(algebra_doc)
    except (KeyError, TypeError) as exc:
        raise SchemaViolation("/layout", str(exc))
    spec = ProblemSpec(problem_type=ptype, layout=layout, algebra=algebra, seed=seed)
    from .grammar import validate_spec  # local import keeps module load order simple

    violations = validate_spec(spec)
    if violations:
        raise SchemaViolation("/algebra", ", ".join(violations))

    try:
        rule = hypothesis_from_doc(rule_doc)
    except SchemaViolation as exc:
        raise SchemaViolation("/generating_rule" + exc.path, "")

    slots = layout_mod.slots_for(ptype, layout)
    non_center = sorted(s.id for s in slots if not s.is_center)
    shown = algebra.constant_mode == SHOWN_VARYING
    if not isinstance(panels_doc, list) or len(panels_doc) != 3:
        raise SchemaViolation("/panels", "expected exactly 3 panels")
    if masked_slot not in non_center:
        raise SchemaViolation("/masked_slot", "must be a non-center slot id")
    panels = []
    for i, pdoc in enumerate(panels_doc):
        path = f"/panels/{i}"
        values_doc = _require(pdoc, "values", path)
        values = {}
        for sid in non_center:
            key = str(sid)
            if key not in values_doc:
                raise SchemaViolation(f"{path}/values/{sid}", "missing slot value")
            v = values_doc[key]
            if i == 2 and sid == masked_slot:
                if v is not None:
                    raise SchemaViolation(f"{path}/values/{sid}", "masked slot must be null")
                values[sid] = None
            else:
                values[sid] = _check_int(v, f"{path}/values/{sid}", VALUE_MIN, VALUE_MAX)
        shown_constant = None
        if shown:
            shown_constant = _check_int(
                _require(pdoc, "shown_constant", path), f"{path}/shown_constant", VALUE_MIN, VALUE_MAX
            )
        elif "shown_constant" in pdoc:
            raise SchemaViolation(f"{path}/shown_constant", "layout has no shown center")
        panels.append(Panel(values=values, shown_constant=shown_constant))
    return Problem(
        id=pid,
        seed=seed,
        spec=spec,
        generating_rule=rule,
        panels=tuple(panels),
        masked_slot=masked_slot,
        answer=answer,
    )
