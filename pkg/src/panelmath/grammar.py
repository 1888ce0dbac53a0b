"""Attribute grammar for problem specs.

A problem spec is one complete assignment of the hierarchical attribute
tree: problem type, then layout attributes, then algebra attributes.
Every choice node is sampled uniformly over its currently legal children,
so a seed fully determines the spec.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from . import layout as layout_mod
from .errors import UnsatisfiableFilter
from .layout import (
    ARRANGEMENTS,
    HIDDEN_FIXED,
    PART_COUNT_RANGE,
    RELATIONS,
    RING_SIZES,
    SHAPES,
    SHOWN_VARYING,
)
from .rng import Pcg32

PROBLEM_TYPES = ("combination", "composition", "partition")
OPERATORS = ("+", "-", "*", "/")
VALUE_MIN, VALUE_MAX = 1, 99

HOLISTIC = "holistic"
ANALYTIC = "analytic"

_SPEC_STREAM = 0xA11CE  # stream id separating spec draws from instantiation draws


@dataclass(frozen=True)
class LayoutAttrs:
    shape: str
    relation: Optional[str] = None  # combination
    arrangement: Optional[str] = None  # composition
    part_count: Optional[int] = None  # partition
    ring_size: Optional[int] = None  # composition/circle only

    def to_doc(self) -> dict:
        doc = {"shape": self.shape}
        if self.relation is not None:
            doc["relation"] = self.relation
        if self.arrangement is not None:
            doc["arrangement"] = self.arrangement
        if self.part_count is not None:
            doc["part_count"] = self.part_count
        if self.ring_size is not None:
            doc["ring_size"] = self.ring_size
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "LayoutAttrs":
        return cls(
            shape=doc["shape"],
            relation=doc.get("relation"),
            arrangement=doc.get("arrangement"),
            part_count=doc.get("part_count"),
            ring_size=doc.get("ring_size"),
        )


@dataclass(frozen=True)
class AlgebraAttrs:
    interpretation: str  # HOLISTIC or ANALYTIC
    parts: Optional[int] = None  # 2 | 3 | 4 when analytic
    grouping_id: Optional[int] = None  # index into groupings_for(...)
    operator_domain: tuple = OPERATORS
    constant_mode: str = HIDDEN_FIXED

    def to_doc(self) -> dict:
        doc = {
            "interpretation": self.interpretation,
            "operator_domain": list(self.operator_domain),
            "constant_mode": self.constant_mode,
        }
        if self.interpretation == ANALYTIC:
            doc["parts"] = self.parts
            doc["grouping_id"] = self.grouping_id
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "AlgebraAttrs":
        return cls(
            interpretation=doc["interpretation"],
            parts=doc.get("parts"),
            grouping_id=doc.get("grouping_id"),
            operator_domain=tuple(doc["operator_domain"]),
            constant_mode=doc["constant_mode"],
        )


@dataclass(frozen=True)
class ProblemSpec:
    problem_type: str
    layout: LayoutAttrs
    algebra: AlgebraAttrs
    seed: int

    def to_doc(self) -> dict:
        return {
            "type": self.problem_type,
            "layout": self.layout.to_doc(),
            "algebra": self.algebra.to_doc(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SpecFilter:
    """Optional constraints narrowing the sample space."""

    types: Optional[tuple] = None
    shapes: Optional[tuple] = None
    relations: Optional[tuple] = None
    arrangements: Optional[tuple] = None
    part_counts: Optional[tuple] = None
    interpretation: Optional[str] = None  # HOLISTIC or ANALYTIC
    parts: Optional[int] = None

    @classmethod
    def make(cls, **kwargs) -> "SpecFilter":
        norm = {}
        for key in ("types", "shapes", "relations", "arrangements", "part_counts"):
            val = kwargs.pop(key, None)
            norm[key] = tuple(val) if val is not None else None
        norm["interpretation"] = kwargs.pop("interpretation", None)
        norm["parts"] = kwargs.pop("parts", None)
        if kwargs:
            raise TypeError(f"unknown filter fields: {sorted(kwargs)}")
        return cls(**norm)


def iter_layouts():
    """Every legal (problem type, LayoutAttrs) pair, in a stable order."""
    for shape in SHAPES:
        for rel in RELATIONS:
            yield "combination", LayoutAttrs(shape=shape, relation=rel)
    for shape in SHAPES:
        for arr in ARRANGEMENTS:
            if arr == "circle":
                for ring in RING_SIZES:
                    yield "composition", LayoutAttrs(shape=shape, arrangement=arr, ring_size=ring)
            else:
                yield "composition", LayoutAttrs(shape=shape, arrangement=arr)
    for shape in SHAPES:
        for k in range(PART_COUNT_RANGE[0], PART_COUNT_RANGE[1] + 1):
            yield "partition", LayoutAttrs(shape=shape, part_count=k)


@dataclass(frozen=True)
class _Assignment:
    ptype: str
    layout: LayoutAttrs
    interpretation: str
    parts: Optional[int]
    grouping_id: Optional[int]


@lru_cache(maxsize=1)
def _all_assignments() -> tuple:
    out = []
    for ptype, layout in iter_layouts():
        out.append(_Assignment(ptype, layout, HOLISTIC, None, None))
        for k in layout_mod.analytic_parts_options(ptype, layout):
            for gid in range(len(layout_mod.groupings_for(ptype, layout, k))):
                out.append(_Assignment(ptype, layout, ANALYTIC, k, gid))
    return tuple(out)


def _admits(a: _Assignment, f: SpecFilter) -> bool:
    if f.types is not None and a.ptype not in f.types:
        return False
    if f.shapes is not None and a.layout.shape not in f.shapes:
        return False
    if f.relations is not None and a.layout.relation not in f.relations:
        return False
    if f.arrangements is not None and a.layout.arrangement not in f.arrangements:
        return False
    if f.part_counts is not None and a.layout.part_count not in f.part_counts:
        return False
    if f.interpretation is not None and a.interpretation != f.interpretation:
        return False
    if f.parts is not None and a.parts != f.parts:
        return False
    return True


def attribute_domains(ptype: str) -> dict:
    """Full finite domains of every attribute under the given problem type."""
    domains = {"shape": list(SHAPES), "operator_domain": list(OPERATORS)}
    if ptype == "combination":
        domains["relation"] = list(RELATIONS)
    elif ptype == "composition":
        domains["arrangement"] = list(ARRANGEMENTS)
        domains["ring_size"] = list(RING_SIZES)
    elif ptype == "partition":
        domains["part_count"] = list(range(PART_COUNT_RANGE[0], PART_COUNT_RANGE[1] + 1))
    else:
        raise ValueError(f"unknown problem type: {ptype!r}")
    domains["interpretation"] = [HOLISTIC, ANALYTIC]
    domains["parts"] = [2, 3, 4]
    domains["constant_mode"] = [SHOWN_VARYING, HIDDEN_FIXED]
    return domains


def sample_problem_spec(seed: int, spec_filter: Optional[SpecFilter] = None) -> ProblemSpec:
    """Sample one spec; identical (seed, filter) always yields the same spec."""
    f = spec_filter or SpecFilter()
    pool = [a for a in _all_assignments() if _admits(a, f)]
    if not pool:
        raise UnsatisfiableFilter(f"no valid assignment under {f}")
    rng = Pcg32(seed, seq=_SPEC_STREAM)

    def pick(options):
        return options[rng.randrange(len(options))]

    ptype = pick(sorted({a.ptype for a in pool}, key=PROBLEM_TYPES.index))
    pool = [a for a in pool if a.ptype == ptype]
    shape = pick(sorted({a.layout.shape for a in pool}, key=SHAPES.index))
    pool = [a for a in pool if a.layout.shape == shape]
    if ptype == "combination":
        rel = pick(sorted({a.layout.relation for a in pool}, key=RELATIONS.index))
        pool = [a for a in pool if a.layout.relation == rel]
    elif ptype == "composition":
        arr = pick(sorted({a.layout.arrangement for a in pool}, key=ARRANGEMENTS.index))
        pool = [a for a in pool if a.layout.arrangement == arr]
        if arr == "circle":
            ring = pick(sorted({a.layout.ring_size for a in pool}))
            pool = [a for a in pool if a.layout.ring_size == ring]
    else:
        k = pick(sorted({a.layout.part_count for a in pool}))
        pool = [a for a in pool if a.layout.part_count == k]
    interp = pick(sorted({a.interpretation for a in pool}))
    pool = [a for a in pool if a.interpretation == interp]
    if interp == ANALYTIC:
        parts = pick(sorted({a.parts for a in pool}))
        pool = [a for a in pool if a.parts == parts]
        gid = pick(sorted({a.grouping_id for a in pool}))
        pool = [a for a in pool if a.grouping_id == gid]
    chosen = pool[0]
    algebra = AlgebraAttrs(
        interpretation=chosen.interpretation,
        parts=chosen.parts,
        grouping_id=chosen.grouping_id,
        operator_domain=OPERATORS,
        constant_mode=layout_mod.center_mode_for(chosen.ptype, chosen.layout),
    )
    return ProblemSpec(problem_type=chosen.ptype, layout=chosen.layout, algebra=algebra, seed=seed)


def validate_spec(spec: ProblemSpec) -> list:
    """All invariant violations of the spec; empty list means valid."""
    violations = []
    if spec.problem_type not in PROBLEM_TYPES:
        violations.append("InvalidProblemType")
        return violations
    lay = spec.layout
    if lay.shape not in SHAPES:
        violations.append("InvalidShape")
    if spec.problem_type == "combination":
        if lay.relation not in RELATIONS:
            violations.append("InvalidRelation")
        if lay.arrangement is not None or lay.part_count is not None:
            violations.append("ForeignLayoutAttr")
    elif spec.problem_type == "composition":
        if lay.arrangement not in ARRANGEMENTS:
            violations.append("InvalidArrangement")
        elif lay.arrangement == "circle" and lay.ring_size not in RING_SIZES:
            violations.append("InvalidRingSize")
        if lay.relation is not None or lay.part_count is not None:
            violations.append("ForeignLayoutAttr")
    else:
        if lay.part_count is None or not PART_COUNT_RANGE[0] <= lay.part_count <= PART_COUNT_RANGE[1]:
            violations.append("InvalidPartCount")
        if lay.relation is not None or lay.arrangement is not None:
            violations.append("ForeignLayoutAttr")
    if violations:
        return violations

    alg = spec.algebra
    if not alg.operator_domain or not set(alg.operator_domain) <= set(OPERATORS):
        violations.append("InvalidOperatorDomain")
    expected_mode = layout_mod.center_mode_for(spec.problem_type, lay)
    if alg.constant_mode not in (SHOWN_VARYING, HIDDEN_FIXED):
        violations.append("InvalidConstantMode")
    elif alg.constant_mode == SHOWN_VARYING and expected_mode != SHOWN_VARYING:
        violations.append("CenterUnavailable")
    elif alg.constant_mode != expected_mode:
        violations.append("ConstantModeMismatch")
    if alg.interpretation == HOLISTIC:
        if alg.parts is not None or alg.grouping_id is not None:
            violations.append("ForeignAlgebraAttr")
    elif alg.interpretation == ANALYTIC:
        if alg.parts not in (2, 3, 4):
            violations.append("InvalidParts")
        else:
            groupings = layout_mod.groupings_for(spec.problem_type, lay, alg.parts)
            if not groupings:
                violations.append("AnalyticUnavailable")
            elif alg.grouping_id is None or not 0 <= alg.grouping_id < len(groupings):
                violations.append("InvalidGroupingId")
    else:
        violations.append("InvalidInterpretation")
    return violations
