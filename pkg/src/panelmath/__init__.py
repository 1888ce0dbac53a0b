"""Visual arithmetic panel puzzles: generation, rendering, symbolic solving."""

from .calctree import (
    CalcNode,
    Skeleton,
    decompositions,
    enumerate_skeleton_shapes,
    evaluate,
    sample_values,
)
from .generator import (
    Panel,
    Problem,
    deserialize,
    generate_problem,
    mask_answer,
    serialize,
)
from .grammar import (
    AlgebraAttrs,
    LayoutAttrs,
    ProblemSpec,
    SpecFilter,
    attribute_domains,
    sample_problem_spec,
    validate_spec,
)
from .layout import (
    Grouping,
    Slot,
    canonical_order,
    center_mode_for,
    groupings_for,
    slots_for,
)
from .solver import (
    Hypothesis,
    ProblemView,
    SolveResult,
    build_view,
    check_hypothesis,
    enumerate_hypotheses,
    solve,
    solve_for_missing,
)

__version__ = "0.1.0"
