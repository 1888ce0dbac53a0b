"""Calculation trees: expression skeletons, exact evaluation, sampling.

A calculation tree is a binary expression tree whose root value is the
panel constant. Every node value is an integer in [1, 99] and each
internal node satisfies `left (op) right == value` with exact integer
arithmetic. Division must divide exactly; subtraction must stay inside
the value range. Sampling works top-down: each node draws a uniformly
random valid (left, right) pair for its value, and a tree that runs into
an empty decomposition is retried from the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .errors import NonIntegerDivision, OutOfRange
from .grammar import OPERATORS, VALUE_MAX, VALUE_MIN
from .rng import Pcg32

TREE_RETRY_BUDGET = 64
MAX_LEAVES = 9


@dataclass(frozen=True)
class CalcNode:
    """One tree node; leaves have op/left/right unset."""

    value: int
    op: Optional[str] = None
    left: Optional["CalcNode"] = None
    right: Optional["CalcNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.op is None

    def leaf_values(self) -> list:
        if self.is_leaf:
            return [self.value]
        return self.left.leaf_values() + self.right.leaf_values()


@dataclass(frozen=True)
class Skeleton:
    """A tree shape plus one operator per internal node (pre-order)."""

    shape: object  # nested (left, right) tuples; a leaf is None
    ops: tuple

    @property
    def leaf_count(self) -> int:
        return count_leaves(self.shape)


def count_leaves(shape) -> int:
    if shape is None:
        return 1
    return count_leaves(shape[0]) + count_leaves(shape[1])


@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    if n <= 1:
        return 1
    return sum(catalan(i) * catalan(n - 1 - i) for i in range(n))


@lru_cache(maxsize=None)
def enumerate_skeleton_shapes(n: int) -> tuple:
    """All binary tree shapes over n ordered leaves, left-deep first."""
    if not 1 <= n <= MAX_LEAVES:
        raise OutOfRange(f"leaf count {n} outside [1, {MAX_LEAVES}]")
    if n == 1:
        return (None,)
    shapes = []
    for left_size in range(n - 1, 0, -1):
        for left in enumerate_skeleton_shapes(left_size):
            for right in enumerate_skeleton_shapes(n - left_size):
                shapes.append((left, right))
    return tuple(shapes)


def _apply(op: str, left: int, right: int) -> int:
    if op == "+":
        result = left + right
    elif op == "-":
        result = left - right
    elif op == "*":
        result = left * right
    elif op == "/":
        q, r = divmod(left, right)
        if r != 0:
            raise NonIntegerDivision(f"{left} / {right}")
        result = q
    else:
        raise ValueError(f"unknown operator: {op!r}")
    if not VALUE_MIN <= result <= VALUE_MAX:
        raise OutOfRange(f"{left} {op} {right} = {result}")
    return result


def evaluate(tree: CalcNode) -> int:
    """Exact root value; raises on inexact division or out-of-range nodes."""
    if tree.is_leaf:
        if not VALUE_MIN <= tree.value <= VALUE_MAX:
            raise OutOfRange(f"leaf value {tree.value}")
        return tree.value
    return _apply(tree.op, evaluate(tree.left), evaluate(tree.right))


@lru_cache(maxsize=None)
def decompositions(op: str, parent_value: int) -> tuple:
    """Every (left, right) pair in [1,99]^2 with `left op right == parent_value`."""
    if not VALUE_MIN <= parent_value <= VALUE_MAX:
        raise OutOfRange(f"parent value {parent_value}")
    v = parent_value
    if op == "+":
        return tuple((l, v - l) for l in range(max(VALUE_MIN, v - VALUE_MAX), min(VALUE_MAX, v - 1) + 1))
    if op == "-":
        return tuple((v + r, r) for r in range(VALUE_MIN, VALUE_MAX - v + 1))
    if op == "*":
        return tuple((d, v // d) for d in range(1, v + 1) if v % d == 0)
    if op == "/":
        return tuple((v * r, r) for r in range(VALUE_MIN, VALUE_MAX // v + 1))
    raise ValueError(f"unknown operator: {op!r}")


def _sample_once(shape, ops, value: int, rng: Pcg32, op_index: int) -> Optional[tuple]:
    """Build a node for `value`; returns (node, next_op_index) or None."""
    if shape is None:
        return CalcNode(value=value), op_index
    op = ops[op_index]
    pairs = decompositions(op, value)
    if not pairs:
        return None
    left_val, right_val = pairs[rng.randrange(len(pairs))]
    left = _sample_once(shape[0], ops, left_val, rng, op_index + 1)
    if left is None:
        return None
    left_node, op_index = left
    right = _sample_once(shape[1], ops, right_val, rng, op_index)
    if right is None:
        return None
    right_node, op_index = right
    return CalcNode(value=value, op=op, left=left_node, right=right_node), op_index


def sample_values(skeleton: Skeleton, root_value: int, rng: Pcg32) -> Optional[CalcNode]:
    """Sample a tree with the given skeleton and root value.

    Returns None (Failure) when no attempt within the retry budget
    produces a tree; callers treat that as a restart signal.
    """
    if not VALUE_MIN <= root_value <= VALUE_MAX:
        raise OutOfRange(f"root value {root_value}")
    for _ in range(TREE_RETRY_BUDGET):
        built = _sample_once(skeleton.shape, skeleton.ops, root_value, rng, 0)
        if built is not None:
            return built[0]
    return None


def internal_node_count(shape) -> int:
    return count_leaves(shape) - 1


def random_skeleton(n_leaves: int, rng: Pcg32) -> Skeleton:
    """Uniform shape choice plus independent uniform operator choices."""
    shapes = enumerate_skeleton_shapes(n_leaves)
    shape = shapes[rng.randrange(len(shapes))]
    ops = tuple(OPERATORS[rng.randrange(4)] for _ in range(n_leaves - 1))
    return Skeleton(shape=shape, ops=ops)
