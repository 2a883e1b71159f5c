"""Draw-slot layout and exact value ranges for monitored expressions.

The fully-observed monitor reads, per evaluation round, a shuffled sequence
of recorded successors for every relevant source state.  Which position of
that sequence a variable occurrence reads is static: products whose factors
share a source state shift the right factor past every slot the left factor
uses, so that the two factors consume distinct visits.  The slot layout
determines the exact range of the per-round outcome, which in turn sets the
width scale of the confidence intervals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Tuple

from ..errors import SpecValidationError
from ..intervals import UNIT, Interval
from .ast import Add, Atom, Const, Expr, Inv, Mul, SeqProb, Sub, TransVar
from .labeled import LAdd, LConst, LExpr, LInv, LMul, LSub, LVar


@dataclass(frozen=True)
class SlotLayout:
    slots: Dict[LVar, int]          # 1-based read position per occurrence
    demand: Dict[str, int]          # slots needed per source state
    targets: Dict[str, Tuple[str, ...]]  # relevant successors per source

    @property
    def draw_slots(self) -> Tuple[Tuple[str, int], ...]:
        out = {(v.source, s) for v, s in self.slots.items()}
        return tuple(sorted(out))


def assign_slots(lexpr: LExpr) -> SlotLayout:
    """Static read positions implementing the temporal shift of products.

    For a product whose factors depend on a common source state, every
    occurrence on the right is offset by the number of slots the left factor
    demands for that state, so the sample counts add up; sums and
    differences share slots freely.
    """
    slots: Dict[LVar, int] = {}
    targets: Dict[str, set] = {}

    def walk(node: LExpr) -> Dict[str, int]:
        if isinstance(node, LConst):
            return {}
        if isinstance(node, LVar):
            slots[node] = 1
            targets.setdefault(node.source, set()).add(node.target)
            return {node.source: 1}
        if isinstance(node, (LAdd, LSub)):
            left = walk(node.left)
            right = walk(node.right)
            return {s: max(left.get(s, 0), right.get(s, 0)) for s in left.keys() | right.keys()}
        if isinstance(node, LMul):
            left = walk(node.left)
            right_nodes_before = set(slots)
            right = walk(node.right)
            shared = left.keys() & right.keys()
            if shared:
                for var in set(slots) - right_nodes_before:
                    if var.source in shared:
                        slots[var] += left[var.source]
            out = {}
            for s in left.keys() | right.keys():
                if s in shared:
                    out[s] = left[s] + right[s]
                else:
                    out[s] = max(left.get(s, 0), right.get(s, 0))
            return out
        if isinstance(node, LInv):
            raise SpecValidationError("slot layout requires a division-free expression")
        raise TypeError(f"unknown labeled node {node!r}")

    demand = walk(lexpr)
    return SlotLayout(slots=slots, demand=demand,
                      targets={s: tuple(sorted(t)) for s, t in targets.items()})


TOP = "<none>"  # drawn visit led to an irrelevant successor


def _eval_assignment(lexpr: LExpr, layout: SlotLayout, assignment) -> float:
    if isinstance(lexpr, LConst):
        return lexpr.value
    if isinstance(lexpr, LVar):
        return 1.0 if assignment[(lexpr.source, layout.slots[lexpr])] == lexpr.target else 0.0
    if isinstance(lexpr, LAdd):
        return _eval_assignment(lexpr.left, layout, assignment) + _eval_assignment(lexpr.right, layout, assignment)
    if isinstance(lexpr, LSub):
        return _eval_assignment(lexpr.left, layout, assignment) - _eval_assignment(lexpr.right, layout, assignment)
    if isinstance(lexpr, LMul):
        return _eval_assignment(lexpr.left, layout, assignment) * _eval_assignment(lexpr.right, layout, assignment)
    raise TypeError(f"unknown labeled node {lexpr!r}")


def _interval_eval(lexpr: LExpr) -> Interval:
    if isinstance(lexpr, LConst):
        return Interval.point(lexpr.value)
    if isinstance(lexpr, LVar):
        return UNIT
    if isinstance(lexpr, LAdd):
        return _interval_eval(lexpr.left) + _interval_eval(lexpr.right)
    if isinstance(lexpr, LSub):
        return _interval_eval(lexpr.left) - _interval_eval(lexpr.right)
    if isinstance(lexpr, LMul):
        return _interval_eval(lexpr.left) * _interval_eval(lexpr.right)
    raise SpecValidationError("range computation requires a division-free expression")


def expr_range(lexpr: LExpr, slot_limit: int = 16) -> Interval:
    """Exact min/max of the per-round outcome over all joint draw results.

    Each draw slot independently takes one of the relevant successors of its
    source state, or none of them; the expression value is extremized over
    the full joint assignment.  Above ``slot_limit`` slots the exponential
    enumeration is replaced by per-occurrence interval arithmetic, which is
    an enclosure rather than exact.
    """
    layout = assign_slots(lexpr)
    slots = layout.draw_slots
    if not slots:
        return _interval_eval(lexpr)
    if len(slots) > slot_limit:
        return _interval_eval(lexpr)

    domains = [layout.targets[src] + (TOP,) for src, _ in slots]
    lo = hi = None
    for combo in itertools.product(*domains):
        assignment = dict(zip(slots, combo))
        v = _eval_assignment(lexpr, layout, assignment)
        lo = v if lo is None or v < lo else lo
        hi = v if hi is None or v > hi else hi
    return Interval(lo, hi)


def _is_unit_ratio(num: Expr, den: Expr) -> bool:
    # P[uv]/P[u]: every numerator word extends some denominator word, so the
    # ratio is a conditional probability and stays in [0, 1].
    if not (isinstance(num, SeqProb) and isinstance(den, SeqProb)):
        return False
    for word in num.words:
        if not any(word[:len(d)] == d and len(word) > len(d) for d in den.words):
            return False
    return True


def bse_range(expr: Expr) -> Interval:
    """A-priori range of a windowed expression by interval propagation.

    Conditional-probability ratios produced by ``P[v | u]`` are recognized
    structurally and refined to [0, 1].
    """
    if isinstance(expr, Const):
        return Interval.point(expr.value)
    if isinstance(expr, Atom):
        return Interval(expr.ref.low, expr.ref.high)
    if isinstance(expr, SeqProb):
        return UNIT
    if isinstance(expr, TransVar):
        return UNIT
    if isinstance(expr, Add):
        return bse_range(expr.left) + bse_range(expr.right)
    if isinstance(expr, Sub):
        return bse_range(expr.left) - bse_range(expr.right)
    if isinstance(expr, Mul):
        if isinstance(expr.right, Inv) and _is_unit_ratio(expr.left, expr.right.child):
            return UNIT
        return bse_range(expr.left) * bse_range(expr.right)
    if isinstance(expr, Inv):
        return bse_range(expr.child).inverse()
    raise TypeError(f"unknown node {expr!r}")
