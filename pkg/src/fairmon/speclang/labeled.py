"""Labeled expression trees: one distinct index per transition-variable use.

Duplicate occurrences of the same transition variable must draw from
different recorded visits, so each occurrence gets its own label before a
monitor is compiled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from ..errors import SpecValidationError
from .ast import Add, Const, Expr, Inv, Mul, Sub, TransVar


class LExpr:
    __slots__ = ()


@dataclass(frozen=True)
class LConst(LExpr):
    value: float


@dataclass(frozen=True)
class LVar(LExpr):
    source: str
    target: str
    label: int


@dataclass(frozen=True)
class LAdd(LExpr):
    left: LExpr
    right: LExpr


@dataclass(frozen=True)
class LSub(LExpr):
    left: LExpr
    right: LExpr


@dataclass(frozen=True)
class LMul(LExpr):
    left: LExpr
    right: LExpr


@dataclass(frozen=True)
class LInv(LExpr):
    child: LExpr


_BINARY = {Add: LAdd, Sub: LSub, Mul: LMul}
_UNBINARY = {LAdd: Add, LSub: Sub, LMul: Mul}


def assign_labels(expr: Expr) -> LExpr:
    """Attach a distinct occurrence index to every transition variable.

    The first occurrence of each variable gets label 1, the next 2, and so
    on; distinct variables each start from 1.
    """
    counters: dict[tuple[str, str], int] = {}

    def walk(node: Expr) -> LExpr:
        if isinstance(node, Const):
            return LConst(node.value)
        if isinstance(node, TransVar):
            key = (node.source, node.target)
            counters[key] = counters.get(key, 0) + 1
            return LVar(node.source, node.target, counters[key])
        if isinstance(node, (Add, Sub, Mul)):
            return _BINARY[type(node)](walk(node.left), walk(node.right))
        if isinstance(node, Inv):
            return LInv(walk(node.child))
        raise SpecValidationError(
            f"{type(node).__name__} node cannot be labeled; only PSEs have labels")

    return walk(expr)


def erase_labels(lexpr: LExpr) -> Expr:
    """Drop the occurrence indices, recovering the original expression."""
    if isinstance(lexpr, LConst):
        return Const(lexpr.value)
    if isinstance(lexpr, LVar):
        return TransVar(lexpr.source, lexpr.target)
    if isinstance(lexpr, (LAdd, LSub, LMul)):
        return _UNBINARY[type(lexpr)](erase_labels(lexpr.left), erase_labels(lexpr.right))
    if isinstance(lexpr, LInv):
        return Inv(erase_labels(lexpr.child))
    raise TypeError(f"unknown labeled node {lexpr!r}")


def labeled_vars(lexpr: LExpr) -> Iterator[LVar]:
    """Labeled variable occurrences in left-to-right order."""
    if isinstance(lexpr, LVar):
        yield lexpr
    elif isinstance(lexpr, (LAdd, LSub, LMul)):
        yield from labeled_vars(lexpr.left)
        yield from labeled_vars(lexpr.right)
    elif isinstance(lexpr, LInv):
        yield from labeled_vars(lexpr.child)


def is_division_free(lexpr: LExpr) -> bool:
    if isinstance(lexpr, LInv):
        return False
    if isinstance(lexpr, (LAdd, LSub, LMul)):
        return is_division_free(lexpr.left) and is_division_free(lexpr.right)
    return True
