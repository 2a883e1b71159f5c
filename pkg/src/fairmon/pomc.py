"""Windowed monitors for partially observed chains.

One atomic monitor per window function keeps a length-n ring buffer and the
running mean of the window evaluations; after warm-up it emits the mean
plus/minus a mixing-time-scaled half-width.  A composite monitor mirrors the
expression tree and folds the atomic verdicts with interval arithmetic,
spending an equal confidence share per atom.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .bounds import ci_pomc_pointwise, ci_pomc_uniform, split_delta
from .errors import ConfigError
from .intervals import Interval
from .speclang.ast import (Add, Atom, Const, Expr, Inv, Mul, SeqProb, Sub,
                           TransVar, count_atoms)
from .speclang.ranges import bse_range

_CI = {"pointwise": ci_pomc_pointwise, "uniform": ci_pomc_uniform}


@dataclass(frozen=True)
class Verdict:
    """Monitor output: an interval with a point estimate, or no claim yet."""

    interval: Optional[Interval]
    point: Optional[float] = None

    @property
    def kind(self) -> str:
        if self.interval is None:
            return "inconclusive"
        if not self.interval.is_bounded:
            return "unbounded"
        return "ok"

    @property
    def is_inconclusive(self) -> bool:
        return self.interval is None


INCONCLUSIVE = Verdict(interval=None, point=None)


class AtomicMonitor:
    """Sliding window, running mean, and concentration half-width for one atom."""

    def __init__(self, fn: Callable, arity: int, low: float, high: float,
                 delta: float, mode: str, tau_mix: float,
                 alphabet: Optional[Sequence[str]] = None):
        if mode not in _CI:
            raise ConfigError(f"mode must be 'pointwise' or 'uniform', got {mode!r}")
        self._fn = fn
        self._n = arity
        self._low = low
        self._high = high
        self._delta = delta
        self._mode = mode
        self._ci = _CI[mode]
        self._tau = tau_mix
        self._alphabet = frozenset(alphabet) if alphabet else None
        self._t = 0
        self._mean = 0.0
        self._window = deque(maxlen=arity)
        self.last_halfwidth: Optional[float] = None

    @property
    def point_estimate(self) -> Optional[float]:
        return self._mean if self._t >= self._n else None

    def next(self, symbol: str) -> Verdict:
        if self._alphabet is not None and symbol not in self._alphabet:
            raise ConfigError(f"symbol {symbol!r} outside the declared alphabet")
        self._t += 1
        t, n = self._t, self._n
        self._window.append(symbol)
        if t < n:
            return INCONCLUSIVE
        x = self._fn(tuple(self._window))
        self._mean = (self._mean * (t - n) + x) / (t - (n - 1))
        eps = self._ci(self._delta, t, n, self._low, self._high, self._tau)
        self.last_halfwidth = eps
        raw = Interval(self._mean - eps, self._mean + eps)
        clipped = raw.intersect(Interval(self._low, self._high))
        return Verdict(interval=clipped, point=self._mean)


class ConstMonitor:
    """Degenerate monitor for a constant leaf: a zero-width verdict from step one."""

    def __init__(self, value: float):
        self._verdict = Verdict(interval=Interval.point(value), point=value)

    def next(self, symbol: str) -> Verdict:
        return self._verdict


class CompositeMonitor:
    """Expression-tree monitor folding atomic verdicts with interval arithmetic.

    Any warmed-up-not-yet child makes the composite inconclusive; division
    through an interval containing zero propagates as an unbounded verdict.
    The folded interval is clipped to the a-priori range of the expression,
    which is sound because the true value certainly lies there.
    """

    def __init__(self, expr: Expr, delta: float, mode: str, tau_mix: float,
                 alphabet: Optional[Sequence[str]] = None,
                 intersect_verdicts: bool = False):
        self._expr = expr
        self._range = bse_range(expr)
        self._leaves: List = []
        k = count_atoms(expr)
        if k > 0:
            budget = split_delta(delta, expr)
            shares = budget.shares()
        else:
            shares = []
        pos = 0

        def build(node: Expr):
            nonlocal pos
            if isinstance(node, Const):
                self._leaves.append(ConstMonitor(node.value))
                return
            if isinstance(node, Atom):
                ref = node.ref
                self._leaves.append(AtomicMonitor(
                    ref.evaluate, ref.arity, ref.low, ref.high,
                    shares[pos], mode, tau_mix, alphabet))
                pos += 1
                return
            if isinstance(node, SeqProb):
                self._leaves.append(AtomicMonitor(
                    node.indicator, node.arity, 0.0, 1.0,
                    shares[pos], mode, tau_mix, alphabet))
                pos += 1
                return
            if isinstance(node, TransVar):
                raise ConfigError("transition variables need the fully-observed engine")
            if isinstance(node, (Add, Sub, Mul)):
                build(node.left)
                build(node.right)
                return
            if isinstance(node, Inv):
                build(node.child)
                return
            raise ConfigError(f"unknown node {node!r}")

        build(expr)
        self._intersect = intersect_verdicts
        self._running: Optional[Interval] = None

    @property
    def expression_range(self) -> Interval:
        return self._range

    def next(self, symbol: str) -> Verdict:
        verdicts = [m.next(symbol) for m in self._leaves]
        if any(v.is_inconclusive for v in verdicts):
            return INCONCLUSIVE
        it = iter(verdicts)
        interval, point = self._fold(self._expr, it)
        clipped = interval.intersect(self._range)
        if self._intersect:
            self._running = clipped if self._running is None else self._running.intersect(clipped)
            clipped = self._running
        return Verdict(interval=clipped, point=point)

    def _fold(self, node: Expr, it) -> Tuple[Interval, Optional[float]]:
        if isinstance(node, (Const, Atom, SeqProb)):
            v = next(it)
            return v.interval, v.point
        if isinstance(node, Add):
            li, lp = self._fold(node.left, it)
            ri, rp = self._fold(node.right, it)
            return li + ri, _pt(lp, rp, lambda a, b: a + b)
        if isinstance(node, Sub):
            li, lp = self._fold(node.left, it)
            ri, rp = self._fold(node.right, it)
            return li - ri, _pt(lp, rp, lambda a, b: a - b)
        if isinstance(node, Mul):
            li, lp = self._fold(node.left, it)
            ri, rp = self._fold(node.right, it)
            return li * ri, _pt(lp, rp, lambda a, b: a * b)
        if isinstance(node, Inv):
            ci, cp = self._fold(node.child, it)
            inv_p = None if cp is None or cp == 0.0 else 1.0 / cp
            return ci.inverse(), inv_p
        raise ConfigError(f"unknown node {node!r}")


def _pt(a: Optional[float], b: Optional[float], op) -> Optional[float]:
    if a is None or b is None:
        return None
    v = op(a, b)
    return v if math.isfinite(v) else None


def build_pomc_monitor(expr: Expr, delta: float, mode: str, tau_mix: float,
                       alphabet: Optional[Sequence[str]] = None,
                       intersect_verdicts: bool = False) -> CompositeMonitor:
    return CompositeMonitor(expr, delta, mode, tau_mix, alphabet, intersect_verdicts)
