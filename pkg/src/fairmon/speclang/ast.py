"""Abstract syntax of quantitative fairness specifications.

An expression is built from real constants, table-defined window atoms,
sequence-probability atoms, transition variables, and the arithmetic
connectives ``+ - *`` and reciprocal.  ``a / b`` is sugar for ``a * (1/b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

from ..errors import SpecValidationError

Word = Tuple[str, ...]

WILDCARD = "_"


@dataclass(frozen=True)
class AtomDef:
    """A bounded window function defined by a first-match-wins pattern table.

    Patterns are length-``arity`` tuples of symbols, ``_`` matching anything.
    Every table value and the default must lie in ``[low, high]``.
    """

    name: str
    arity: int
    low: float
    high: float
    rules: Tuple[Tuple[Word, float], ...]
    default: float

    def __post_init__(self):
        if self.arity < 1:
            raise SpecValidationError(f"atom {self.name}: arity must be positive")
        if self.low > self.high:
            raise SpecValidationError(f"atom {self.name}: range [{self.low},{self.high}] is empty")
        for pattern, value in self.rules:
            if len(pattern) != self.arity:
                raise SpecValidationError(
                    f"atom {self.name}: pattern {' '.join(pattern)} has length "
                    f"{len(pattern)}, expected {self.arity}")
            if not self.low <= value <= self.high:
                raise SpecValidationError(f"atom {self.name}: value {value} outside range")
        if not self.low <= self.default <= self.high:
            raise SpecValidationError(f"atom {self.name}: default {self.default} outside range")

    def evaluate(self, window) -> float:
        for pattern, value in self.rules:
            if all(p == WILDCARD or p == w for p, w in zip(pattern, window)):
                return value
        return self.default


class Expr:
    """Base class for expression nodes; subclasses are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Atom(Expr):
    ref: AtomDef


@dataclass(frozen=True)
class SeqProb(Expr):
    """Long-run probability of seeing a word from ``words`` (prefix-extended)."""

    words: Tuple[Word, ...]

    def __post_init__(self):
        if not self.words or any(len(w) == 0 for w in self.words):
            raise SpecValidationError("sequence probability needs non-empty words")

    @property
    def arity(self) -> int:
        return max(len(w) for w in self.words)

    def indicator(self, window) -> float:
        for w in self.words:
            if all(a == b for a, b in zip(w, window)):
                return 1.0
        return 0.0


@dataclass(frozen=True)
class TransVar(Expr):
    source: str
    target: str


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Inv(Expr):
    child: Expr


_BINARY = {Add: "+", Sub: "-", Mul: "*"}


def leaves(expr: Expr) -> Iterator[Expr]:
    """Atom, SeqProb and TransVar leaves in left-to-right order."""
    if isinstance(expr, (Atom, SeqProb, TransVar)):
        yield expr
    elif isinstance(expr, (Add, Sub, Mul)):
        yield from leaves(expr.left)
        yield from leaves(expr.right)
    elif isinstance(expr, Inv):
        yield from leaves(expr.child)


def count_atoms(expr: Expr) -> int:
    """Number of atomic leaves (constants do not count)."""
    return sum(1 for _ in leaves(expr))


def expression_size(expr: Expr) -> int:
    """Total number of operators, the size measure used for register bounds."""
    if isinstance(expr, (Add, Sub, Mul)):
        return 1 + expression_size(expr.left) + expression_size(expr.right)
    if isinstance(expr, Inv):
        return 1 + expression_size(expr.child)
    return 0


def is_pse(expr: Expr) -> bool:
    """True when the expression only uses constants and transition variables."""
    if isinstance(expr, (Const, TransVar)):
        return True
    if isinstance(expr, (Add, Sub, Mul)):
        return is_pse(expr.left) and is_pse(expr.right)
    if isinstance(expr, Inv):
        return is_pse(expr.child)
    return False


def contains_division(expr: Expr) -> bool:
    """True when some reciprocal applies to a non-constant subexpression."""
    if isinstance(expr, Inv):
        return not isinstance(expr.child, Const) or contains_division(expr.child)
    if isinstance(expr, (Add, Sub, Mul)):
        return contains_division(expr.left) or contains_division(expr.right)
    return False


def max_arity(expr: Expr) -> int:
    n = 0
    for leaf in leaves(expr):
        if isinstance(leaf, Atom):
            n = max(n, leaf.ref.arity)
        elif isinstance(leaf, SeqProb):
            n = max(n, leaf.arity)
        elif isinstance(leaf, TransVar):
            n = max(n, 2)
    return n


def eval_pse(expr: Expr, valuation) -> float:
    """Evaluate a PSE under a ``(source, target) -> value`` valuation."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, TransVar):
        return valuation[(expr.source, expr.target)]
    if isinstance(expr, Add):
        return eval_pse(expr.left, valuation) + eval_pse(expr.right, valuation)
    if isinstance(expr, Sub):
        return eval_pse(expr.left, valuation) - eval_pse(expr.right, valuation)
    if isinstance(expr, Mul):
        return eval_pse(expr.left, valuation) * eval_pse(expr.right, valuation)
    if isinstance(expr, Inv):
        return 1.0 / eval_pse(expr.child, valuation)
    raise SpecValidationError(f"{type(expr).__name__} node is not part of a PSE")


def expand_transition_vars(expr: Expr) -> Expr:
    """Rewrite every transition variable as the ratio of word indicators.

    ``T[q->r]`` becomes ``P[q r] / P[q]``, which has the same long-run value
    on a fully observed chain and lets the windowed monitors handle a PSE.
    """
    if isinstance(expr, TransVar):
        num = SeqProb(((expr.source, expr.target),))
        den = SeqProb(((expr.source,),))
        return Mul(num, Inv(den))
    if isinstance(expr, (Add, Sub, Mul)):
        return type(expr)(expand_transition_vars(expr.left), expand_transition_vars(expr.right))
    if isinstance(expr, Inv):
        return Inv(expand_transition_vars(expr.child))
    return expr


def _fmt_number(v: float) -> str:
    return repr(float(v))


def _fmt_word(word: Word) -> str:
    return " ".join(word)


def _fmt_words(words: Tuple[Word, ...]) -> str:
    return ", ".join(_fmt_word(w) for w in words)


def _precedence(expr: Expr) -> int:
    if isinstance(expr, (Add, Sub)):
        return 1
    if isinstance(expr, (Mul, Inv)):
        return 2
    return 3


def pretty_print(expr: Expr) -> str:
    """Render an expression; ``parse(pretty_print(e))`` is structurally ``e``."""

    def wrap(child: Expr, parent_prec: int, right: bool) -> str:
        text = pretty_print(child)
        prec = _precedence(child)
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({text})"
        return text

    if isinstance(expr, Const):
        return _fmt_number(expr.value)
    if isinstance(expr, Atom):
        return f"F[{expr.ref.name}]"
    if isinstance(expr, SeqProb):
        return f"P[{_fmt_words(expr.words)}]"
    if isinstance(expr, TransVar):
        return f"T[{expr.source}->{expr.target}]"
    if isinstance(expr, Inv):
        return f"1 / {wrap(expr.child, 2, True)}"
    if isinstance(expr, Mul) and isinstance(expr.right, Inv) and expr.left != Const(1.0):
        # a * (1/b) prints as a division; a literal 1 numerator stays explicit
        # so the parser's 1/x -> Inv(x) shortcut cannot change the structure
        return f"{wrap(expr.left, 2, False)} / {wrap(expr.right.child, 2, True)}"
    if isinstance(expr, (Add, Sub, Mul)):
        op = _BINARY[type(expr)]
        prec = _precedence(expr)
        return f"{wrap(expr.left, prec, False)} {op} {wrap(expr.right, prec, True)}"
    raise TypeError(f"unknown node {expr!r}")
