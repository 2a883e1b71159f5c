"""Finite Markov chains with full or partial observation.

Provides model validation, stream simulation, the stationary distribution,
numerical mixing-time bounds, and exact model-based evaluation of
specifications, which serves as the ground-truth oracle for the monitors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EvaluationError, ModelError
from .speclang.ast import (Add, Atom, Const, Expr, Inv, Mul, SeqProb, Sub,
                           TransVar)

_ROW_TOL = 1e-9
_FIXPOINT_TOL = 1e-10


@dataclass(frozen=True)
class ObservationModel:
    """A finite chain with a total labeling of states by observation symbols.

    ``transitions`` is row stochastic: entry (i, j) is the probability of
    moving from state i to state j.  When the labeling is a bijection the
    model is fully observed and transition variables are meaningful.
    """

    states: Tuple[str, ...]
    transitions: np.ndarray
    initial: np.ndarray
    labels: Dict[str, str]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.transitions, dtype=float)
        lam = np.asarray(self.initial, dtype=float)
        k = len(self.states)
        if len(set(self.states)) != k or k == 0:
            raise ModelError("states must be non-empty and distinct")
        if m.shape != (k, k):
            raise ModelError(f"transition matrix must be {k}x{k}, got {m.shape}")
        if np.any(m < -1e-15) or np.any(m > 1.0 + 1e-12):
            raise ModelError("transition entries must lie in [0, 1]")
        rows = m.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > _ROW_TOL):
            bad = int(np.argmax(np.abs(rows - 1.0)))
            raise ModelError(f"row {self.states[bad]!r} sums to {rows[bad]!r}, not 1")
        if lam.shape != (k,):
            raise ModelError("initial distribution has the wrong length")
        if np.any(lam < -1e-15) or abs(lam.sum() - 1.0) > _ROW_TOL:
            raise ModelError("initial distribution must be a probability vector")
        missing = [s for s in self.states if s not in self.labels]
        if missing:
            raise ModelError(f"labeling is not total; missing {missing}")
        object.__setattr__(self, "transitions", m)
        object.__setattr__(self, "initial", lam)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def is_fully_observed(self) -> bool:
        values = list(self.labels.values())
        return len(set(values)) == len(values)

    @property
    def alphabet(self) -> Tuple[str, ...]:
        seen = []
        for s in self.states:
            o = self.labels[s]
            if o not in seen:
                seen.append(o)
        return tuple(seen)

    def state_index(self, state: str) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise ModelError(f"unknown state {state!r}") from None

    def label_codes(self, alphabet: Optional[Sequence[str]] = None) -> np.ndarray:
        """Observation index of each state under the given alphabet order."""
        alpha = list(alphabet) if alphabet is not None else list(self.alphabet)
        code = {o: i for i, o in enumerate(alpha)}
        return np.array([code[self.labels[s]] for s in self.states], dtype=np.int64)

    def is_irreducible(self) -> bool:
        graph = csr_matrix(self.transitions > 0)
        n, _ = connected_components(graph, directed=True, connection="strong")
        return n == 1

    def period(self) -> int:
        """gcd of cycle lengths; 1 means aperiodic.  Requires irreducibility."""
        if not self.is_irreducible():
            raise ModelError("period is defined for irreducible chains only")
        k = self.n_states
        level = [-1] * k
        level[0] = 0
        queue = [0]
        g = 0
        adj = [np.nonzero(self.transitions[i] > 0)[0] for i in range(k)]
        while queue:
            u = queue.pop()
            for v in adj[u]:
                v = int(v)
                if level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
                else:
                    g = math.gcd(g, level[u] + 1 - level[v])
        return abs(g) if g else 0

    def to_json(self) -> str:
        return json.dumps({
            "states": list(self.states),
            "transitions": self.transitions.tolist(),
            "initial": self.initial.tolist(),
            "labels": dict(self.labels),
        }, indent=2)

    @staticmethod
    def from_json(text: str) -> "ObservationModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model file is not valid JSON: {exc}") from None
        for key in ("states", "transitions", "initial", "labels"):
            if key not in data:
                raise ModelError(f"model file is missing {key!r}")
        return ObservationModel(
            states=tuple(str(s) for s in data["states"]),
            transitions=np.asarray(data["transitions"], dtype=float),
            initial=np.asarray(data["initial"], dtype=float),
            labels={str(k): str(v) for k, v in data["labels"].items()},
        )


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    residual: float


@dataclass(frozen=True)
class MixingBound:
    tau_mix: float

    def __post_init__(self):
        if self.tau_mix < 1.0:
            raise ModelError("mixing-time bound must be at least one step")


def stationary_distribution(model: ObservationModel) -> StationaryDistribution:
    """Solve pi M = pi, sum(pi) = 1 by a direct linear solve.

    Falls back to the null space of (M^T - I) when the least-squares route
    is not accurate enough.  Raises for reducible chains, which have no
    unique fixpoint.
    """
    if not model.is_irreducible():
        raise ModelError("stationary distribution needs an irreducible chain")
    m = model.transitions
    k = model.n_states
    a = np.vstack([m.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = float(np.abs(pi @ m - pi).sum())
    if residual > _FIXPOINT_TOL:
        from scipy.linalg import null_space
        ns = null_space(m.T - np.eye(k))
        if ns.shape[1] >= 1:
            cand = np.abs(ns[:, 0])
            cand /= cand.sum()
            r2 = float(np.abs(cand @ m - cand).sum())
            if r2 < residual:
                pi, residual = cand, r2
    if residual > _FIXPOINT_TOL:
        raise ModelError(f"stationary fixpoint residual {residual:.2e} above tolerance")
    return StationaryDistribution(pi=pi, residual=residual)


def mixing_time_bound(model: ObservationModel, tv_threshold: float = 0.25,
                      max_steps: int = 100_000) -> MixingBound:
    """Smallest t with worst-case total-variation distance to pi <= threshold.

    Computed by powering the transition matrix; a valid input for the
    partially-observed confidence bounds.  Requires irreducibility and
    aperiodicity, otherwise the distance never settles.
    """
    if model.n_states > 10_000:
        raise ModelError("matrix powering is limited to 10^4 states")
    if not model.is_irreducible():
        raise ModelError("mixing time needs an irreducible chain")
    if model.period() != 1:
        raise ModelError(f"chain is periodic (period {model.period()}); no finite mixing time")
    pi = stationary_distribution(model).pi
    m = model.transitions
    dist = m.copy()
    for t in range(1, max_steps + 1):
        tv = 0.5 * float(np.abs(dist - pi).sum(axis=1).max())
        if tv <= tv_threshold:
            return MixingBound(tau_mix=float(max(t, 1)))
        dist = dist @ m
    raise ModelError(f"total-variation distance did not reach {tv_threshold} "
                     f"within {max_steps} steps")


def _start_distribution(model: ObservationModel, start: str) -> np.ndarray:
    if start == "initial":
        return model.initial
    if start == "stationary":
        return stationary_distribution(model).pi
    raise ModelError(f"unknown start mode {start!r} (use 'initial' or 'stationary')")


def simulate(model: ObservationModel, steps: int, seed: int,
             start: str = "initial") -> Iterator[str]:
    """Lazily yield the observation sequence of one sampled trajectory."""
    p0 = _start_distribution(model, start)
    rng = np.random.default_rng(seed)
    cum = np.cumsum(model.transitions, axis=1)
    cum0 = np.cumsum(p0)
    labels = [model.labels[s] for s in model.states]
    last = model.n_states - 1
    s = min(int(np.searchsorted(cum0, rng.random(), side="right")), last)
    for _ in range(steps):
        yield labels[s]
        s = min(int(np.searchsorted(cum[s], rng.random(), side="right")), last)


def simulate_states(model: ObservationModel, steps: int, runs: int, seed: int,
                    start: str = "initial") -> np.ndarray:
    """State-index trajectories for several runs at once, shape (runs, steps)."""
    p0 = _start_distribution(model, start)
    rng = np.random.default_rng(seed)
    cum = np.cumsum(model.transitions, axis=1)
    out = np.empty((runs, steps), dtype=np.int64)
    s = np.searchsorted(np.cumsum(p0), rng.random(runs), side="right")
    np.clip(s, 0, model.n_states - 1, out=s)
    for t in range(steps):
        out[:, t] = s
        u = rng.random(runs)
        s = (cum[s] <= u[:, None]).sum(axis=1)
        np.clip(s, 0, model.n_states - 1, out=s)
    return out


def truth_value_pse(model: ObservationModel, expr: Expr) -> float:
    """Exact value of a PSE: each transition variable is a matrix entry."""
    if not model.is_fully_observed:
        raise ModelError("PSE evaluation needs a fully observed chain")
    if not model.is_irreducible():
        raise ModelError("PSE evaluation needs an irreducible chain")
    obs_to_state = {model.labels[s]: s for s in model.states}

    def walk(node: Expr) -> float:
        if isinstance(node, Const):
            return node.value
        if isinstance(node, TransVar):
            for name in (node.source, node.target):
                if name not in obs_to_state:
                    raise EvaluationError(f"unknown state {name!r} in transition variable")
            i = model.state_index(obs_to_state[node.source])
            j = model.state_index(obs_to_state[node.target])
            return float(model.transitions[i, j])
        if isinstance(node, Add):
            return walk(node.left) + walk(node.right)
        if isinstance(node, Sub):
            return walk(node.left) - walk(node.right)
        if isinstance(node, Mul):
            return walk(node.left) * walk(node.right)
        if isinstance(node, Inv):
            v = walk(node.child)
            if v == 0.0:
                raise EvaluationError("division by zero in model-based evaluation")
            return 1.0 / v
        raise EvaluationError(f"{type(node).__name__} node is not part of a PSE")

    return walk(expr)


def _atom_expectation(model: ObservationModel, fn, arity: int,
                      pi: np.ndarray) -> float:
    """Stationary expectation of an arity-n window function, exactly.

    Enumerates observation words of length n; the probability of each word
    is accumulated by masked vector-matrix products, so the cost is
    |O|^n * n matvecs.
    """
    alphabet = model.alphabet
    masks = {o: np.array([model.labels[s] == o for s in model.states], dtype=float)
             for o in alphabet}
    m = model.transitions
    total = 0.0

    def rec(word, vec):
        nonlocal total
        if len(word) == arity:
            p = float(vec.sum())
            if p > 0.0:
                total += p * fn(tuple(word))
            return
        nxt = vec @ m
        for o in alphabet:
            rec(word + [o], nxt * masks[o])

    for o in alphabet:
        rec([o], pi * masks[o])
    return total


def truth_value_bse(model: ObservationModel, expr: Expr,
                    window_cap: int = 6) -> float:
    """Exact model-based value of a windowed expression.

    Every atom is replaced by its exact stationary expectation and the
    arithmetic is applied to the resulting reals.  Atom arities above
    ``window_cap`` are rejected: the enumeration is |O|^n.
    """
    if not model.is_irreducible():
        raise ModelError("model-based evaluation needs an irreducible chain")
    pi = stationary_distribution(model).pi
    n_obs = len(model.alphabet)

    def atom_value(fn, arity: int) -> float:
        if arity > window_cap:
            raise EvaluationError(
                f"atom arity {arity} exceeds the exact-oracle window cap {window_cap}")
        if n_obs ** arity > 2_000_000:
            raise EvaluationError("observation-word enumeration too large")
        return _atom_expectation(model, fn, arity, pi)

    def walk(node: Expr) -> float:
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Atom):
            return atom_value(node.ref.evaluate, node.ref.arity)
        if isinstance(node, SeqProb):
            return atom_value(node.indicator, node.arity)
        if isinstance(node, Add):
            return walk(node.left) + walk(node.right)
        if isinstance(node, Sub):
            return walk(node.left) - walk(node.right)
        if isinstance(node, Mul):
            return walk(node.left) * walk(node.right)
        if isinstance(node, Inv):
            v = walk(node.child)
            if v == 0.0:
                raise EvaluationError("division by zero in model-based evaluation")
            return 1.0 / v
        if isinstance(node, TransVar):
            raise EvaluationError(
                "transition variables are evaluated with the fully-observed oracle")
        raise EvaluationError(f"unknown node {node!r}")

    return walk(expr)


def truth_value(model: ObservationModel, expr: Expr, window_cap: int = 6) -> float:
    """Dispatch to the transition-entry oracle for PSEs, else the windowed one."""
    from .speclang.ast import is_pse, leaves
    if is_pse(expr) and any(isinstance(leaf, TransVar) for leaf in leaves(expr)):
        return truth_value_pse(model, expr)
    return truth_value_bse(model, expr, window_cap)
