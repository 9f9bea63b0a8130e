"""Discrete Bayesian networks: variables, CPTs, validation and evidence sampling."""

from __future__ import annotations

import heapq
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .exceptions import CycleError, NetworkError

ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    states: tuple[str, ...]

    @property
    def card(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class Cpt:
    """P(child | parents) stored as consecutive rows of length card(child).

    Rows enumerate parent configurations with the last listed parent varying fastest.
    """

    child: int
    parents: tuple[int, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probabilities, dtype=np.float64).ravel()
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "parents", tuple(int(p) for p in self.parents))

    @property
    def family(self) -> tuple[int, ...]:
        return self.parents + (self.child,)

    def __eq__(self, other):
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.child == other.child
            and self.parents == other.parents
            and np.array_equal(self.probabilities, other.probabilities)
        )

    __hash__ = None


@dataclass(frozen=True)
class Violation:
    variable: int
    reason: str


class Evidence(Mapping):
    """Immutable map from variable id to observed state index."""

    def __init__(self, assignments: Mapping[int, int] | None = None):
        self._data = {int(k): int(v) for k, v in (assignments or {}).items()}

    def __getitem__(self, var):
        return self._data[var]

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._data))

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return f"Evidence({dict(sorted(self._data.items()))})"

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return dict(self.items()) == dict(other.items())
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self._data.items())))

    def check(self, net: "BayesianNetwork") -> None:
        for var, state in self._data.items():
            if not 0 <= var < net.n_vars:
                raise ValueError(f"evidence names unknown variable id {var}")
            if not 0 <= state < net.variables[var].card:
                raise ValueError(
                    f"evidence state {state} out of range for variable "
                    f"{net.variables[var].name!r} (cardinality {net.variables[var].card})"
                )


def as_evidence(evidence) -> Evidence:
    if isinstance(evidence, Evidence):
        return evidence
    return Evidence(evidence or {})


@dataclass(frozen=True)
class BayesianNetwork:
    variables: tuple[Variable, ...]
    cpts: tuple[Cpt, ...]
    name: str = "unknown"
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cpts", tuple(self.cpts))
        object.__setattr__(self, "_index", {v.name: v.id for v in self.variables})

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.card for v in self.variables)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, cpt.child) for cpt in self.cpts for p in cpt.parents]

    def var_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def cpt_of(self, var: int) -> Cpt:
        cpt = self.cpts[var]
        if cpt.child != var:
            for c in self.cpts:
                if c.child == var:
                    return c
            raise KeyError(var)
        return cpt

    def cpt_array(self, var: int) -> np.ndarray:
        """CPT of ``var`` as an array with axes (parents..., child)."""
        cpt = self.cpt_of(var)
        shape = tuple(self.variables[p].card for p in cpt.parents) + (self.variables[var].card,)
        return cpt.probabilities.reshape(shape)


def validate(net: BayesianNetwork) -> list[Violation]:
    """Return every invariant violation found in ``net``; an empty list means valid."""
    out: list[Violation] = []
    n = net.n_vars
    parent_vars = set()
    for i, var in enumerate(net.variables):
        if var.id != i:
            out.append(Violation(i, f"variable id {var.id} does not match position {i}"))
        if len(set(var.states)) != len(var.states):
            out.append(Violation(i, "duplicate state names"))
        if var.card < 1:
            out.append(Violation(i, "variable has no states"))

    seen_children: dict[int, int] = {}
    for cpt in net.cpts:
        if not 0 <= cpt.child < n:
            out.append(Violation(cpt.child, "CPT child is not a valid variable id"))
            continue
        seen_children[cpt.child] = seen_children.get(cpt.child, 0) + 1
        bad_parent = False
        for p in cpt.parents:
            if not 0 <= p < n:
                out.append(Violation(cpt.child, f"CPT parent {p} is not a valid variable id"))
                bad_parent = True
        if bad_parent:
            continue
        if len(set(cpt.parents)) != len(cpt.parents):
            out.append(Violation(cpt.child, "duplicate parent in CPT"))
        parent_vars.update(cpt.parents)
        child_card = net.variables[cpt.child].card
        n_rows = math.prod(net.variables[p].card for p in cpt.parents)
        probs = cpt.probabilities
        if probs.size != n_rows * child_card:
            out.append(
                Violation(cpt.child, f"CPT has {probs.size} entries, expected {n_rows * child_card}")
            )
            continue
        if not np.all(np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            out.append(Violation(cpt.child, "CPT entry outside [0, 1]"))
        if child_card:
            sums = probs.reshape(n_rows, child_card).sum(axis=1)
            for row in np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL):
                out.append(Violation(cpt.child, f"CPT row {row} sums to {sums[row]!r}"))

    for v in parent_vars:
        if net.variables[v].card < 2:
            out.append(Violation(v, "parent variable has fewer than 2 states"))
    for i in range(n):
        count = seen_children.get(i, 0)
        if count != 1:
            out.append(Violation(i, f"variable has {count} CPTs, expected exactly 1"))

    if not any("valid variable id" in v.reason for v in out):
        try:
            topological_order(net)
        except CycleError as exc:
            out.extend(exc.violations)
    return out


def check_network(net: BayesianNetwork) -> BayesianNetwork:
    violations = validate(net)
    if violations:
        first = violations[0]
        name = net.variables[first.variable].name if 0 <= first.variable < net.n_vars else first.variable
        cls = CycleError if any(v.reason.startswith("cycle") for v in violations) else NetworkError
        raise cls(f"invalid network: {name}: {first.reason} ({len(violations)} violation(s))", violations)
    return net


def normalize_rows(net: BayesianNetwork, tol: float = 1e-12) -> BayesianNetwork:
    """Rescale CPT rows whose sum is off 1 by more than ``tol``.

    Published files round their probabilities, so accepted rows may sum to
    1 +- 1e-6. Rescaling makes the product of the CPTs a normalized joint.
    Rows already within ``tol`` are left bit-for-bit alone.
    """
    cpts = []
    changed = False
    for cpt in net.cpts:
        rows = cpt.probabilities.reshape(-1, net.cards[cpt.child])
        sums = rows.sum(axis=1)
        fix = (np.abs(sums - 1.0) > tol) & (sums > 0)
        if fix.any():
            rows = rows.copy()
            rows[fix] /= sums[fix, None]
            cpt = Cpt(cpt.child, cpt.parents, rows.reshape(-1))
            changed = True
        cpts.append(cpt)
    return replace(net, cpts=tuple(cpts)) if changed else net


def topological_order(net: BayesianNetwork) -> list[int]:
    """Parents before children; among ready variables the smallest id goes first."""
    n = net.n_vars
    indegree = [0] * n
    children: list[list[int]] = [[] for _ in range(n)]
    for parent, child in net.edges:
        indegree[child] += 1
        children[parent].append(child)
    ready = [v for v in range(n) if indegree[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != n:
        stuck = min(v for v in range(n) if indegree[v] > 0)
        raise CycleError(
            f"cycle detected through variable {net.variables[stuck].name!r}",
            [Violation(stuck, "cycle in parent relation")],
        )
    return order


def row_index(net: BayesianNetwork, cpt: Cpt, assignment: Sequence[int]) -> int:
    idx = 0
    for p in cpt.parents:
        idx = idx * net.variables[p].card + assignment[p]
    return idx


def forward_sample(net: BayesianNetwork, rng: np.random.Generator, order=None) -> list[int]:
    """Draw one full assignment by ancestral sampling."""
    order = topological_order(net) if order is None else order
    assignment = [0] * net.n_vars
    for v in order:
        cpt = net.cpt_of(v)
        card = net.variables[v].card
        r = row_index(net, cpt, assignment)
        row = cpt.probabilities[r * card:(r + 1) * card]
        cum = np.cumsum(row)
        state = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        assignment[v] = min(state, card - 1)
    return assignment


def n_observed(n_vars: int, ratio: float) -> int:
    return math.floor(Fraction(str(ratio)) * n_vars)


def sample_evidence(net: BayesianNetwork, ratio: float, seed) -> Evidence:
    """Observe ``floor(ratio * n)`` distinct variables at jointly sampled states.

    Uses numpy's PCG64 generator seeded with ``seed``. Observed variables are
    chosen uniformly without replacement; their states come from one ancestral
    sample so the evidence always has positive probability.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must lie in [0, 1], got {ratio}")
    rng = np.random.default_rng(seed)
    k = n_observed(net.n_vars, ratio)
    chosen = rng.choice(net.n_vars, size=k, replace=False) if k else []
    full = forward_sample(net, rng)
    return Evidence({int(v): full[int(v)] for v in chosen})
