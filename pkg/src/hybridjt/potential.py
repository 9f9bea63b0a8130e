"""Potential tables: flat row-major arrays over ascending variable scopes.

The table algebra (marginalize, extend, reduce, multiply, divide) is driven by
:class:`IndexMapping` stride recipes and evaluated by the range kernels in
:mod:`hybridjt._kernels`, the same kernels the inference engine splits into
parallel tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels as K
from .exceptions import InconsistentDivision, ScopeError, ZeroProbabilityEvidence


def row_major_strides(cards: Sequence[int]) -> tuple[int, ...]:
    strides = [1] * len(cards)
    for i in range(len(cards) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    return tuple(strides)


def _i64(xs) -> np.ndarray:
    return np.asarray(xs, dtype=np.int64).reshape(-1)


class PotentialTable:
    """Nonnegative function over the joint states of a variable scope.

    ``scope`` may be given in any order; the table is canonicalized to ascending
    variable ids, with the last scope variable varying fastest in ``values``.

    >>> t = PotentialTable([1, 0], [3, 2], np.arange(6.0))
    >>> t.scope, t.cards, t.values.tolist()
    ((0, 1), (2, 3), [0.0, 2.0, 4.0, 1.0, 3.0, 5.0])
    """

    __slots__ = ("scope", "cards", "strides", "values")

    def __init__(self, scope: Sequence[int], cards: Sequence[int], values=None):
        scope = tuple(int(v) for v in scope)
        cards = tuple(int(c) for c in cards)
        if len(scope) != len(cards):
            raise ScopeError("scope and cards differ in length")
        if len(set(scope)) != len(scope):
            raise ScopeError(f"duplicate variable in scope {scope}")
        if any(c < 1 for c in cards):
            raise ScopeError("cardinalities must be positive")
        size = math.prod(cards)
        if values is None:
            arr = np.ones(size)
        else:
            arr = np.array(values, dtype=np.float64).reshape(-1)
            if arr.size != size:
                raise ScopeError(f"expected {size} values for cards {cards}, got {arr.size}")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError("potential values must be finite and nonnegative")
        order = sorted(range(len(scope)), key=scope.__getitem__)
        if order != list(range(len(scope))):
            arr = np.ascontiguousarray(arr.reshape(cards).transpose(order)).reshape(-1)
            scope = tuple(scope[i] for i in order)
            cards = tuple(cards[i] for i in order)
        arr.setflags(write=False)
        self.scope = scope
        self.cards = cards
        self.strides = row_major_strides(cards)
        self.values = arr

    @classmethod
    def _wrap(cls, scope, cards, arr):
        t = cls.__new__(cls)
        arr.setflags(write=False)
        t.scope, t.cards, t.strides, t.values = scope, cards, row_major_strides(cards), arr
        return t

    @property
    def size(self) -> int:
        return self.values.size

    def card_of(self, var: int) -> int:
        return self.cards[self.scope.index(var)]

    def __repr__(self):
        return f"PotentialTable(scope={self.scope}, cards={self.cards}, values={self.values.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, PotentialTable):
            return NotImplemented
        return (self.scope, self.cards) == (other.scope, other.cards) and np.array_equal(
            self.values, other.values
        )

    __hash__ = None

    def index_of(self, assignment: Mapping[int, int]) -> int:
        if set(assignment) != set(self.scope):
            raise ScopeError(f"assignment covers {sorted(assignment)}, table scope is {list(self.scope)}")
        idx = 0
        for var, card, stride in zip(self.scope, self.cards, self.strides):
            s = assignment[var]
            if not 0 <= s < card:
                raise IndexError(f"state {s} out of range for variable {var} (cardinality {card})")
            idx += s * stride
        return idx

    def assignment_of(self, index: int) -> dict[int, int]:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} out of range for table of size {self.size}")
        return {var: (index // stride) % card for var, card, stride in zip(self.scope, self.cards, self.strides)}

    def marginalize(self, keep) -> "PotentialTable":
        keep = set(keep)
        if not keep <= set(self.scope):
            raise ScopeError(f"cannot keep {sorted(keep - set(self.scope))}: not in scope {self.scope}")
        m = build_index_mapping(self, sorted(keep))
        out = np.empty(math.prod(m.dst_cards))
        K.marg_range(self.values, 0, out, 0, m.kept_cards, m.kept_strides,
                     m.summed_cards, m.summed_strides, 0, out.size)
        return PotentialTable._wrap(m.dst_scope, m.dst_cards, out)

    def extend(self, scope: Sequence[int], cards: Sequence[int]) -> "PotentialTable":
        """Replicate this table over a superset scope."""
        target = PotentialTable(scope, cards, np.zeros(math.prod(int(c) for c in cards)))
        for var, card in zip(self.scope, self.cards):
            if var not in target.scope:
                raise ScopeError(f"superscope is missing variable {var}")
            if target.card_of(var) != card:
                raise ScopeError(f"cardinality mismatch for variable {var}")
        m = build_index_mapping(self, target.scope, target.cards)
        out = np.empty(target.size)
        K.extend_range(self.values, 0, out, 0, m.dst_card_array, m.src_strides, 0, out.size)
        return PotentialTable._wrap(target.scope, target.cards, out)

    def reduce(self, evidence: Mapping[int, int]) -> "PotentialTable":
        """Zero the entries that disagree with ``evidence``; other variables are ignored."""
        strides, cards, states = [], [], []
        for var, state in sorted(evidence.items()):
            if var in self.scope:
                i = self.scope.index(var)
                if not 0 <= state < self.cards[i]:
                    raise IndexError(f"evidence state {state} out of range for variable {var}")
                strides.append(self.strides[i])
                cards.append(self.cards[i])
                states.append(state)
        out = self.values.copy()
        if states:
            K.reduce_range(out, 0, _i64(strides), _i64(cards), _i64(states), 0, out.size)
        return PotentialTable._wrap(self.scope, self.cards, out)

    def multiply_in(self, factor: "PotentialTable") -> "PotentialTable":
        """Pointwise product with a factor whose scope is a subset of this one."""
        if not set(factor.scope) <= set(self.scope):
            raise ScopeError(f"factor scope {factor.scope} is not a subset of {self.scope}")
        m = build_index_mapping(factor, self.scope, self.cards)
        out = self.values.copy()
        K.multiply_range(out, 0, factor.values, 0, m.dst_card_array, m.src_strides, 0, out.size)
        return PotentialTable._wrap(self.scope, self.cards, out)

    def divide(self, denom: "PotentialTable") -> "PotentialTable":
        """Pointwise quotient with 0/0 = 0. A positive entry over zero raises."""
        if (self.scope, self.cards) != (denom.scope, denom.cards):
            raise ScopeError("divide needs tables of identical scope and shape")
        out = np.empty(self.size)
        code = K.divide_range(self.values, 0, denom.values, 0, out, 0, 0, out.size)
        if code != K.OK:
            raise InconsistentDivision("positive entry divided by zero")
        return PotentialTable._wrap(self.scope, self.cards, out)

    def normalize(self) -> "PotentialTable":
        total = self.values.sum()
        if not total > 0:
            raise ZeroProbabilityEvidence("cannot normalize an all-zero table")
        return PotentialTable._wrap(self.scope, self.cards, self.values / total)


@dataclass(frozen=True)
class IndexMapping:
    """Stride recipe relating a source table to a destination scope.

    For marginalization each destination entry sums the source entries
    ``base(d) + sum_j s_j * summed_strides[j]``; for extension each destination
    entry reads one source entry at ``sum_j digit_j * src_strides[j]``.
    """

    kind: str  # "identity" | "marginalize" | "extend"
    src_scope: tuple
    src_cards: tuple
    dst_scope: tuple
    dst_cards: tuple
    kept_cards: np.ndarray
    kept_strides: np.ndarray
    summed_cards: np.ndarray
    summed_strides: np.ndarray
    src_strides: np.ndarray  # per destination variable; 0 where absent from the source

    @property
    def dst_card_array(self) -> np.ndarray:
        return _i64(self.dst_cards)

    def sources(self, d: int) -> list[int]:
        """Source indices feeding destination entry ``d``, in summation order."""
        digits = []
        rem = d
        for c in reversed(self.dst_cards):
            digits.append(rem % c)
            rem //= c
        digits.reverse()
        if self.kind == "extend":
            return [int(sum(x * s for x, s in zip(digits, self.src_strides)))]
        base = int(sum(x * s for x, s in zip(digits, self.kept_strides)))
        out = []
        for flat in range(math.prod(int(c) for c in self.summed_cards)):
            off, rem = 0, flat
            for c, s in zip(reversed(self.summed_cards), reversed(self.summed_strides)):
                off += (rem % c) * s
                rem //= c
            out.append(base + int(off))
        return out


def build_index_mapping(src: PotentialTable, dst_scope, dst_cards=None) -> IndexMapping:
    """Recipe from ``src`` to a subset scope (marginalize) or superset scope (extend)."""
    dst_scope = tuple(sorted(int(v) for v in dst_scope))
    src_set, dst_set = set(src.scope), set(dst_scope)
    if dst_set <= src_set:
        dst_cards = tuple(src.card_of(v) for v in dst_scope)
        summed = [i for i, v in enumerate(src.scope) if v not in dst_set]
        kind = "identity" if dst_set == src_set else "marginalize"
        kept_strides = [src.strides[src.scope.index(v)] for v in dst_scope]
        return IndexMapping(
            kind, src.scope, src.cards, dst_scope, dst_cards,
            _i64(dst_cards), _i64(kept_strides),
            _i64([src.cards[i] for i in summed]), _i64([src.strides[i] for i in summed]),
            _i64(kept_strides),
        )
    if src_set <= dst_set:
        if dst_cards is None:
            raise ScopeError("extending needs the cardinalities of the destination scope")
        dst_cards = tuple(int(c) for c in dst_cards)
        src_strides = [src.strides[src.scope.index(v)] if v in src_set else 0 for v in dst_scope]
        empty = _i64([])
        return IndexMapping(
            "extend", src.scope, src.cards, dst_scope, dst_cards,
            empty, empty, empty, empty, _i64(src_strides),
        )
    raise ScopeError(f"scopes {src.scope} and {dst_scope} are not related by inclusion")
