import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridjt import InconsistentDivision, PotentialTable, ScopeError, ZeroProbabilityEvidence, build_index_mapping
from hybridjt.potential import row_major_strides


def table(scope, cards, values):
    return PotentialTable(scope, cards, values)


# naive nested-loop reference operations over {assignment: value} dicts

def as_function(t):
    out = {}
    for states in itertools.product(*(range(c) for c in t.cards)):
        out[tuple(zip(t.scope, states))] = t.values[t.index_of(dict(zip(t.scope, states)))]
    return out


def naive_marginalize(t, keep):
    keep = sorted(keep)
    out = np.zeros(math.prod(t.card_of(v) for v in keep))
    kstrides = row_major_strides([t.card_of(v) for v in keep])
    for i in range(t.size):  # ascending source index
        a = t.assignment_of(i)
        out[sum(a[v] * s for v, s in zip(keep, kstrides))] += t.values[i]
    return out


def naive_extend(t, scope, cards):
    big = PotentialTable(scope, cards)
    out = np.empty(big.size)
    for i in range(big.size):
        a = big.assignment_of(i)
        out[i] = t.values[t.index_of({v: a[v] for v in t.scope})]
    return out


def naive_multiply(t, f):
    out = t.values.copy()
    for i in range(t.size):
        a = t.assignment_of(i)
        out[i] = out[i] * f.values[f.index_of({v: a[v] for v in f.scope})]
    return out


@st.composite
def tables(draw, max_vars=4, max_card=4, zeros=True):
    n = draw(st.integers(0, max_vars))
    scope = draw(st.lists(st.integers(0, 9), min_size=n, max_size=n, unique=True))
    cards = draw(st.lists(st.integers(1, max_card), min_size=n, max_size=n))
    size = math.prod(cards)
    elem = st.one_of(st.just(0.0), st.floats(0, 10)) if zeros else st.floats(0.01, 10)
    vals = draw(st.lists(elem, min_size=size, max_size=size))
    return PotentialTable(scope, cards, vals)


# examples

def test_index_of_examples():
    t = table([0, 1], [2, 3], np.zeros(6))
    assert t.index_of({0: 1, 1: 2}) == 5
    assert t.index_of({0: 0, 1: 0}) == 0
    assert table([], [], [1.0]).index_of({}) == 0


def test_assignment_of_examples():
    assert table([0, 1], [2, 3], np.zeros(6)).assignment_of(5) == {0: 1, 1: 2}
    assert table([0, 1], [2, 3], np.zeros(6)).assignment_of(0) == {0: 0, 1: 0}
    assert table([0, 1, 2], [2, 2, 2], np.zeros(8)).assignment_of(6) == {0: 1, 1: 1, 2: 0}


def test_index_errors():
    t = table([0, 1], [2, 3], np.zeros(6))
    with pytest.raises(IndexError):
        t.index_of({0: 2, 1: 0})
    with pytest.raises(ScopeError):
        t.index_of({0: 1})
    with pytest.raises(IndexError):
        t.assignment_of(6)


def test_marginalize_examples():
    t = table([0, 1], [2, 2], [1, 2, 3, 4])
    assert t.marginalize({0}).values.tolist() == [3, 7]
    assert t.marginalize({0, 1}) == t
    scalar = t.marginalize(set())
    assert scalar.scope == () and scalar.values.tolist() == [10]
    with pytest.raises(ScopeError):
        t.marginalize({2})


def test_extend_examples():
    assert table([0], [2], [3, 5]).extend([0, 1], [2, 2]).values.tolist() == [3, 3, 5, 5]
    t = table([0], [2], [3, 5])
    assert t.extend([0], [2]) == t
    assert table([], [], [2]).extend([0], [2]).values.tolist() == [2, 2]
    with pytest.raises(ScopeError):
        t.extend([1], [2])


def test_reduce_examples():
    t = table([0, 1], [2, 2], [1, 2, 3, 4])
    assert t.reduce({0: 1}).values.tolist() == [0, 0, 3, 4]
    assert t.reduce({5: 1}) == t
    assert np.count_nonzero(t.reduce({0: 1, 1: 0}).values) == 1


def test_multiply_examples():
    t = table([0, 1], [2, 2], [1, 2, 3, 4])
    assert t.multiply_in(table([], [], [1])) == t
    assert t.multiply_in(table([1], [2], [10, 100])).values.tolist() == [10, 200, 30, 400]
    assert t.multiply_in(table([0], [2], [0, 1])).values.tolist() == [0, 0, 3, 4]


def test_divide_examples():
    assert table([0], [2], [2, 4]).divide(table([0], [2], [1, 2])).values.tolist() == [2, 2]
    assert table([0], [2], [0, 3]).divide(table([0], [2], [0, 3])).values.tolist() == [0, 1]
    with pytest.raises(InconsistentDivision):
        table([0], [2], [1, 0]).divide(table([0], [2], [0, 1]))


def test_normalize_examples():
    assert table([0], [2], [3, 7]).normalize().values.tolist() == [0.3, 0.7]
    assert table([], [], [1]).normalize().values.tolist() == [1]
    with pytest.raises(ZeroProbabilityEvidence):
        table([0], [2], [0, 0]).normalize()


def test_index_mapping_examples():
    src = table([0, 1], [2, 2], [1, 2, 3, 4])
    m = build_index_mapping(src, [0])
    assert m.kind == "marginalize"
    assert [m.sources(d) for d in range(2)] == [[0, 1], [2, 3]]
    assert build_index_mapping(src, [0, 1]).kind == "identity"
    m = build_index_mapping(table([1], [2], [5, 6]), [0, 1], [2, 2])
    assert m.kind == "extend"
    assert [m.sources(d) for d in range(4)] == [[d % 2] for d in range(4)]
    with pytest.raises(ScopeError):
        build_index_mapping(src, [0, 2], [2, 2])


def test_invalid_tables():
    with pytest.raises(ScopeError):
        PotentialTable([0, 0], [2, 2])
    with pytest.raises(ScopeError):
        PotentialTable([0], [2], [1, 2, 3])
    with pytest.raises(ValueError):
        PotentialTable([0], [2], [1, -1])
    with pytest.raises(ValueError):
        PotentialTable([0], [2], [1, np.inf])


def test_values_are_read_only():
    t = table([0], [2], [1, 2])
    with pytest.raises(ValueError):
        t.values[0] = 5


def test_canonical_order_transposes_values():
    t = PotentialTable([1, 0], [3, 2], np.arange(6.0))
    assert t.scope == (0, 1)
    assert t.strides == (3, 1)
    assert t.values.tolist() == [0, 2, 4, 1, 3, 5]


# properties

@given(tables())
@settings(max_examples=150, deadline=None)
def test_index_round_trip(t):
    for i in range(t.size):
        assert t.index_of(t.assignment_of(i)) == i


@given(tables(), st.data())
@settings(max_examples=200, deadline=None)
def test_marginalize_matches_naive_exactly(t, data):
    keep = data.draw(st.sets(st.sampled_from(t.scope))) if t.scope else set()
    got = t.marginalize(keep)
    assert np.array_equal(got.values, naive_marginalize(t, keep))
    assert math.isclose(got.values.sum(), t.values.sum(), rel_tol=1e-12, abs_tol=1e-300)


@given(tables(max_vars=3), st.data())
@settings(max_examples=200, deadline=None)
def test_extend_matches_naive_and_marginalizes_back(t, data):
    extra = data.draw(st.lists(st.integers(10, 14), max_size=2, unique=True))
    extra_cards = data.draw(st.lists(st.integers(1, 4), min_size=len(extra), max_size=len(extra)))
    scope = list(t.scope) + extra
    cards = list(t.cards) + extra_cards
    big = t.extend(scope, cards)
    assert np.array_equal(big.values, naive_extend(t, scope, cards))
    back = big.marginalize(t.scope)
    assert np.allclose(back.values, t.values * math.prod(extra_cards), rtol=1e-12, atol=0)


@given(tables(), st.data())
@settings(max_examples=200, deadline=None)
def test_multiply_matches_naive_exactly(t, data):
    sub = data.draw(st.sets(st.sampled_from(t.scope))) if t.scope else set()
    sub = sorted(sub)
    fcards = [t.card_of(v) for v in sub]
    fvals = data.draw(st.lists(st.floats(0, 10), min_size=math.prod(fcards), max_size=math.prod(fcards)))
    f = PotentialTable(sub, fcards, fvals)
    assert np.array_equal(t.multiply_in(f).values, naive_multiply(t, f))


@given(tables(), st.data())
@settings(max_examples=200, deadline=None)
def test_reduce_matches_naive_and_is_idempotent(t, data):
    ev = {}
    for v, c in zip(t.scope, t.cards):
        if data.draw(st.booleans()):
            ev[v] = data.draw(st.integers(0, c - 1))
    once = t.reduce(ev)
    expected = np.array([
        t.values[i] if all(t.assignment_of(i)[v] == s for v, s in ev.items()) else 0.0
        for i in range(t.size)
    ])
    assert np.array_equal(once.values, expected)
    assert np.array_equal(once.reduce(ev).values, once.values)


@given(tables(zeros=True), tables(zeros=True))
@settings(max_examples=100, deadline=None)
def test_divide_follows_zero_convention(a, b):
    vals = np.resize(b.values, a.size)
    b = PotentialTable(a.scope, a.cards, np.where(vals < 1e-3, 0.0, vals))
    if np.any((a.values > 0) & (b.values == 0)):
        with pytest.raises(InconsistentDivision):
            a.divide(b)
        return
    q = a.divide(b).values
    for x, y, z in zip(a.values, b.values, q):
        assert z == (0.0 if y == 0 else x / y)


@given(tables(max_vars=4, max_card=3), st.randoms(use_true_random=False), st.data())
@settings(max_examples=150, deadline=None)
def test_operations_are_scope_order_independent(t, rnd, data):
    # same function, different insertion order
    perm = list(range(len(t.scope)))
    rnd.shuffle(perm)
    arr = t.values.reshape(t.cards).transpose(perm) if t.scope else t.values
    u = PotentialTable([t.scope[i] for i in perm], [t.cards[i] for i in perm], arr.reshape(-1))
    assert u == t
    assert as_function(u) == as_function(t)
    keep = data.draw(st.sets(st.sampled_from(t.scope))) if t.scope else set()
    assert u.marginalize(keep) == t.marginalize(keep)
