import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ifsflex.errors import EnumerationTooLarge
from ifsflex.shift_space import Word, birkhoff_sum, enumerate_words, periodic_orbit_sums


def W(*s, d=2):
    return Word(tuple(s), d)


def test_enumerate_small():
    assert enumerate_words(2, 1) == [W(1), W(2)]
    assert enumerate_words(2, 2) == [W(1, 1), W(1, 2), W(2, 1), W(2, 2)]
    assert len(enumerate_words(3, 4)) == 81


def test_enumerate_depth_zero_is_empty_word():
    assert enumerate_words(3, 0) == [Word((), 3)]


def test_enumeration_cap():
    with pytest.raises(EnumerationTooLarge):
        enumerate_words(10, 8)
    with pytest.raises(EnumerationTooLarge):
        enumerate_words(2, 5, cap=31)


def test_word_rejects_bad_symbol():
    with pytest.raises(ValueError):
        Word((1, 3), 2)


def test_birkhoff_examples():
    a = (math.log(0.5), math.log(0.25))
    assert birkhoff_sum(a, W(1, 2)) == pytest.approx(math.log(1 / 8), abs=1e-15)
    assert birkhoff_sum((0.0, 0.0), W(2, 1, 1)) == 0.0
    assert birkhoff_sum((1.0, 1.0), W(1, 2, 1, 2, 2)) == 5.0


def test_birkhoff_empty_word():
    with pytest.raises(ValueError, match="Birkhoff sum of empty word undefined"):
        birkhoff_sum((1.0, 2.0), Word((), 2))


def test_periodic_orbit_examples():
    assert periodic_orbit_sums((0.3, 0.7), 1) == {W(1): 0.3, W(2): 0.7}
    assert periodic_orbit_sums((1.0, 2.0), 2) == {W(1): 1.0, W(2): 2.0, W(1, 2): 3.0}
    sums = periodic_orbit_sums((0.0, 0.0), 3)
    assert all(v == 0.0 for v in sums.values())


def test_orbit_count_matches_necklace_formula():
    # primitive necklaces of length n over 2 letters: 2, 1, 2, 3, 6, 9
    sums = periodic_orbit_sums((1.0, 2.0), 6)
    counts = [sum(1 for w in sums if len(w) == n) for n in range(1, 7)]
    assert counts == [2, 1, 2, 3, 6, 9]


words = st.integers(2, 4).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(st.integers(1, d), min_size=1, max_size=8),
                        st.lists(st.integers(1, d), min_size=1, max_size=8))
)


@given(words, st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_birkhoff_additive(data, vals):
    d, a, b = data
    v = vals[:d]
    wa, wb = Word(tuple(a), d), Word(tuple(b), d)
    assert birkhoff_sum(v, wa + wb) == pytest.approx(birkhoff_sum(v, wa) + birkhoff_sum(v, wb), abs=1e-12)


@given(st.integers(2, 3), st.integers(1, 5))
def test_enumeration_distinct_and_complete(d, n):
    ws = enumerate_words(d, n)
    assert len(ws) == d**n == len(set(ws))
    assert ws == sorted(ws, key=lambda w: w.symbols)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_orbit_sums_rotation_invariant(vals):
    sums = periodic_orbit_sums(vals, 5)
    for rep, s in sums.items():
        assert rep.canonical_rotation() == rep
        for rot in rep.rotations():
            assert birkhoff_sum(vals, rot) == pytest.approx(s, abs=1e-12)
