import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noded_schottky.family import NODED_POINT, ParameterPoint, evaluate_word, generators, word_trace_squared
from noded_schottky.moebius import MapKind, classify, compose, projective_distance_to_identity
from noded_schottky.words import (
    LETTERS,
    WordBudgetError,
    enumerate_reduced_words,
    freeness_screen,
    jorgensen_screen,
    word_count,
    word_to_str,
)

DEEP = ParameterPoint(0.9, 0.1)


def brute_force(max_len):
    out = []
    for n in range(max_len + 1):
        for w in itertools.product(LETTERS, repeat=n):
            if all(w[i] != -w[i + 1] for i in range(n - 1)):
                out.append(w)
    return out


def test_enumeration_examples():
    assert list(enumerate_reduced_words(0)) == [()]
    assert len(list(enumerate_reduced_words(1))) == 1 + 6
    words = list(enumerate_reduced_words(3))
    assert len(words) == 187
    assert sorted(words) == sorted(brute_force(3))


def test_enumeration_is_shortlex():
    words = list(enumerate_reduced_words(3))
    key = {x: i for i, x in enumerate(LETTERS)}
    keys = [(len(w), [key[x] for x in w]) for w in words]
    assert keys == sorted(keys)


@pytest.mark.parametrize("n", range(7))
def test_count_formula(n):
    assert word_count(n) == 1 + sum(6 * 5 ** (k - 1) for k in range(1, n + 1))
    assert sum(1 for _ in enumerate_reduced_words(n)) == word_count(n)


def test_budget_guard():
    with pytest.raises(WordBudgetError):
        list(enumerate_reduced_words(10, cap=1000))
    with pytest.raises(ValueError):
        word_count(-1)


def test_word_to_str():
    assert word_to_str(()) == "1"
    assert word_to_str((1, -3)) == "A1 A3^-1"


def test_freeness_screen_deep_interior():
    screen = freeness_screen(generators(DEEP), 6)
    assert screen.words_scanned == word_count(6) - 1
    assert screen.min_distance > 0.1
    assert screen.all_loxodromic


def test_freeness_screen_length_one_matches_direct_classification():
    g = generators(DEEP)
    screen = freeness_screen(g, 1)
    assert screen.words_scanned == 6
    assert screen.all_loxodromic
    for f in g.as_tuple():
        assert classify(f).kind is MapKind.LOXODROMIC


def test_freeness_screen_flags_pinch_words_at_noded_point():
    g = generators(NODED_POINT)
    flagged4 = {f.word for f in freeness_screen(g, 4).non_loxodromic}
    for w in [(1,), (-2,), (-1, 2), (-2, -3, 2, 3), (1, -3, -1, 3)]:
        assert w in flagged4
    assert all(f.kind is MapKind.PARABOLIC for f in freeness_screen(g, 4).non_loxodromic)
    flagged6 = {f.word for f in freeness_screen(g, 6).non_loxodromic}
    assert (-1, 2, -3, -2, 1, 3) in flagged6
    assert (-1, 2, -3, -2, 1, 3) not in flagged4


def test_jorgensen_examples():
    pairs = jorgensen_screen(generators(DEEP), 1)
    assert len(pairs) == 21
    assert not any(p.flagged for p in pairs)
    assert all(p.elementary for p in pairs if p.x == p.y)
    noded = jorgensen_screen(generators(NODED_POINT), 1)
    (a1a3,) = [p for p in noded if p.x == (1,) and p.y == (3,)]
    assert a1a3.value >= 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(LETTERS), min_size=1, max_size=5), st.integers(0, 4))
def test_trace_symmetries(word, shift):
    g = generators(ParameterPoint(0.7, 0.3))
    w = tuple(word)
    rev_inv = tuple(-x for x in reversed(w))
    k = shift % len(w)
    rot = w[k:] + w[:k]
    t, t_inv, t_rot = word_trace_squared(g, [w, rev_inv, rot])
    scale = max(1, abs(t))
    assert abs(t - t_inv) < 1e-9 * scale
    assert abs(t - t_rot) < 1e-9 * scale


def test_evaluate_word_inverse():
    g = generators(DEEP)
    f = evaluate_word(g, (1, -3, 2))
    h = evaluate_word(g, (-2, 3, -1))
    # entries near 1e3 leave about 1e-10 of plain-double rounding
    assert projective_distance_to_identity(compose(f, h)) < 1e-8
