"""Reduced words in the free group on A1, A2, A3 and group-level screens."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .family import Word, generator_stack
from .moebius import CLASSIFY_TOL, MapKind, classify_trace_squared

# shortlex letter order
LETTERS = (1, -1, 2, -2, 3, -3)
DEFAULT_WORD_CAP = 5_000_000


class WordBudgetError(RuntimeError):
    pass


def word_count(max_len: int) -> int:
    """Number of reduced words of length at most ``max_len`` (identity included)."""
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    return 1 + sum(6 * 5 ** (n - 1) for n in range(1, max_len + 1))


def _check_budget(max_len: int, cap: int) -> None:
    total = word_count(max_len)
    if total > cap:
        raise WordBudgetError(f"{total} words up to length {max_len} exceed the cap of {cap}")


def enumerate_reduced_words(max_len: int, cap: int = DEFAULT_WORD_CAP) -> Iterator[Word]:
    """Yield every reduced word of length <= ``max_len`` in shortlex order."""
    _check_budget(max_len, cap)
    level: list[Word] = [()]
    yield ()
    for _ in range(max_len):
        nxt = []
        for w in level:
            for x in LETTERS:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        yield from nxt
        level = nxt


def word_to_str(word: Word) -> str:
    if not word:
        return "1"
    return " ".join(f"A{abs(x)}" + ("^-1" if x < 0 else "") for x in word)


def index_word(indices) -> Word:
    """Kernel letter indices back to signed letters."""
    return tuple(LETTERS[int(k)] for k in indices)


@dataclass
class WordLevel:
    """All reduced words of one length with their matrices."""

    length: int
    mats: np.ndarray  # (n, 2, 2) complex
    letters: np.ndarray  # (n, length) int8 kernel indices


def iterate_levels(stack: np.ndarray, max_len: int, first_letter: int | None = None) -> Iterator[WordLevel]:
    """Expand the word tree level by level, optionally inside one first-letter subtree."""
    if max_len < 1:
        return
    if first_letter is None:
        mats = np.eye(2, dtype=complex)[None]
        last = np.array([-1], dtype=np.int8)
        letters = np.zeros((1, 0), dtype=np.int8)
        mats, last_l, parent = _kernels.expand_level(mats, last, stack)
        letters = last_l[:, None].astype(np.int8)
    else:
        mats = stack[first_letter][None].copy()
        letters = np.array([[first_letter]], dtype=np.int8)
    yield WordLevel(1, mats, letters)
    for n in range(2, max_len + 1):
        mats, new, parent = _kernels.expand_level(mats, letters[:, -1], stack)
        letters = np.concatenate([letters[parent], new[:, None]], axis=1)
        yield WordLevel(n, mats, letters)


@dataclass(frozen=True)
class FlaggedWord:
    word: Word
    kind: MapKind
    trace_squared: complex


@dataclass(frozen=True)
class FreenessScreen:
    min_distance: float
    argmin_word: Word
    non_loxodromic: tuple[FlaggedWord, ...]
    words_scanned: int

    @property
    def all_loxodromic(self) -> bool:
        return not self.non_loxodromic


def freeness_screen(gens, max_len: int, tol: float = CLASSIFY_TOL,
                    cap: int = DEFAULT_WORD_CAP) -> FreenessScreen:
    """Scan nontrivial reduced words up to ``max_len``.

    Reports the smallest projective distance to the identity (a relation in
    the group would drive it to zero) and every word that is not
    loxodromic. This is screening evidence, not a proof of freeness.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    _check_budget(max_len, cap)
    stack = generator_stack(gens)
    best, best_word, scanned = np.inf, (), 0
    flagged: list[FlaggedWord] = []
    for level in iterate_levels(stack, max_len):
        _, dist = _kernels.trace_stats(level.mats)
        lengths = np.full(len(level.mats), level.length, dtype=np.int64)
        t2 = _kernels.word_trace_squared_dd(stack, level.letters, lengths)
        scanned += len(dist)
        i = int(np.argmin(dist))
        if dist[i] < best:
            best, best_word = float(dist[i]), index_word(level.letters[i])
        suspicious = (np.abs(t2 - 4) < tol) | (
            (np.abs(t2.imag) < tol) & (t2.real >= 0) & (t2.real < 4))
        for k in np.flatnonzero(suspicious):
            cls = classify_trace_squared(t2[k], tol)
            if cls.kind is not MapKind.LOXODROMIC:
                flagged.append(FlaggedWord(index_word(level.letters[k]), cls.kind, complex(t2[k])))
    return FreenessScreen(best, best_word, tuple(flagged), scanned)


@dataclass(frozen=True)
class JorgensenPair:
    x: Word
    y: Word
    value: float
    elementary: bool
    flagged: bool


def _commutator_trace(X: np.ndarray, Y: np.ndarray) -> complex:
    Xi = np.array([[X[1, 1], -X[0, 1]], [-X[1, 0], X[0, 0]]])
    Yi = np.array([[Y[1, 1], -Y[0, 1]], [-Y[1, 0], Y[0, 0]]])
    C = X @ Y @ Xi @ Yi
    return complex(C[0, 0] + C[1, 1]) / complex(np.linalg.det(X) * np.linalg.det(Y))


def jorgensen_screen(gens, max_len: int = 1, elementary_tol: float = 1e-9) -> list[JorgensenPair]:
    """Evaluate ``|t^2(X) - 4| + |tr[X, Y] - 2|`` over pairs of short words.

    Discrete non-elementary two-generator groups satisfy the bound ``>= 1``;
    smaller values are flagged. Pairs with ``Y = X^{+-1}`` or a commutator
    trace of 2 (shared fixed point) are elementary and never flagged.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    stack = generator_stack(gens)
    words: list[Word] = []
    mats = []
    for level in iterate_levels(stack, max_len):
        for k in range(len(level.mats)):
            words.append(index_word(level.letters[k]))
            mats.append(level.mats[k])
    t2, _ = _kernels.trace_stats(np.array(mats))
    out = []
    for i, x in enumerate(words):
        for j in range(i, len(words)):
            y = words[j]
            ctr = _commutator_trace(mats[i], mats[j])
            dev = abs(ctr - 2)
            elementary = (j == i or y == tuple(-a for a in reversed(x))
                          or dev < elementary_tol * max(1.0, abs(ctr)))
            value = abs(t2[i] - 4) + dev
            out.append(JorgensenPair(x, y, float(value), elementary, (not elementary) and value < 1))
    return out
