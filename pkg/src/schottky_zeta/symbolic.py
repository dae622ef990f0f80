"""G-closed words, the G x Z action, prime classes and their enumeration."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .groups import DihedralZ2Group, FiniteGroup
from .moebius import displacement_length
from .surfaces import IfsScheme, SymmetricFunnels, build_flow_adapted, closed_word_matrix


class TooLarge(ValueError):
    pass


class InvalidSymbol(ValueError):
    pass


class Mismatch(AssertionError):
    pass


class GClosedPair(NamedTuple):
    word: tuple  # (w_0, ..., w_n)
    g: object

    @property
    def n(self) -> int:
        return len(self.word) - 1


def is_gclosed(p: GClosedPair, group: FiniteGroup, adjacency=None) -> bool:
    if group.act_word(p.g, p.word[-1:]) != p.word[:1]:
        return False
    if adjacency is not None:
        return all(adjacency[a - 1, b - 1] for a, b in zip(p.word, p.word[1:]))
    return True


def shift_left(p: GClosedPair, group: FiniteGroup) -> GClosedPair:
    """((w_1, ..., w_n, g^{-1} w_1), g)."""
    ginv = group.inverse(p.g)
    return GClosedPair(p.word[1:] + group.act_word(ginv, p.word[1:2]), p.g)


def shift_right(p: GClosedPair, group: FiniteGroup) -> GClosedPair:
    """((g w_{n-1}, w_0, ..., w_{n-1}), g)."""
    return GClosedPair(group.act_word(p.g, p.word[-2:-1]) + p.word[:-1], p.g)


def act(h, p: GClosedPair, group: FiniteGroup) -> GClosedPair:
    return GClosedPair(group.act_word(h, p.word), group.conjugate(h, p.g))


def iterate_pair(p: GClosedPair, k: int, group: FiniteGroup) -> GClosedPair:
    """k-fold iterate: blocks g^{k-1}(w_0..w_n), g^{k-2}(w_1..w_n), ..., (w_1..w_n)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    word = group.act_word(group.power(p.g, k - 1), p.word)
    for j in range(k - 2, -1, -1):
        word += group.act_word(group.power(p.g, j), p.word[1:])
    return GClosedPair(word, group.power(p.g, k))


def pair_key(p: GClosedPair, group: FiniteGroup) -> tuple:
    return (p.word, group.index(p.g))


def orbit(p: GClosedPair, group: FiniteGroup) -> set:
    """Full G x Z orbit {h sigma_L^k p : h in G, 0 <= k < n}."""
    out, q = set(), p
    for _ in range(p.n):
        for h in group.elements:
            out.add(act(h, q, group))
        q = shift_left(q, group)
    return out


def canonicalize(p: GClosedPair, group: FiniteGroup) -> GClosedPair:
    return min(orbit(p, group), key=lambda q: pair_key(q, group))


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def root_of(p: GClosedPair, group: FiniteGroup, adjacency=None):
    """(q, k) with k >= 2 maximal-free such that iterate_pair(q, k) == p, or None if p is prime."""
    n = p.n
    for k in _divisors(n)[::-1]:
        if k == 1:
            continue
        d = n // k
        for h in group.elements:
            if group.power(h, k) != p.g:
                continue
            q0 = group.act_word(group.power(h, -(k - 1)), p.word[:1])
            q = GClosedPair(q0 + p.word[n - d + 1:], h)
            if not is_gclosed(q, group, adjacency):
                continue
            if iterate_pair(q, k, group) == p:
                return q, k
    return None


def is_prime(p: GClosedPair, group: FiniteGroup, adjacency=None) -> bool:
    return root_of(p, group, adjacency) is None


def iter_words(adjacency: np.ndarray, n: int) -> Iterator[tuple]:
    """All adjacency-valid words with n transitions, lexicographic."""
    size = adjacency.shape[0]
    succ = [[j + 1 for j in range(size) if adjacency[i, j]] for i in range(size)]

    def rec(prefix):
        if len(prefix) == n + 1:
            yield tuple(prefix)
            return
        for nxt in succ[prefix[-1] - 1]:
            prefix.append(nxt)
            yield from rec(prefix)
            prefix.pop()

    for start in range(1, size + 1):
        yield from rec([start])


def count_words(adjacency: np.ndarray, max_n: int) -> int:
    """Number of adjacency-valid words with 1..max_n transitions."""
    A = adjacency.astype(object)
    row = np.ones(A.shape[0], dtype=object)
    total = 0
    for _ in range(max_n):
        row = row @ A
        total += int(row.sum())
    return total


def iter_gclosed_pairs(adjacency: np.ndarray, group: FiniteGroup, max_n: int) -> Iterator[GClosedPair]:
    closers: dict[tuple[int, int], list] = {}
    for g in group.elements:
        perm = group.permutation(g)
        for b in range(1, len(perm) + 1):
            closers.setdefault((perm[b - 1], b), []).append(g)
    for n in range(1, max_n + 1):
        for w in iter_words(adjacency, n):
            for g in closers.get((w[0], w[-1]), ()):
                yield GClosedPair(w, g)


@dataclass(frozen=True)
class PrimeClassDatum:
    canonical: GClosedPair
    n_w: int
    m_w: int
    length_L: float
    conj_class: str
    reduced_word: tuple | None = None

    @property
    def g_w(self):
        return self.canonical.g

    @property
    def length_per_period(self) -> float:
        return self.length_L / self.m_w


def pair_length(scheme: IfsScheme, p: GClosedPair, group: FiniteGroup) -> tuple[int, float]:
    """(m, length of the closed word w^m)."""
    m = group.order(p.g)
    closed = iterate_pair(p, m, group)
    return m, displacement_length(closed_word_matrix(scheme, closed.word))


def make_datum(scheme: IfsScheme, p: GClosedPair, group: FiniteGroup, reduced_word=None) -> PrimeClassDatum:
    m, length = pair_length(scheme, p, group)
    return PrimeClassDatum(p, p.n, m, length, group.class_label(p.g), reduced_word)


def _sort_key(group: FiniteGroup):
    return lambda d: (d.n_w, pair_key(d.canonical, group))


def enumerate_prime_classes_bruteforce(
    scheme: IfsScheme, group: FiniteGroup | str = "full", max_n: int = 6
) -> list[PrimeClassDatum]:
    group = scheme.group_for(group)
    n_words = count_words(scheme.adjacency, max_n)
    if n_words > 10 ** 8:
        raise TooLarge(f"{n_words} words up to length {max_n} exceed the brute-force guard")
    seen: set = set()
    out = []
    for p in iter_gclosed_pairs(scheme.adjacency, group, max_n):
        if p in seen:
            continue
        orb = orbit(p, group)
        seen |= orb
        canon = min(orb, key=lambda q: pair_key(q, group))
        if is_prime(canon, group, scheme.adjacency):
            out.append(make_datum(scheme, canon, group))
    out.sort(key=_sort_key(group))
    return out


# symmetry-reduced coding for X_{n_f, psi}

def reduced_alphabet(nf: int) -> list[int]:
    if nf % 2:
        h = (nf - 1) // 2
        return [k for k in range(-h, h + 1) if k != 0]
    h = (nf - 2) // 2
    return list(range(-h, h + 1))


@dataclass(frozen=True)
class WalkState:
    circle: int
    orientation: int


def circle_walk(nf: int, rw: Sequence[int], group: DihedralZ2Group | None = None):
    """Decode a reduced word into (GClosedPair, visited states)."""
    if not rw:
        raise InvalidSymbol("empty reduced word")
    group = group or DihedralZ2Group(nf)
    alphabet = set(reduced_alphabet(nf))
    copy, pos, orient = 0, 0, 1
    states = [WalkState(1, 1)]
    for k in rw:
        if k not in alphabet:
            raise InvalidSymbol(f"symbol {k} not in the reduced alphabet for n_f={nf}")
        step = nf // 2 if k == 0 else abs(k)
        pos = (pos + orient * step) % nf
        copy ^= 1
        if k < 0:
            orient = -orient
        states.append(WalkState(copy * nf + pos + 1, orient))
    g = group.closing_element((1, 1), (states[-1].circle, states[-1].orientation))
    return GClosedPair(tuple(s.circle for s in states), g), states


def lyndon_words(alphabet: Sequence[int], max_len: int) -> Iterator[tuple]:
    """Duval's algorithm over the sorted alphabet."""
    letters = sorted(alphabet)
    k = len(letters)
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(letters[i] for i in w)
        m = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()


def axis_pairs(nf: int, group: DihedralZ2Group, max_n: int) -> Iterator[GClosedPair]:
    """Even n_f: words made only of half-turn steps, with every closing element."""
    a, b = 1, nf + nf // 2 + 1
    for n in range(1, max_n + 1):
        word = tuple(a if i % 2 == 0 else b for i in range(n + 1))
        for g in group.elements:
            if group.act_word(g, word[-1:]) == word[:1]:
                yield GClosedPair(word, g)


def enumerate_prime_classes_reduced(
    nf: int, psi: float, max_n: int, scheme: IfsScheme | None = None, walk: Callable | None = None
) -> list[PrimeClassDatum]:
    k = len(reduced_alphabet(nf))
    n_words = sum(k ** n for n in range(1, max_n + 1))
    if n_words > 10 ** 8:
        raise TooLarge(f"{n_words} reduced words up to length {max_n} exceed the enumeration guard")
    scheme = scheme or build_flow_adapted(SymmetricFunnels(nf, psi))
    group = scheme.group
    walk = walk or circle_walk
    out: dict = {}
    for rw in lyndon_words(reduced_alphabet(nf), max_n):
        if all(k == 0 for k in rw):
            continue
        p, _ = walk(nf, rw, group)
        canon = canonicalize(p, group)
        if canon in out:
            raise Mismatch(f"reduced words {out[canon].reduced_word} and {rw} give the same class")
        out[canon] = make_datum(scheme, canon, group, reduced_word=tuple(rw))
    if nf % 2 == 0:
        for p in axis_pairs(nf, group, max_n):
            canon = canonicalize(p, group)
            if canon not in out and is_prime(canon, group, scheme.adjacency):
                out[canon] = make_datum(scheme, canon, group)
    return sorted(out.values(), key=_sort_key(group))


def class_signature(d: PrimeClassDatum) -> tuple:
    return (d.n_w, d.m_w, d.conj_class, round(d.length_L, 9))


def cross_check(scheme: IfsScheme, group: FiniteGroup | str = "full", max_n: int = 4, walk: Callable | None = None) -> bool:
    group = scheme.group_for(group)
    spec = scheme.spec
    brute = Counter(class_signature(d) for d in enumerate_prime_classes_bruteforce(scheme, group, max_n))
    reduced = Counter(
        class_signature(d) for d in enumerate_prime_classes_reduced(spec.nf, spec.psi, max_n, scheme, walk)
    )
    if brute != reduced:
        diff = sorted((brute - reduced) + (reduced - brute))
        raise Mismatch(f"enumerators disagree, first differing datum {diff[0]}")
    return True


def orbit_weights(classes: Sequence[PrimeClassDatum], group: FiniteGroup, max_order: int) -> dict:
    """Exact weight of each (class index, l) in the trace sums.

    An orbit O of length t contributes #O/(|G| t) per member of W^G_t; it is shared
    by the r_O pairs (class, l) whose l-th iterate lands in O.  With a free action
    this reduces to 1/l.
    """
    landing: dict = {}
    for i, d in enumerate(classes):
        for l in range(1, max_order // d.n_w + 1):
            q = iterate_pair(d.canonical, l, group)
            orb = orbit(q, group)
            key = min(orb, key=lambda x: pair_key(x, group))
            landing.setdefault(key, [len(orb), []])[1].append((i, l))
    out = {}
    for key, (size, members) in landing.items():
        for i, l in members:
            t = classes[i].n_w * l
            out[(i, l)] = size / (len(group) * t * len(members))
    return out
