"""Symmetry groups of the IFS schemes: D_n x Z2, elementary abelian 2-groups, trivial."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np


class GroupMismatch(ValueError):
    pass


class ContextMismatch(ValueError):
    pass


class UnknownIrrep(KeyError):
    pass


class DnZ2Element(NamedTuple):
    """p -> (-1)**refl * p + rot on positions mod n; swap exchanges the two copies."""

    n: int
    rot: int
    refl: int
    swap: int


class Z2kElement(NamedTuple):
    """Product of generators sigma_i**bits[i]; bits=() is the trivial group."""

    bits: tuple


@dataclass(frozen=True)
class Irrep:
    label: str
    dim: int


def cycle_notation(perm: Sequence[int]) -> str:
    """perm[i] is the image of symbol i+1."""
    seen, parts = set(), []
    for start in range(1, len(perm) + 1):
        if start in seen or perm[start - 1] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = perm[x - 1]
        parts.append("(" + ",".join(map(str, cyc)) + ")")
    return "".join(parts) or "()"


def parse_cycles(text: str, n_symbols: int) -> tuple[int, ...]:
    perm = list(range(1, n_symbols + 1))
    for body in re.findall(r"\(([^()]*)\)", text):
        items = [int(x) for x in body.replace(" ", "").split(",") if x]
        for a, b in zip(items, items[1:] + items[:1]):
            perm[a - 1] = b
    return tuple(perm)


def compose_perms(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """p o q (apply q first)."""
    return tuple(p[q[i] - 1] for i in range(len(q)))


class FiniteGroup:
    name = "group"
    n_symbols = 0

    elements: tuple

    @cached_property
    def _index(self) -> dict:
        return {g: i for i, g in enumerate(self.elements)}

    def index(self, g) -> int:
        try:
            return self._index[g]
        except KeyError:
            raise GroupMismatch(f"{g!r} is not an element of {self.name}") from None

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return g in self._index

    @property
    def identity(self):
        return self.elements[0]

    def _check(self, *gs):
        for g in gs:
            if g not in self._index:
                raise GroupMismatch(f"{g!r} is not an element of {self.name}")

    def _mul(self, g, h):
        raise NotImplementedError

    def multiply(self, g, h):
        self._check(g, h)
        return self._mul(g, h)

    @cached_property
    def _inverse(self) -> dict:
        out = {}
        for g in self.elements:
            for h in self.elements:
                if self._mul(g, h) == self.identity:
                    out[g] = h
                    break
        return out

    def inverse(self, g):
        self._check(g)
        return self._inverse[g]

    def power(self, g, k: int):
        self._check(g)
        if k < 0:
            g, k = self._inverse[g], -k
        out, base = self.identity, g
        while k:
            if k & 1:
                out = self._mul(out, base)
            base = self._mul(base, base)
            k >>= 1
        return out

    def order(self, g) -> int:
        self._check(g)
        m, x = 1, g
        while x != self.identity:
            x = self._mul(x, g)
            m += 1
        return m

    def conjugate(self, h, g):
        """h g h^{-1}."""
        return self._mul(self._mul(h, g), self._inverse[h])

    def _perm(self, g) -> tuple[int, ...]:
        raise NotImplementedError

    @cached_property
    def _perms(self) -> dict:
        return {g: self._perm(g) for g in self.elements}

    def permutation(self, g) -> tuple[int, ...]:
        self._check(g)
        return self._perms[g]

    def act_word(self, g, word: Sequence[int]) -> tuple[int, ...]:
        p = self._perms[g]
        return tuple(p[w - 1] for w in word)

    def element_from_permutation(self, perm: Sequence[int]):
        perm = tuple(perm)
        for g in self.elements:
            if self._perms[g] == perm:
                return g
        raise ContextMismatch(f"no element of {self.name} acts as {cycle_notation(perm)}")

    def element_from_cycles(self, text: str):
        return self.element_from_permutation(parse_cycles(text, self.n_symbols))

    @cached_property
    def conjugacy_classes(self) -> tuple[tuple, ...]:
        seen, classes = set(), []
        for g in self.elements:
            if g in seen:
                continue
            cls = sorted({self.conjugate(h, g) for h in self.elements}, key=self.index)
            seen.update(cls)
            classes.append(tuple(cls))
        classes.sort(key=lambda cls: self._class_key(cls[0]))
        return tuple(classes)

    def _class_key(self, rep):
        return self.index(rep)

    @cached_property
    def _class_of(self) -> dict:
        return {g: k for k, cls in enumerate(self.conjugacy_classes) for g in cls}

    def class_index(self, g) -> int:
        self._check(g)
        return self._class_of[g]

    def class_label(self, g) -> str:
        return cycle_notation(self._perms[self.conjugacy_classes[self.class_index(g)][0]])

    # characters
    irreps: tuple[Irrep, ...] = ()

    def irrep(self, label: str) -> Irrep:
        for r in self.irreps:
            if r.label == label:
                return r
        raise UnknownIrrep(label)

    def _character(self, irrep: Irrep, g) -> float:
        raise NotImplementedError

    def character(self, irrep: Irrep | str, g) -> float:
        if isinstance(irrep, str):
            irrep = self.irrep(irrep)
        elif irrep not in self.irreps:
            raise UnknownIrrep(irrep.label)
        self._check(g)
        return self._character(irrep, g)

    @cached_property
    def character_table(self) -> "CharacterTable":
        reps = tuple(cls[0] for cls in self.conjugacy_classes)
        values = np.array([[self._character(r, g) for g in reps] for r in self.irreps], dtype=float)
        return CharacterTable(self, self.irreps, reps, tuple(len(c) for c in self.conjugacy_classes), values)


@dataclass(frozen=True, eq=False)
class CharacterTable:
    group: FiniteGroup
    irreps: tuple[Irrep, ...]
    class_reps: tuple
    class_sizes: tuple[int, ...]
    values: np.ndarray  # irreps x classes

    def value(self, irrep: Irrep | str, g) -> float:
        return self.group.character(irrep, g)

    @property
    def column_labels(self) -> list[str]:
        return [cycle_notation(self.group.permutation(g)) for g in self.class_reps]

    def gram(self) -> np.ndarray:
        """Class-weighted inner products <chi_i, chi_j>; identity for a valid table."""
        w = np.asarray(self.class_sizes, dtype=float) / len(self.group)
        return (self.values * w) @ self.values.T

    def render_text(self) -> str:
        cols = [""] + self.column_labels
        rows = [[r.label] + [f"{int(round(v))}" for v in row] for r, row in zip(self.irreps, self.values)]
        widths = [max(len(x[i]) for x in [cols] + rows) for i in range(len(cols))]
        fmt = lambda xs: " | ".join(x.rjust(w) for x, w in zip(xs, widths))
        lines = [fmt(cols), "-+-".join("-" * w for w in widths)]
        lines += [fmt(r) for r in rows]
        return "\n".join(lines)

    def render_csv(self) -> str:
        lines = ["irrep," + ",".join(f'"{c}"' for c in self.column_labels)]
        for r, row in zip(self.irreps, self.values):
            lines.append(r.label + "," + ",".join(str(int(round(v))) for v in row))
        return "\n".join(lines) + "\n"


_ROMAN = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII"]


class DihedralZ2Group(FiniteGroup):
    """D_n x Z2 acting on the 2n symbols of the flow-adapted scheme."""

    def __init__(self, n: int):
        if n < 3:
            raise ValueError("n must be >= 3")
        self.n = n
        self.n_symbols = 2 * n
        self.name = f"D{n}xZ2"
        self.elements = tuple(
            DnZ2Element(n, t, e, s) for s in (0, 1) for e in (0, 1) for t in range(n)
        )
        self.irreps, self._kinds = self._build_irreps()

    # generators
    @property
    def g1(self) -> DnZ2Element:
        return DnZ2Element(self.n, 1, 0, 0)

    @property
    def g2(self) -> DnZ2Element:
        return DnZ2Element(self.n, self.n - 1, 1, 0)

    @property
    def g3(self) -> DnZ2Element:
        return DnZ2Element(self.n, 0, 0, 1)

    def _check(self, *gs):
        for g in gs:
            if not isinstance(g, DnZ2Element) or g.n != self.n:
                raise GroupMismatch(f"{g!r} is not an element of {self.name}")

    def _class_key(self, rep):
        # identity, reflections, rotations; then the same with the copy swap
        kind = 0 if (rep.rot == 0 and not rep.refl) else (1 if rep.refl else 2)
        return (rep.swap, kind, rep.rot)

    def _mul(self, g, h):
        sign = -1 if g.refl else 1
        return DnZ2Element(self.n, (sign * h.rot + g.rot) % self.n, g.refl ^ h.refl, g.swap ^ h.swap)

    def _perm(self, g) -> tuple[int, ...]:
        n, sign = self.n, -1 if g.refl else 1
        out = []
        for sym in range(1, 2 * n + 1):
            copy, p = divmod(sym - 1, n)
            out.append((copy ^ g.swap) * n + (sign * p + g.rot) % n + 1)
        return tuple(out)

    def act_position(self, g, copy: int, pos: int) -> tuple[int, int]:
        sign = -1 if g.refl else 1
        return copy ^ g.swap, (sign * pos + g.rot) % self.n

    @staticmethod
    def orientation_preserving(g: DnZ2Element) -> bool:
        return g.refl == 0

    def closing_element(self, start: tuple[int, int], end: tuple[int, int]) -> DnZ2Element:
        """Unique g sending (end circle, end orientation) to (start circle, start orientation)."""
        (c0, o0), (c1, o1) = start, end
        for c in (c0, c1):
            if not 1 <= c <= 2 * self.n:
                raise ContextMismatch(f"circle {c} outside 1..{2 * self.n}")
        copy0, p0 = divmod(c0 - 1, self.n)
        copy1, p1 = divmod(c1 - 1, self.n)
        refl = int(o0 != o1)
        sign = -1 if refl else 1
        return DnZ2Element(self.n, (p0 - sign * p1) % self.n, refl, copy0 ^ copy1)

    # characters
    def _build_irreps(self):
        n = self.n
        kinds = [("triv", 0)]
        if n % 2 == 0:
            kinds += [("B1", 0), ("A2", 0), ("B2", 0)]
        else:
            kinds += [("A2", 0)]
        kinds += [("E", k) for k in range(1, (n - 1) // 2 + 1)]
        # swap sign of the "_1" member; matches the reference tables for n = 3 and n = 4
        first_minus = {3: {"E"}, 4: {"A2", "B2"}}.get(n, set())
        irreps, table = [], {}
        for num, (kind, k) in enumerate(kinds):
            dim = 2 if kind == "E" else 1
            s1 = -1 if kind in first_minus else 1
            for suffix, s in (("_1", s1), ("_2", -s1)):
                r = Irrep(_ROMAN[num] + suffix, dim)
                irreps.append(r)
                table[r] = (kind, k, s)
        return tuple(irreps), table

    def irrep_kind(self, irrep: Irrep) -> tuple[str, int, int]:
        """(dihedral kind, k for E_k, swap sign)."""
        return self._kinds[irrep]

    def _character(self, irrep: Irrep, g) -> float:
        kind, k, s = self._kinds[irrep]
        eps = -1 if g.refl else 1
        parity = -1 if g.rot % 2 else 1
        if kind == "triv":
            v = 1.0
        elif kind == "A2":
            v = float(eps)
        elif kind == "B1":
            v = float(parity)
        elif kind == "B2":
            v = float(eps * parity)
        else:
            v = 0.0 if g.refl else 2.0 * math.cos(2.0 * math.pi * k * g.rot / self.n)
            v = float(round(v)) if abs(v - round(v)) < 1e-12 else v
        return v * (s if g.swap else 1)


class Z2kGroup(FiniteGroup):
    """Elementary abelian 2-group generated by commuting involutive symbol permutations."""

    def __init__(self, generators: Sequence[Sequence[int]], labels: Sequence[str] | None = None, name: str = ""):
        self.k = len(generators)
        self.generators = tuple(tuple(g) for g in generators)
        self.n_symbols = len(self.generators[0]) if self.generators else 0
        self.elements = tuple(
            Z2kElement(tuple((i >> j) & 1 for j in range(self.k))) for i in range(2 ** self.k)
        )
        self.name = name or f"Z2^{self.k}"
        if labels is None:
            labels = [chr(ord("A") + i) for i in range(2 ** self.k)]
        # irrep m: bit j of m set -> chi(sigma_j) = -1
        self.irreps = tuple(Irrep(labels[m], 1) for m in range(2 ** self.k))
        self._signs = {r: m for m, r in enumerate(self.irreps)}

    def _check(self, *gs):
        for g in gs:
            if not isinstance(g, Z2kElement) or len(g.bits) != self.k:
                raise GroupMismatch(f"{g!r} is not an element of {self.name}")

    def _class_key(self, rep):
        return rep.bits

    def _mul(self, g, h):
        return Z2kElement(tuple(a ^ b for a, b in zip(g.bits, h.bits)))

    def _perm(self, g) -> tuple[int, ...]:
        perm = tuple(range(1, self.n_symbols + 1))
        for bit, gen in zip(g.bits, self.generators):
            if bit:
                perm = compose_perms(gen, perm)
        return perm

    def _character(self, irrep: Irrep, g) -> float:
        mask = self._signs[irrep]
        flips = sum(b for j, b in enumerate(g.bits) if (mask >> j) & 1)
        return -1.0 if flips % 2 else 1.0


SIGMA1 = (3, 4, 1, 2)
SIGMA2 = (2, 1, 4, 3)


def klein_four_group() -> Z2kGroup:
    """sigma_1 = (1,3)(2,4), sigma_2 = (1,2)(3,4) on the Bowen-Series symbols.

    Labels by (chi(sigma_1), chi(sigma_2)): A ++, B -+, C +-, D --.
    """
    return Z2kGroup([SIGMA1, SIGMA2], labels=["A", "B", "C", "D"], name="Z2xZ2")


def z2_group() -> Z2kGroup:
    return Z2kGroup([SIGMA1], labels=["A", "B"], name="Z2")


def trivial_group(n_symbols: int) -> Z2kGroup:
    g = Z2kGroup([], labels=["I_1"], name="trivial")
    g.n_symbols = n_symbols
    return g


def symbol_permutation(group: FiniteGroup, g, n_symbols: int | None = None) -> tuple[int, ...]:
    if n_symbols is not None and n_symbols != group.n_symbols:
        raise ContextMismatch(f"{group.name} acts on {group.n_symbols} symbols, not {n_symbols}")
    return group.permutation(g)


def check_free_action(scheme, max_order: int, group: FiniteGroup | None = None):
    """(True, None) if no h != id fixes a pair of W^G with n <= max_order, else (False, witness)."""
    from .symbolic import iter_gclosed_pairs

    group = group or scheme.group
    nonid = [h for h in group.elements if h != group.identity]
    for p in iter_gclosed_pairs(scheme.adjacency, group, max_order):
        for h in nonid:
            if group.act_word(h, p.word) == p.word and group.conjugate(h, p.g) == p.g:
                return False, (h, p)
    return True, None
