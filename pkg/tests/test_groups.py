import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schottky_zeta.groups import (
    ContextMismatch,
    DihedralZ2Group,
    GroupMismatch,
    UnknownIrrep,
    check_free_action,
    compose_perms,
    cycle_notation,
    klein_four_group,
    parse_cycles,
    symbol_permutation,
    trivial_group,
    z2_group,
)

GROUPS = [DihedralZ2Group(n) for n in (3, 4, 5, 6)] + [klein_four_group(), z2_group()]


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: g.name)
def test_axioms(G):
    els = G.elements
    e = G.identity
    for g in els:
        assert G.multiply(g, e) == g == G.multiply(e, g)
        assert G.multiply(g, G.inverse(g)) == e
    for g, h, k in itertools.islice(itertools.product(els, repeat=3), 2000):
        assert G.multiply(G.multiply(g, h), k) == G.multiply(g, G.multiply(h, k))


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: g.name)
def test_permutation_is_left_action(G):
    for g, h in itertools.product(G.elements, repeat=2):
        assert G.permutation(G.multiply(g, h)) == compose_perms(G.permutation(g), G.permutation(h))
    assert len({G.permutation(g) for g in G.elements}) == len(G)


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: g.name)
def test_orthogonality(G):
    T = G.character_table
    np.testing.assert_allclose(T.gram(), np.eye(len(G.irreps)), atol=1e-12)
    assert sum(r.dim ** 2 for r in G.irreps) == len(G)
    assert len(G.irreps) == len(G.conjugacy_classes)


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: g.name)
def test_characters_are_multiplicative_or_class_functions(G):
    for r in G.irreps:
        assert G.character(r, G.identity) == r.dim
        for g, h in itertools.product(G.elements, repeat=2):
            assert G.character(r, G.conjugate(h, g)) == pytest.approx(G.character(r, g))
            if r.dim == 1:
                assert G.character(r, G.multiply(g, h)) == pytest.approx(G.character(r, g) * G.character(r, h))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 9), data=st.data())
def test_power_and_order(n, data):
    G = DihedralZ2Group(n)
    g = data.draw(st.sampled_from(G.elements))
    k = data.draw(st.integers(-20, 20))
    o = G.order(g)
    assert G.power(g, o) == G.identity
    assert G.power(g, k) == G.power(g, k % o)
    assert len(G) % o == 0


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 8), data=st.data())
def test_closing_element(n, data):
    G = DihedralZ2Group(n)
    c0 = data.draw(st.integers(1, 2 * n))
    c1 = data.draw(st.integers(1, 2 * n))
    o0, o1 = data.draw(st.sampled_from([1, -1])), data.draw(st.sampled_from([1, -1]))
    g = G.closing_element((c0, o0), (c1, o1))
    assert G.permutation(g)[c1 - 1] == c0
    assert G.orientation_preserving(g) == (o0 == o1)


def test_closing_element_bounds():
    with pytest.raises(ContextMismatch):
        DihedralZ2Group(3).closing_element((7, 1), (1, 1))


def test_d3_table_reference():
    G = DihedralZ2Group(3)
    T = G.character_table
    assert T.column_labels == ["()", "(2,3)(5,6)", "(1,2,3)(4,5,6)", "(1,4)(2,5)(3,6)", "(1,4)(2,6)(3,5)", "(1,5,3,4,2,6)"]
    rows = {r.label: [T.value(r, c[0]) for c in G.conjugacy_classes] for r in G.irreps}
    assert rows["III_1"] == [2, 0, -1, -2, 0, 1]
    assert rows["II_2"] == [1, -1, 1, -1, 1, -1]


def test_class_sizes_d4():
    G = DihedralZ2Group(4)
    assert sorted(len(c) for c in G.conjugacy_classes) == [1, 1, 1, 1, 2, 2, 2, 2, 2, 2]


def test_cycle_notation_round_trip():
    for G in GROUPS:
        for g in G.elements:
            text = cycle_notation(G.permutation(g))
            assert G.element_from_cycles(text) == g
    assert parse_cycles("(1,3)(2,4)", 4) == (3, 4, 1, 2)
    assert cycle_notation((1, 2, 3)) == "()"


def test_klein_labels():
    K = klein_four_group()
    s1 = K.element_from_cycles("(1,3)(2,4)")
    s2 = K.element_from_cycles("(1,2)(3,4)")
    signs = {r.label: (K.character(r, s1), K.character(r, s2)) for r in K.irreps}
    assert signs == {"A": (1, 1), "B": (-1, 1), "C": (1, -1), "D": (-1, -1)}


def test_errors():
    G3, G4 = DihedralZ2Group(3), DihedralZ2Group(4)
    with pytest.raises(GroupMismatch):
        G3.multiply(G3.identity, G4.g1)
    with pytest.raises(UnknownIrrep):
        G3.irrep("V_1")
    with pytest.raises(ContextMismatch):
        symbol_permutation(G3, G3.g1, 8)
    with pytest.raises(ValueError):
        G3.element_from_cycles("(1,2)")


def test_generators_d3():
    G = DihedralZ2Group(3)
    assert cycle_notation(G.permutation(G.g1)) == "(1,2,3)(4,5,6)"
    assert G.order(G.g2) == 2 and G.order(G.g3) == 2
    assert not G.orientation_preserving(G.g2)


def test_trivial_group():
    T = trivial_group(6)
    assert len(T) == 1 and [r.label for r in T.irreps] == ["I_1"]
    assert T.permutation(T.identity) == tuple(range(1, 7))


def test_free_action(x3_7, x4, bs777):
    assert check_free_action(x3_7, 6)[0]
    ok, witness = check_free_action(x4, 4)
    assert not ok and witness is not None
    assert check_free_action(bs777, 6)[0]
