import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schottky_zeta.moebius import (
    Disk,
    Matrix2,
    NotHyperbolic,
    PoleHit,
    PoleInsideDisk,
    WrongDeterminant,
    cayley,
    displacement_length,
    mobius_apply,
    mobius_image_disk,
    product_scaled,
)
from schottky_zeta.surfaces import bowen_series_generators


def test_matrix_rejects_bad_determinant():
    with pytest.raises(WrongDeterminant):
        Matrix2(2, 0, 0, 2)
    assert Matrix2(-1, 0, 0, 1).det == -1


def test_mobius_apply_examples():
    assert mobius_apply(Matrix2.identity(), 3 + 4j) == 3 + 4j
    assert mobius_apply(Matrix2(-1, 0, 0, 1), 2) == -2
    a = 4.0
    assert mobius_apply(Matrix2(0, math.sqrt(a), 1 / math.sqrt(a), 0), 1) == pytest.approx(4)
    with pytest.raises(PoleHit):
        mobius_apply(Matrix2(0, 1, -1, 0), 0.0)


def test_image_disk_examples():
    assert mobius_image_disk(Matrix2(-1, 0, 0, 1), Disk(2, 0.5)) == Disk(-2, 0.5)
    assert mobius_image_disk(Matrix2(1, 1, 0, 1), Disk(0, 1)) == Disk(1, 1)
    img = mobius_image_disk(Matrix2(0, math.sqrt(2), 1 / math.sqrt(2), 0), Disk(3, 1))
    assert img.center == pytest.approx(0.75) and img.radius == pytest.approx(0.25)
    with pytest.raises(PoleInsideDisk):
        mobius_image_disk(Matrix2(0, 1, -1, 0), Disk(0, 1))


def test_cayley_examples():
    assert cayley(1) == 0
    assert cayley(1j) == pytest.approx(1)
    assert cayley(np.exp(1j * np.pi / 2)) == pytest.approx(1)
    with pytest.raises(PoleHit):
        cayley(-1)


def test_product_scaled_examples():
    one = product_scaled([Matrix2.identity()])
    assert one.exp2 == 0 and one.mat == Matrix2.identity()
    d = Matrix2(2, 0, 0, 0.5)
    p = product_scaled([d] * 100)
    assert p.exp2 == 100
    assert p.mat.a == 1.0 and p.mat.d == pytest.approx(2.0 ** -200)


def test_long_product_beyond_overflow():
    h = Matrix2(math.cosh(6), math.sinh(6), math.sinh(6), math.cosh(6))
    p = product_scaled([h] * 100)  # trace ~ e^600 squared would overflow
    assert displacement_length(p) == pytest.approx(1200, rel=1e-12)
    p = product_scaled([h] * 115)  # e^690, beyond what the naive trace formula can take
    assert displacement_length(p) == pytest.approx(1380, rel=1e-12)


def test_displacement_examples():
    h = Matrix2(math.cosh(6), math.sinh(6), math.sinh(6), math.cosh(6))
    assert displacement_length(h) == pytest.approx(12, rel=1e-12)
    with pytest.raises(NotHyperbolic):
        displacement_length(Matrix2.identity())
    with pytest.raises(WrongDeterminant):
        displacement_length(Matrix2(3, 0, 0, -1 / 3))
    l1, l2, l3 = 7.0, 7.0, 7.01
    S1, S2, _ = bowen_series_generators(l1, l2, l3)
    assert displacement_length(S1 @ S2.inverse()) == pytest.approx(l3, rel=1e-10)


def random_sl2(rng, scale=2.0):
    a, b, c = rng.uniform(-scale, scale, 3)
    while abs(a) < 0.1:
        a = rng.uniform(-scale, scale)
    return Matrix2(a, b, c, (1 + b * c) / a)


seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 8))
def test_length_of_powers(seed, k):
    rng = np.random.default_rng(seed)
    m = random_sl2(rng)
    if abs(m.trace) <= 2.05:
        return
    base = displacement_length(m)
    assert displacement_length(product_scaled([m] * k)) == pytest.approx(k * base, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_conjugation_invariance(seed):
    rng = np.random.default_rng(seed)
    m, p = random_sl2(rng), random_sl2(rng, 1.5)
    if abs(m.trace) <= 2.05:
        return
    conj = product_scaled([p, m, p.inverse()])
    assert displacement_length(conj) == pytest.approx(displacement_length(m), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 12))
def test_scaled_matches_naive(seed, n):
    rng = np.random.default_rng(seed)
    ms = [random_sl2(rng) for _ in range(n)]
    naive = np.eye(2)
    for m in ms:
        naive = naive @ m.to_array()
    got = product_scaled(ms).to_array()
    np.testing.assert_allclose(got, naive, rtol=1e-12, atol=1e-12 * np.abs(naive).max())


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_disk_images_compose(seed):
    rng = np.random.default_rng(seed)
    disk = Disk(rng.uniform(-1, 1), rng.uniform(0.05, 0.3))
    m1, m2 = random_sl2(rng), random_sl2(rng)
    try:
        inner = mobius_image_disk(m2, disk)
        two_step = mobius_image_disk(m1, inner)
        direct = mobius_image_disk(m1 @ m2, disk)
    except PoleInsideDisk:
        return
    assert direct.center == pytest.approx(two_step.center, rel=1e-12, abs=1e-12)
    assert direct.radius == pytest.approx(two_step.radius, rel=1e-12, abs=1e-12)
