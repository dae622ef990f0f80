import math

import numpy as np
import pytest

from schottky_zeta.moebius import Disk, displacement_length, mobius_apply
from schottky_zeta.surfaces import (
    InvalidPsi,
    InvalidTransition,
    NoSuchSurface,
    NotClosed,
    OutOfRange,
    SymmetricFunnels,
    ThreeFunnel,
    build_bowen_series,
    build_flow_adapted,
    bowen_series_generators,
    closed_word_matrix,
    funnel_length,
    parse_surface,
    psi_for_length,
    read_config,
    surface_from_config,
    validate_ifs,
)
from schottky_zeta.symbolic import circle_walk, iterate_pair

# known conflict: width 13 sits at psi = 0.10956 for n_f = 4 (see notes)
N4_WIDTH13 = pytest.mark.xfail(strict=True, reason="X_{4,0.1010} has funnel length 13.33, not 13")


def test_flow_adapted_shape(x3_7):
    assert x3_7.n_symbols == 6
    assert x3_7.adjacency.sum() == 12
    assert x3_7.delta_offset == pytest.approx(x3_7.disks[2].right - x3_7.disks[0].left + 1)
    assert validate_ifs(x3_7).ok


@pytest.mark.parametrize("nf, psi, width", [(3, 0.5930, 7), (3, 0.1723, 12), (3, 0.3631, 9), (4, 0.2311, 10)])
def test_funnel_widths(nf, psi, width):
    assert funnel_length(SymmetricFunnels(nf, psi)) == pytest.approx(width, abs=0.04)


@N4_WIDTH13
def test_funnel_width_n4_13():
    assert funnel_length(SymmetricFunnels(4, 0.1010)) == pytest.approx(13, abs=0.04)


def test_n4_width13_conflict_value():
    assert funnel_length(SymmetricFunnels(4, 0.1010)) == pytest.approx(13.326, abs=1e-3)
    assert psi_for_length(4, 13) == pytest.approx(0.10956, abs=5e-5)


@pytest.mark.parametrize("nf, width, psi", [(3, 12, 0.1723), (3, 7, 0.5930), (3, 9, 0.3631), (4, 10, 0.2311)])
def test_psi_for_length(nf, width, psi):
    assert psi_for_length(nf, width) == pytest.approx(psi, abs=5e-5)


@N4_WIDTH13
def test_psi_for_length_n4_13():
    assert psi_for_length(4, 13) == pytest.approx(0.1010, abs=5e-5)


@pytest.mark.parametrize("nf", [3, 4, 5])
@pytest.mark.parametrize("width", range(5, 16))
def test_round_trip(nf, width):
    assert funnel_length(SymmetricFunnels(nf, psi_for_length(nf, width))) == pytest.approx(width, abs=1e-8)


def test_psi_out_of_range():
    with pytest.raises(OutOfRange):
        psi_for_length(3, 0.001)
    with pytest.raises(OutOfRange):
        psi_for_length(3, 100.0)
    with pytest.raises(InvalidPsi):
        SymmetricFunnels(3, 2.2)
    with pytest.raises(InvalidPsi):
        SymmetricFunnels(3, 0.0)


@pytest.mark.parametrize("nf", [3, 4, 5, 6])
def test_validate_sweep(nf):
    for psi in np.linspace(0.02, 2 * math.pi / nf - 0.02, 20):
        assert validate_ifs(build_flow_adapted(SymmetricFunnels(nf, float(psi)), validate=False)).ok


def test_validate_detects_overlap(x3_7):
    disks = list(x3_7.disks)
    disks[1] = Disk(disks[0].center + 0.5 * disks[0].radius, disks[1].radius)
    broken = type(x3_7)(**{**x3_7.__dict__, "disks": tuple(disks)})
    report = validate_ifs(broken)
    assert not report.ok and (1, 2) in report.disjoint


def test_bowen_series_trace_condition():
    S1, S2, a = bowen_series_generators(7, 7, 7.01)
    assert (S1 @ S2.inverse()).trace == pytest.approx(-2 * math.cosh(7.01 / 2), abs=1e-9)
    # closed-form oracle: a + 1/a = K
    c, s = math.cosh(3.5), math.sinh(3.5)
    K = (2 * c * c + 2 * math.cosh(7.01 / 2)) / (s * s)
    assert a == pytest.approx((K + math.sqrt(K * K - 4)) / 2, rel=1e-12)


def test_bowen_series_sigma2_conjugation():
    l = 5.0
    S1, S2, a = bowen_series_generators(l, l, l)
    from schottky_zeta.moebius import Matrix2

    sigma2 = Matrix2(0, math.sqrt(a), 1 / math.sqrt(a), 0)
    np.testing.assert_allclose((sigma2 @ S1 @ sigma2).to_array(), S2.to_array(), atol=1e-12 * S2.to_array().max())


def test_bowen_series_large_l3_reports():
    with pytest.raises(NoSuchSurface, match="trace condition"):
        build_bowen_series(ThreeFunnel(1, 1, 100))


def test_bowen_series_valid():
    for ls in [(7, 7, 7.01), (12, 12, 12), (5, 6, 7)]:
        assert validate_ifs(build_bowen_series(ThreeFunnel(*ls))).ok
    assert "klein" in build_bowen_series(ThreeFunnel(7, 7, 7.01)).groups
    assert "klein" not in build_bowen_series(ThreeFunnel(5, 6, 7)).groups


def test_closed_word_lengths(x3_7):
    G = x3_7.group
    p, _ = circle_walk(3, (-1,), G)
    assert displacement_length(closed_word_matrix(x3_7, iterate_pair(p, 2, G).word)) == pytest.approx(7, abs=0.04)
    p, _ = circle_walk(3, (1,), G)
    L = displacement_length(closed_word_matrix(x3_7, iterate_pair(p, 6, G).word))
    assert L / 6 == pytest.approx(3.530, abs=0.005)


def test_closed_word_generator(bs777):
    assert displacement_length(closed_word_matrix(bs777, (1, 1))) == pytest.approx(7, rel=1e-12)
    assert displacement_length(closed_word_matrix(bs777, (2, 2, 2))) == pytest.approx(14, rel=1e-12)


def test_closed_word_errors(x3_7):
    with pytest.raises(NotClosed):
        closed_word_matrix(x3_7, (1, 5))
    with pytest.raises(InvalidTransition):
        closed_word_matrix(x3_7, (1, 4, 1))


def _sample_points(disk: Disk, rng, k=10):
    r = disk.radius * np.sqrt(rng.uniform(0, 0.9, k))
    phi = rng.uniform(0, 2 * np.pi, k)
    return disk.center + r * np.exp(1j * phi)


@pytest.mark.parametrize("which", ["x3_7", "x4", "bs777"])
def test_symmetry_consistency(which, request):
    scheme = request.getfixturevalue(which)
    G = scheme.group
    rng = np.random.default_rng(7)
    gens = [e for e in G.elements if e != G.identity]
    for g in gens:
        perm = G.permutation(g)
        for (i, j) in scheme.edges():
            u = _sample_points(scheme.disks[i - 1], rng)
            gi, gj = perm[i - 1], perm[j - 1]
            lhs = scheme.point_action(g, scheme.apply_edge(i, j, u), j)
            rhs = scheme.apply_edge(gi, gj, scheme.point_action(g, u, i))
            np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_parse_surface_strings():
    assert parse_surface("sym:3:0.5930") == SymmetricFunnels(3, 0.593)
    assert parse_surface("bs:7,7,7.01") == ThreeFunnel(7, 7, 7.01)
    spec = parse_surface("sym:4:0.2311")
    assert parse_surface(spec.render()) == spec
    with pytest.raises(ValueError):
        parse_surface("torus:1")


def test_config_file(tmp_path):
    path = tmp_path / "surf.cfg"
    path.write_text("# surface\nvariant = bs\nl1 = 7\nl2 = 7\nl3 = 7.01\n")
    assert surface_from_config(read_config(path)) == ThreeFunnel(7, 7, 7.01)
    path.write_text("variant: sym\nnf: 3\npsi: 0.5930\n")
    assert surface_from_config(read_config(path)) == SymmetricFunnels(3, 0.5930)
