"""Reduced-range envelope run on X_{3,0.3631}: Im <= 5000 instead of the 1e6 scale."""
import numpy as np
import pytest

from schottky_zeta.resonances import critical_exponent, default_region, scan_resonances
from schottky_zeta.spectral import ResonanceSet, envelope, gap, read_resonances_csv, write_resonances_csv

pytestmark = pytest.mark.slow

T_MAX = 5000.0
W = 500.0


@pytest.fixture(scope="module")
def chain(table_9):
    delta = critical_exponent(table_9, 6)
    region = default_region(-0.05, delta + 0.02, 0.0, T_MAX, table_9.max_length)
    res, reports = scan_resonances(table_9, ["I_1", "I_2"], 6, region, cell_height=100)
    return delta, ResonanceSet(res), reports


def test_cells_consistent(chain):
    _, _, reports = chain
    assert all(r.consistent for r in reports), [r for r in reports if not r.consistent][:3]


def test_envelopes(chain, tmp_path):
    delta, rset, _ = chain
    t = np.arange(W, T_MAX - W + 1, 100.0)
    h1 = envelope(rset, ["I_1"], W, t)
    h2 = envelope(rset, ["I_2"], W, t)
    assert not np.isnan(h1).any() and not np.isnan(h2).any()
    assert h1.max() < delta and h2.max() < delta
    # the two one-dimensional chains stay interleaved: envelopes nearly coincide
    assert np.abs(h1 - h2).max() < 5e-3
    # and drift slowly to the left with height
    assert h1[-1] < h1[0]

    path = tmp_path / "chain.csv"
    write_resonances_csv(rset.resonances, path)
    back = read_resonances_csv(path)
    np.testing.assert_allclose(envelope(back, ["I_1"], W, t), h1, rtol=1e-11)


def test_gap_decreases(chain):
    delta, rset, _ = chain
    g = [gap(rset, None, K, delta) for K in (0.0, 1000.0, 3000.0)]
    assert g[0] >= g[1] >= g[2]
