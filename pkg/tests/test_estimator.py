import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from schottky_zeta.cycle import ZetaEvaluator
from schottky_zeta.estimator import ResonanceSearch, SymmetryReducedZeta, check_points


def test_predict_matches_evaluator(table_7):
    est = SymmetryReducedZeta(order=6, irrep="II_1").fit()
    s = np.array([0.2 + 3j, 1.0])
    np.testing.assert_allclose(est.predict(s), ZetaEvaluator(table_7, "II_1", 6)(s), rtol=1e-13)
    pairs = np.array([[0.2, 3.0], [1.0, 0.0]])
    np.testing.assert_allclose(est.predict(pairs), est.predict(s))


def test_transform_shape_and_product():
    est = SymmetryReducedZeta(order=5).fit()
    s = np.array([0.1 + 1j, 0.4 + 2j, 0.9])
    per = est.transform(s)
    assert per.shape == (3, 6)
    np.testing.assert_allclose(per.prod(axis=1), est.predict(s), rtol=1e-13)
    assert est.relative_error(s).shape == (3,)


def test_params_and_clone():
    est = SymmetryReducedZeta(surface="sym:4:0.2311", order=4)
    assert est.get_params()["order"] == 4
    c = clone(est).set_params(order=3)
    assert c.order == 3 and est.order == 4


def test_not_fitted():
    with pytest.raises(NotFittedError):
        SymmetryReducedZeta().predict([1.0])


def test_check_points():
    assert check_points(1.5).shape == (1,)
    with pytest.raises(ValueError):
        check_points(np.ones((2, 2, 2)))
    with pytest.raises(ValueError):
        check_points([np.nan])


def test_resonance_search():
    est = ResonanceSearch(irreps=["I_1"], rect=(0.0, 0.25, 0.0, 5.0)).fit()
    assert est.delta_ == pytest.approx(0.19718, abs=1e-4)
    assert np.min(np.abs(est.predict() - est.delta_)) < 1e-9


def test_klein_estimator():
    est = SymmetryReducedZeta(surface="bs:7,7,7.01", group="klein", order=4).fit()
    assert est.irrep_labels_ == ["A", "B", "C", "D"]
    assert np.isfinite(est.predict([0.5 + 1j])).all()
