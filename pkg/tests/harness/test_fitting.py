import numpy as np
import pytest

from spheremax.errors import DomainError
from spheremax.harness.fitting import FitReport, fit_loglog


def test_exact_power_law():
    points = [(x, 8 * x ** 2) for x in (1.0, 2.0, 4.0, 8.0)]
    fit = fit_loglog(points)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(3.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points[1] == pytest.approx((1.0, 5.0))


def test_outlier_lowers_r_squared():
    points = [(x, x ** -1.0) for x in (1.0, 2.0, 4.0, 8.0, 16.0)]
    points[2] = (4.0, 1.0)
    assert fit_loglog(points).r_squared < 1.0


def test_noisy_power_law(rng):
    x = 2.0 ** np.arange(1, 12)
    y = x ** -1.5 * (1 + 0.01 * rng.standard_normal(x.size))
    assert fit_loglog(list(zip(x, y))).slope == pytest.approx(-1.5, abs=0.05)


def test_degenerate_inputs():
    with pytest.raises(DomainError):
        fit_loglog([(1.0, 1.0), (2.0, 2.0)])
    with pytest.raises(DomainError):
        fit_loglog([(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)])
    with pytest.raises(DomainError):
        fit_loglog([(1.0, 1.0), (2.0, 0.0), (4.0, 3.0)])
    with pytest.raises(DomainError):
        fit_loglog([(1.0, 1.0), (2.0, float("inf")), (4.0, 3.0)])


def test_predict(sample_fit):
    assert sample_fit.predict(2.0 ** 6) == pytest.approx(2.0 ** (2.0 - 9.0))


def test_to_dict_from_dict(sample_fit):
    data = sample_fit.to_dict()
    assert data['config_hash'] == "abc"
    assert data['points'][0] == [5.0, -5.5]
    restored = FitReport.from_dict(data)
    assert restored == sample_fit
