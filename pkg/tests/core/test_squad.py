import math

import numpy as np
import pytest

from spheremax.core import squad
from spheremax.core.specfn import dsigma_hat, sphere_measure
from spheremax.core.squad import SphereMethod
from spheremax.errors import DomainError
from spheremax.utils.parallel import set_worker_limit


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_sphere_rule_total_measure(d):
    rule = squad.sphere_rule(d, 16)
    assert rule.integrate(lambda w: np.ones(len(w))) == pytest.approx(sphere_measure(d), rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_sphere_rule_nodes_on_sphere(d):
    rule = squad.sphere_rule(d, 6)
    assert rule.nodes.shape[1] == d
    assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1.0)
    assert np.all(rule.weights > 0)
    assert rule.method is SphereMethod.PRODUCT


@pytest.mark.parametrize("d", [3, 4, 6])
def test_sphere_rule_second_moment(d):
    rule = squad.sphere_rule(d, 8)
    value = rule.integrate(lambda w: w[:, 0] ** 2)
    assert value == pytest.approx(sphere_measure(d) / d, rel=1e-10)


def test_sphere_rule_reproduces_dsigma_hat():
    rule = squad.sphere_rule(4, 24)
    xi = np.array([1.3, 0.0, 0.0, 0.0])
    value = rule.integrate(lambda w: np.cos(2 * np.pi * w @ xi))
    assert value == pytest.approx(dsigma_hat(4, 1.3), abs=1e-10)


def test_sphere_rule_validation():
    with pytest.raises(DomainError):
        squad.sphere_rule(0)
    with pytest.raises(DomainError):
        squad.sphere_rule(3, 0)


def test_sample_sphere_unit_norm(rng):
    points = squad.sample_sphere(5, rng, 100)
    assert points.shape == (100, 5)
    assert np.allclose(np.linalg.norm(points, axis=1), 1.0)
    assert squad.sample_sphere(3, rng).shape == (3,)


def test_monte_carlo_rule():
    rule = squad.monte_carlo_rule(4, 1000, seed=3)
    assert rule.method is SphereMethod.MONTE_CARLO
    assert len(rule) == 1000
    assert rule.weights.sum() == pytest.approx(sphere_measure(4))


def test_integrate_mc_constant():
    value, se = squad.integrate_mc(4, lambda w: np.ones(len(w)), 5000, seed=1)
    assert value == pytest.approx(sphere_measure(4), rel=1e-14)
    assert se == 0.0


def test_integrate_mc_within_standard_errors():
    value, se = squad.integrate_mc(4, lambda w: w[:, 0] ** 2, 200_000, seed=11)
    assert abs(value - sphere_measure(4) / 4) <= 4 * se


def test_integrate_mc_independent_of_workers():
    def F(w):
        return np.exp(w[:, 0])

    serial = squad.integrate_mc(4, F, 3 * 65536 + 17, seed=5)
    set_worker_limit(4)
    threaded = squad.integrate_mc(4, F, 3 * 65536 + 17, seed=5)
    assert serial == threaded


def test_integrate_mc_rejects_too_few_samples():
    with pytest.raises(DomainError):
        squad.integrate_mc(3, lambda w: w[:, 0], 1, seed=0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cov_constant_and_second_moment(n):
    omega = sphere_measure(2 * n)
    assert squad.integrate_cov(n, lambda y, z: np.ones(len(y))) == pytest.approx(omega, rel=1e-6)
    value = squad.integrate_cov(n, lambda y, z: np.sum(y ** 2, axis=1))
    assert value == pytest.approx(omega / 2, rel=1e-5)


@pytest.mark.parametrize("n", [1, 2])
def test_hemigraph_matches_cov(n):
    a = np.linspace(0.2, 0.6, n)

    def F(y, z):
        return np.exp(y @ a - z @ a) * (1 + z[:, 0] ** 2)

    assert squad.integrate_hemigraph(n, F) == pytest.approx(squad.integrate_cov(n, F), rel=1e-4)


def test_cov_on_the_line_matches_circle():
    def F(y, z):
        return np.exp(0.3 * y[:, 0] - 0.7 * z[:, 0])

    circle = squad.sphere_rule(2, 512).integrate(lambda w: F(w[:, :1], w[:, 1:]))
    assert squad.integrate_cov(1, F) == pytest.approx(circle, rel=1e-8)


def test_cov_rule_structure():
    rule = squad.cov_rule(2, 4, 3)
    assert rule.method is SphereMethod.CHANGE_OF_VARIABLES
    assert len(rule) == 4 * 6 * 6
    y = rule.nodes[:, :2]
    z = rule.nodes[:, 2:]
    assert np.allclose(np.sum(y ** 2, axis=1) + np.sum(z ** 2, axis=1), 1.0)


def test_weight_factorization_residual(rng):
    y = squad.sample_sphere(3, rng, 500) * 0.9 * rng.uniform(0, 1, (500, 1))
    w = squad.sample_sphere(2, rng, 500) * 0.9 * rng.uniform(0, 1, (500, 1))
    assert np.max(squad.weight_factorization_residual(y, w)) <= 1e-14


def test_weight_factorization_residual_checks_balls():
    with pytest.raises(DomainError):
        squad.weight_factorization_residual(np.array([[1.5, 0.0]]), np.array([[0.0]]))


def test_integrate_cov_validates_n():
    with pytest.raises(DomainError):
        squad.integrate_cov(0, lambda y, z: np.ones(len(y)))
    with pytest.raises(DomainError):
        squad.integrate_hemigraph(1.5, lambda y, z: np.ones(len(y)))


def test_measures_of_small_spheres():
    assert squad.sphere_rule(1).integrate(lambda w: np.ones(len(w))) == 2.0
    assert squad.sphere_rule(2, 16).integrate(lambda w: w[:, 0] ** 2) == pytest.approx(math.pi)


@pytest.mark.parametrize("n", [1, 2])
def test_hemigraph_rule_weights(n):
    rule = squad.hemigraph_rule(n)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(sphere_measure(2 * n), rel=1e-6)
    assert np.allclose(np.sum(rule.nodes ** 2, axis=1), 1.0)
