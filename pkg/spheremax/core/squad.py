"""Quadrature on unit spheres S^{d-1}.

Deterministic rules are built from the factorisation

    int_{S^{a+b-1}} F = int_0^{pi/2} sin^{a-1}(th) cos^{b-1}(th)
                        int_{S^{a-1}} int_{S^{b-1}} F(sin(th) w1, cos(th) w2)

With a = b = n this is the ball/sphere change of variables (the outer ball
radius is |y| = sin(th), which removes the 1/sqrt(1 - |y|^2) weight); with
a = 2n - 1, b = 1 it is the hemisphere-graph parameterisation. Monte Carlo
uses normalised Gaussian vectors drawn from counter-based substreams.
"""

import enum
import logging
import math

import numpy as np

from ..errors import ConvergenceError, DomainError
from ..utils.parallel import ordered_map, pairwise_sum
from ..utils.rng import SHARD_SIZE, shard_sizes, stream
from .specfn import sphere_measure

logger = logging.getLogger(__name__)


class SphereMethod(enum.Enum):
    MONTE_CARLO = "MonteCarlo"
    PRODUCT = "Product"
    CHANGE_OF_VARIABLES = "ChangeOfVariables"
    HEMISPHERE_GRAPH = "HemisphereGraph"


class SphereRule:
    """Nodes and positive weights on S^{d-1}.

    Flat rules hold their nodes; factorised rules keep the angular nodes and
    the two factor rules and produce one block of nodes per angle.
    """

    def __init__(self, d, method, nodes=None, weights=None, factors=None, params=None):
        self.d = int(d)
        self.method = method
        self.params = dict(params or {})
        self._nodes = nodes
        self._weights = weights
        self._factors = factors

    @classmethod
    def factorised(cls, method, theta, theta_weights, first, second, params=None):
        a, b = first.d, second.d
        w = theta_weights * np.sin(theta) ** (a - 1) * np.cos(theta) ** (b - 1)
        return cls(a + b, method, factors=(theta, w, first, second), params=params)

    def blocks(self):
        if self._factors is None:
            yield self._nodes, self._weights
            return
        theta, theta_w, first, second = self._factors
        x1, w1 = first.nodes, first.weights
        x2, w2 = second.nodes, second.weights
        pair_w = np.outer(w1, w2).ravel()
        left = np.repeat(x1, len(x2), axis=0)
        right = np.tile(x2, (len(x1), 1))
        for th, wt in zip(theta, theta_w):
            yield np.hstack([np.sin(th) * left, np.cos(th) * right]), wt * pair_w

    @property
    def nodes(self):
        if self._nodes is not None:
            return self._nodes
        return np.vstack([x for x, _ in self.blocks()])

    @property
    def weights(self):
        if self._weights is not None:
            return self._weights
        return np.concatenate([w for _, w in self.blocks()])

    def __len__(self):
        if self._factors is None:
            return len(self._weights)
        theta, _, first, second = self._factors
        return len(theta) * len(first) * len(second)

    def integrate(self, F):
        """Weighted sum of F over the nodes; F maps an (M, d) array to M values."""
        parts = ordered_map(lambda block: np.dot(block[1], F(block[0])), list(self.blocks()))
        return pairwise_sum(parts)


def _flat(d, method, nodes, weights, **params):
    return SphereRule(d, method, nodes=np.asarray(nodes, dtype=float),
                      weights=np.asarray(weights, dtype=float), params=params)


def _half_angle_nodes(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1) * np.pi / 4, w * np.pi / 4


def sphere_rule(d, resolution=8):
    """Deterministic product rule on S^{d-1}."""
    if int(d) != d or d < 1:
        raise DomainError(f"sphere_rule: dimension must be a positive integer, got {d}")
    d, m = int(d), int(resolution)
    if m < 1:
        raise DomainError(f"sphere_rule: resolution must be >= 1, got {resolution}")
    if d == 1:
        return _flat(1, SphereMethod.PRODUCT, [[1.0], [-1.0]], [1.0, 1.0], resolution=m)
    if d == 2:
        angles = np.pi * np.arange(2 * m) / m
        nodes = np.column_stack([np.cos(angles), np.sin(angles)])
        return _flat(2, SphereMethod.PRODUCT, nodes, np.full(2 * m, np.pi / m), resolution=m)
    if d == 3:
        x, w = np.polynomial.legendre.leggauss(m)
        angles = np.pi * np.arange(2 * m) / m
        ct = np.repeat(x, 2 * m)
        st = np.sqrt(1 - ct ** 2)
        az = np.tile(angles, m)
        nodes = np.column_stack([st * np.cos(az), st * np.sin(az), ct])
        return _flat(3, SphereMethod.PRODUCT, nodes, np.repeat(w, 2 * m) * np.pi / m, resolution=m)
    a = d // 2
    theta, tw = _half_angle_nodes(m)
    rule = SphereRule.factorised(SphereMethod.PRODUCT, theta, tw,
                                 sphere_rule(a, m), sphere_rule(d - a, m), {'resolution': m})
    # sub-rules are small enough to flatten
    return _flat(d, SphereMethod.PRODUCT, rule.nodes, rule.weights, resolution=m)


def sample_sphere(d, rng, size=None):
    """Uniform point(s) on S^{d-1} from normalised isotropic Gaussians."""
    if int(d) != d or d < 1:
        raise DomainError(f"sample_sphere: dimension must be a positive integer, got {d}")
    shape = (int(d),) if size is None else (int(size), int(d))
    g = rng.standard_normal(shape)
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / norm


def monte_carlo_rule(d, samples, seed):
    """Equal-weight rule on Monte Carlo nodes, drawn shard by shard."""
    nodes = np.vstack([sample_sphere(d, stream(seed, k), size)
                       for k, size in enumerate(shard_sizes(samples))])
    weights = np.full(len(nodes), sphere_measure(d) / len(nodes))
    return _flat(d, SphereMethod.MONTE_CARLO, nodes, weights, samples=int(samples), seed=int(seed))


def integrate_mc(d, F, samples, seed):
    """Monte Carlo integral of F over S^{d-1}: returns (value, standard_error).

    Shard k draws from substream (seed, k), so results do not depend on the
    number of workers.
    """
    if samples < 2:
        raise DomainError(f"integrate_mc: need at least 2 samples, got {samples}")

    def shard(item):
        k, size = item
        values = np.asarray(F(sample_sphere(d, stream(seed, k), size)))
        if values.shape == ():
            values = np.full(size, values)
        return values.sum(), (np.abs(values - values.mean()) ** 2).sum(), size, values.mean()

    results = ordered_map(shard, list(enumerate(shard_sizes(samples, SHARD_SIZE))))
    total = pairwise_sum([r[0] for r in results])
    mean = total / samples
    # combine per-shard sums of squares around the global mean
    ss = pairwise_sum([r[1] + r[2] * abs(r[3] - mean) ** 2 for r in results])
    variance = ss / (samples - 1)
    measure = sphere_measure(d)
    se = measure * math.sqrt(variance / samples)
    logger.debug("integrate_mc: d=%d samples=%d value=%s se=%.3e", d, samples, measure * mean, se)
    return measure * mean, se


def _default_resolution(n):
    # (outer angular nodes, inner sphere resolution)
    return {1: (32, 1), 2: (32, 16), 3: (16, 6)}.get(n, (12, 4))


def cov_rule(n, outer=None, inner=None):
    """Ball/sphere change-of-variables rule on S^{2n-1}: outer |y| = sin(th), inner radius cos(th)."""
    if int(n) != n or n < 1:
        raise DomainError(f"cov_rule: n must be a positive integer, got {n}")
    n = int(n)
    d_outer, d_inner = _default_resolution(n)
    outer = outer or d_outer
    inner = inner or d_inner
    theta, tw = _half_angle_nodes(outer)
    base = sphere_rule(n, inner)
    return SphereRule.factorised(SphereMethod.CHANGE_OF_VARIABLES, theta, tw, base, base,
                                 {'outer': outer, 'inner': inner})


def hemigraph_rule(n, outer=None, inner=None):
    """Hemisphere-graph rule: x' = sin(th) w in B_{2n-1}, last coordinate +-cos(th)."""
    if int(n) != n or n < 1:
        raise DomainError(f"hemigraph_rule: n must be a positive integer, got {n}")
    n = int(n)
    d_outer, d_inner = _default_resolution(n)
    outer = outer or d_outer
    inner = inner or d_inner
    theta, tw = _half_angle_nodes(outer)
    return SphereRule.factorised(SphereMethod.HEMISPHERE_GRAPH, theta, tw,
                                 sphere_rule(2 * n - 1, inner), sphere_rule(1),
                                 {'outer': outer, 'inner': inner})


def _refine(label, build, evaluate, rel_tol, max_refinements):
    trace = [evaluate(build(0))]
    for level in range(1, max_refinements + 1):
        trace.append(evaluate(build(level)))
        previous, current = trace[-2], trace[-1]
        if abs(current - previous) <= rel_tol * max(abs(current), 1e-300):
            logger.debug("%s: value=%s levels=%d", label, current, len(trace))
            return current
    raise ConvergenceError(f"{label}: refinement did not reach {rel_tol}", trace)


def integrate_cov(n, F, outer=None, inner=None, rel_tol=1e-4, max_refinements=2):
    """Integral over S^{2n-1} of F(y, z) through the ball/sphere factorisation.

    The rule is refined by doubling both resolutions until consecutive values
    agree to ``rel_tol``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"integrate_cov: n must be a positive integer, got {n}")
    n = int(n)
    d_outer, d_inner = _default_resolution(n)
    outer = outer or d_outer
    inner = inner or d_inner

    def evaluate(rule):
        return rule.integrate(lambda w: F(w[:, :n], w[:, n:]))

    return _refine("integrate_cov",
                   lambda level: cov_rule(n, outer * 2 ** level, inner * 2 ** level),
                   evaluate, rel_tol, max_refinements)


def integrate_hemigraph(n, F, outer=None, inner=None, rel_tol=1e-4, max_refinements=2):
    """Integral over S^{2n-1} of F(y, z) summing the upper and lower hemisphere graphs."""
    if int(n) != n or n < 1:
        raise DomainError(f"integrate_hemigraph: n must be a positive integer, got {n}")
    n = int(n)
    d_outer, d_inner = _default_resolution(n)
    outer = outer or d_outer
    inner = inner or d_inner

    def evaluate(rule):
        return rule.integrate(lambda w: F(w[:, :n], w[:, n:]))

    return _refine("integrate_hemigraph",
                   lambda level: hemigraph_rule(n, outer * 2 ** level, inner * 2 ** level),
                   evaluate, rel_tol, max_refinements)


def weight_factorization_residual(y, omega_prime):
    """|sqrt(1-|w'|^2) sqrt(1-|y|^2) - sqrt(1-|y|^2-|z'|^2)| with z' = sqrt(1-|y|^2) w'."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    omega_prime = np.atleast_2d(np.asarray(omega_prime, dtype=float))
    ry2 = 1.0 - np.sum(y ** 2, axis=-1)
    w2 = np.sum(omega_prime ** 2, axis=-1)
    if np.any(ry2 < 0) or np.any(w2 > 1):
        raise DomainError("weight_factorization_residual: points must lie in the unit balls")
    z_prime = np.sqrt(ry2)[:, None] * omega_prime
    lhs = np.sqrt(1 - w2) * np.sqrt(ry2)
    rhs = np.sqrt(np.clip(ry2 - np.sum(z_prime ** 2, axis=-1), 0.0, None))
    return np.abs(lhs - rhs)
