"""Singular test pairs and the bilinear spherical average they produce far away.

For f(y) = |y|^(-n/p1) (log 1/|y|)^(-2/p1) on a small ball and g likewise
with p2, the average M_{sqrt2 R}(f, g)(R e1) only sees the sphere near
(e1, e1)/sqrt2. The integrals below are reduced to that neighbourhood:

* n = 1: with u = 1 - sqrt2 y the second argument is
  1 - sqrt2 z = -u (2 - u)/(1 + sqrt2 z); both singular factors meet at
  u = 0 and the radial variable w = R|u| is mapped to w = exp(-1/tau).
* n = 2: the outer ball variable a = R e1 - sqrt2 R y is integrated in polar
  coordinates (rho = exp(-1/tau), angle phi); the inner circle of radius
  r_y passes at distance delta from the singularity of g and is integrated
  with sigma = delta sinh(q). The angular integral is split where delta
  vanishes and desingularised with phi = phi* +- zeta^2.
* n >= 3: only the reduced radial lower bound is evaluated.

All integrands are assembled in log space; powers of rho that would
overflow cancel analytically.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize, special

from ..errors import DomainError
from ..harness.fitting import fit_loglog
from ..utils.parallel import ordered_map
from .region import threshold as _threshold
from .specfn import sphere_measure

logger = logging.getLogger(__name__)

MIN_SCALE = 100.0
QUAD_OPTIONS = {'limit': 400, 'epsabs': 0.0, 'epsrel': 1e-9}
# outer radial cut for n = 2; the neglected piece is below 1e-5 relative at the threshold
TAU_FLOOR = 1.0 / 2000.0
GL_NODES = 8


@dataclass(frozen=True)
class CexPair:
    n: int
    p1: float
    p2: float
    cutoff_f: Optional[float] = None
    cutoff_g: float = 0.5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"CexPair: n must be a positive integer, got {self.n}")
        if self.p1 < 1 or self.p2 < 1:
            raise DomainError(f"CexPair: exponents must be >= 1, got {self.p1}, {self.p2}")
        if self.cutoff_f is None:
            object.__setattr__(self, "cutoff_f", 0.5 if self.n == 1 else 0.01)
        for c in (self.cutoff_f, self.cutoff_g):
            if not 0 < c < 1:
                raise DomainError(f"CexPair: cutoff radii must lie in (0, 1), got {c}")

    @property
    def inv_p(self):
        return 1.0 / self.p1 + 1.0 / self.p2

    @property
    def p(self):
        return 1.0 / self.inv_p

    def below_threshold(self):
        return self.inv_p > float(1 / _threshold(self.n)) + 1e-12

    def exponents(self, which):
        """(cutoff, power exponent n/p_i, log exponent 2/p_i) of f or g."""
        if which == 'f':
            return self.cutoff_f, self.n / self.p1, 2.0 / self.p1
        if which == 'g':
            return self.cutoff_g, self.n / self.p2, 2.0 / self.p2
        raise DomainError(f"unknown member {which!r}; expected 'f' or 'g'")


def _log_profile(log_x, power, log_power):
    """log of x^-power (log 1/x)^-log_power for 0 < x < 1, given log x."""
    return -power * log_x - log_power * np.log(-log_x)


def eval_cex(pair, which, y):
    """Value of f or g at the point(s) y; +inf at the origin, 0 outside the ball."""
    cutoff, power, log_power = pair.exponents(which)
    y = np.asarray(y, dtype=float)
    # on the line, bare scalars and flat arrays are accepted as points
    if pair.n == 1 and (y.ndim == 0 or y.shape[-1] != 1):
        radius = np.abs(y)
    else:
        radius = np.linalg.norm(y, axis=-1)
    radius = np.asarray(radius, dtype=float)
    out = np.zeros_like(radius)
    inside = (radius > 0) & (radius <= cutoff)
    out[inside] = np.exp(_log_profile(np.log(radius[inside]), power, log_power))
    out[radius == 0] = np.inf
    return float(out) if out.ndim == 0 else out


def _unit_direction(n, direction):
    """``direction`` as a unit vector of R^n; e1 when None."""
    if direction is None:
        u = np.zeros(n)
        u[0] = 1.0
        return u
    u = np.atleast_1d(np.asarray(direction, dtype=float))
    norm = np.linalg.norm(u)
    if u.shape != (n,) or not np.isfinite(norm) or norm == 0:
        raise DomainError(f"direction must be a nonzero vector of R^{n}, got {direction}")
    return u / norm


def cex_integrand(pair, R, y, z, direction=None):
    """f(R u - sqrt2 R y) g(R u - sqrt2 R z) for points (y, z) of R^n x R^n; u defaults to e1.

    The product is 0 wherever either factor lies outside its support, including
    where the other factor sits on its singularity.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    u = _unit_direction(pair.n, direction)
    a = R * u - math.sqrt(2) * R * y
    b = R * u - math.sqrt(2) * R * z
    fa = np.atleast_1d(eval_cex(pair, 'f', a))
    gb = np.atleast_1d(eval_cex(pair, 'g', b))
    with np.errstate(invalid="ignore"):
        return np.where((fa == 0) | (gb == 0), 0.0, fa * gb)


def _tau_of(x):
    return 1.0 / math.log(1.0 / x)


def cex_norm(pair, which):
    """int |f|^p1 (or |g|^p2) over R^n by the radial substitution rho = exp(-1/tau).

    The integrand becomes omega_{n-1} on (0, 1/log(1/cutoff)); the closed form
    is omega_{n-1}/log(1/cutoff).
    """
    cutoff, _, _ = pair.exponents(which)
    omega = sphere_measure(pair.n)
    value, _ = integrate.quad(lambda tau: omega, 0.0, _tau_of(cutoff), **QUAD_OPTIONS)
    return value


def shell_masses(pair, which, shells=30):
    """Mass of |f|^p1 on the dyadic shells 2^(-k-1) < |y| < 2^-k inside the support."""
    cutoff, _, _ = pair.exponents(which)
    omega = sphere_measure(pair.n)
    masses = []
    for k in range(shells):
        hi = min(2.0 ** -k, cutoff)
        lo = 2.0 ** (-k - 1)
        if hi <= lo:
            masses.append(0.0)
            continue
        # |f|^p1 rho^(n-1) = 1/(rho log^2(1/rho)); integrate in s = log(1/rho)
        value, _ = integrate.quad(lambda s: 1.0 / s ** 2, math.log(1.0 / hi), math.log(1.0 / lo), **QUAD_OPTIONS)
        masses.append(omega * value)
    return masses


# ---------------------------------------------------------------------------
# n = 1


def _line_branch(pair, R, sign, tau_min):
    """Contribution of u = sign * w / R to the reduced line integral."""
    cf, pf, lf = pair.exponents('f')
    cg, pg, lg = pair.exponents('g')

    def kappa(w):
        u = sign * w / R
        z = math.sqrt((1.0 + 2.0 * u - u * u) / 2.0)
        return (2.0 - u) / (1.0 + math.sqrt(2.0) * z), z

    # largest w keeping the second argument w * kappa(w) inside g's support
    w_star = optimize.brentq(lambda w: w * kappa(w)[0] - cg, 0.0, 1.0, xtol=1e-15)
    w_hi = min(cf, w_star)
    tau_hi = _tau_of(w_hi)
    if tau_min >= tau_hi:
        return 0.0, tau_hi

    def integrand(tau):
        log_w = -1.0 / tau
        k, z = kappa(math.exp(log_w))
        log_w2 = log_w + math.log(k)
        log_value = (_log_profile(log_w, pf, lf) + _log_profile(log_w2, pg, lg)
                     + log_w - 2.0 * math.log(tau) - math.log(z))
        return math.exp(log_value)

    value, _ = integrate.quad(integrand, tau_min, tau_hi, **QUAD_OPTIONS)
    return value / (math.sqrt(2.0) * R), tau_hi


def _average_line(pair, R, tau_min=0.0):
    return sum(_line_branch(pair, R, sign, tau_min)[0] for sign in (1.0, -1.0))


# ---------------------------------------------------------------------------
# n = 2


def _geometric_panels(length, panels, nodes=GL_NODES):
    """Gauss-Legendre nodes on [0, length] with panels halving towards 0."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.concatenate([[0.0], length * 2.0 ** -np.arange(panels, -1, -1)])
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo) / 2
    points = ((lo + hi) / 2)[:, None] + half[:, None] * x[None, :]
    return points.ravel(), (half[:, None] * w[None, :]).ravel()


def _two_sided_unit_panels(panels, nodes=GL_NODES):
    """Nodes on [0, 1] refined geometrically towards both ends."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    left = (2.0 ** np.arange(panels + 1) - 1) / (2.0 ** panels - 1) / 2
    edges = np.unique(np.concatenate([left, 1.0 - left]))
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo) / 2
    points = ((lo + hi) / 2)[:, None] + half[:, None] * x[None, :]
    return points.ravel(), (half[:, None] * w[None, :]).ravel()


class _PlaneIntegrator:
    """Reduced integral for n = 2 at the point R u.

    The outer variable is integrated in absolute polar angle; the singular
    angles sit at angle(u) +- phi*.
    """

    def __init__(self, pair, R, fold=True, direction=None, angular_panels=16, inner_panels=12):
        self.pair = pair
        self.R = float(R)
        self.u = _unit_direction(2, direction)
        self.theta_u = math.atan2(self.u[1], self.u[0])
        self.fold = fold
        self.cf, self.pf, self.lf = pair.exponents('f')
        self.cg, self.pg, self.lg = pair.exponents('g')
        self.zeta_nodes = _geometric_panels(1.0, angular_panels)
        self.q_nodes = _two_sided_unit_panels(inner_panels)

    def _segments(self, phi_star):
        # (singular point, direction of the offset, segment length)
        right = [(phi_star, -1.0, phi_star), (phi_star, 1.0, math.pi - phi_star)]
        if self.fold:
            return right, 2.0
        left = [(-phi_star, 1.0, phi_star), (-phi_star, -1.0, math.pi - phi_star)]
        return right + left, 1.0

    def _angular_nodes(self, rho):
        """Offsets from the singular angles, with weights, for one outer radius."""
        phi_star = math.acos(rho / (2.0 * self.R))
        zeta, wz = self.zeta_nodes
        starts, offsets, weights = [], [], []
        segments, factor = self._segments(phi_star)
        for start, direction, length in segments:
            scale = math.sqrt(length)
            z = scale * zeta
            starts.append(np.full(z.size, start))
            offsets.append(direction * z ** 2)
            weights.append(2.0 * z * scale * wz)
        return phi_star, np.concatenate(starts), np.concatenate(offsets), factor * np.concatenate(weights)

    def _log_inner(self, log_rho, delta_hat, r):
        """log of rho^(n/p2 - 1) times the inner circle integral I, vectorised over angles."""
        R = self.R
        log_delta = log_rho + np.log(delta_hat)
        delta = np.exp(log_delta)
        sigma_max = np.sqrt(np.clip(self.cg ** 2 - delta ** 2, 0.0, None))
        # arcsinh(sigma_max / delta) for delta that may underflow
        q_max = np.log(sigma_max + np.hypot(sigma_max, delta)) - log_delta
        s, ws = self.q_nodes
        q = q_max[:, None] * s[None, :]
        log_cosh = q + np.log1p(np.exp(-2.0 * q)) - math.log(2.0)
        log_x = log_delta[:, None] + log_cosh
        sigma = np.exp(log_delta[:, None] + q + np.log(-np.expm1(-2.0 * q)) - math.log(2.0))
        # x g(x) with the rho power removed: (x/rho)^(1 - n/p2) (log 1/x)^(-2/p2)
        log_xg = (1.0 - self.pg) * (np.log(delta_hat)[:, None] + log_cosh) - self.lg * np.log(-log_x)
        log_arc = -0.5 * np.log1p(-sigma ** 2 / (4.0 * math.sqrt(2.0) * r[:, None] * R ** 2))
        log_integral = special.logsumexp(log_xg + log_arc, b=ws[None, :], axis=1) + np.log(q_max)
        return log_integral + math.log(2.0 / (2.0 ** 0.25 * R)) + 0.5 * np.log(r)

    def log_angular(self, tau):
        """log of rho^(n/p2 - 1) times the angular integral of I / (2 R^2 r_y)."""
        R = self.R
        log_rho = -1.0 / tau
        rho = math.exp(log_rho)
        phi_star, starts, offsets, weights = self._angular_nodes(rho)
        theta = self.theta_u + starts + offsets
        cos_rel = np.cos(theta) * self.u[0] + np.sin(theta) * self.u[1]
        # 2 cos(phi) - rho/R = 2 (cos(phi) - cos(phi*)) without cancellation
        half_sum = (starts + phi_star) / 2 + offsets / 2
        half_diff = (starts - phi_star) / 2 + offsets / 2
        gap = np.abs(4.0 * np.sin(half_sum) * np.sin(half_diff))
        r = np.sqrt(0.5 + rho * cos_rel / R - rho ** 2 / (2.0 * R ** 2))
        delta_hat = gap / (1.0 + math.sqrt(2.0) * r)
        with np.errstate(divide='ignore'):
            keep = (delta_hat > 0) & (log_rho + np.log(delta_hat) < math.log(self.cg))
        if not np.any(keep):
            return -math.inf
        log_values = self._log_inner(log_rho, delta_hat[keep], r[keep]) - np.log(2.0 * R ** 2 * r[keep])
        return float(special.logsumexp(log_values, b=weights[keep]))

    def outer_integrand(self, tau):
        # rho^2 f(rho) / tau^2 with the inner rho power: rho^(3 - n/p) overall
        log_rho = -1.0 / tau
        log_weight = ((2.0 - self.pf + 1.0 - self.pg) * log_rho
                      - self.lf * math.log(1.0 / tau) - 2.0 * math.log(tau))
        return math.exp(log_weight + self.log_angular(tau))

    def value(self, tau_min=TAU_FLOOR):
        tau_hi = _tau_of(self.cf)
        if tau_min >= tau_hi:
            return 0.0
        value, _ = integrate.quad(self.outer_integrand, tau_min, tau_hi,
                                  limit=200, epsabs=0.0, epsrel=1e-7)
        return value


def _check_scale(R):
    if R < MIN_SCALE:
        raise DomainError(f"scale R must be >= {MIN_SCALE:g}, got {R}")


def cex_average(pair, R, fold=True, direction=None):
    """M_{sqrt2 R}(f, g)(R u) for the pair; +inf below the threshold exponent.

    ``direction`` is u (e1 by default). The pair is radial, so on the line and
    for n >= 3 the value does not depend on it; for n = 2 the angular integral
    is taken around u. ``fold=False`` integrates the full angular range in the
    n = 2 reduction instead of doubling the half range.
    """
    _check_scale(R)
    _unit_direction(pair.n, direction)
    if pair.below_threshold():
        return math.inf
    if pair.n == 1:
        value = _average_line(pair, R)
    elif pair.n == 2:
        value = _PlaneIntegrator(pair, R, fold=fold, direction=direction).value()
    else:
        value = cex_lower_bound(pair, R)
    logger.debug("cex_average: n=%d p=%.4f R=%g value=%.6e", pair.n, pair.p, R, value)
    return value


def _radial_bound_integral(pair, lower=0.0, upper=0.01):
    """int_lower^upper r^(-n/p + 2n - 2) (log 1/r)^(-2/p) dr (inf when divergent)."""
    n, inv_p = pair.n, pair.inv_p
    exponent = -n * inv_p + 2 * n - 1
    log_power = 2.0 * inv_p
    if lower == 0.0 and exponent < -1e-12:
        return math.inf
    tau_lo = 0.0 if lower == 0.0 else _tau_of(lower)
    tau_hi = _tau_of(upper)
    if abs(exponent) <= 1e-12 and lower == 0.0:
        return tau_hi ** (log_power - 1.0) / (log_power - 1.0)

    def integrand(tau):
        return math.exp(-exponent / tau + (log_power - 2.0) * math.log(tau))

    value, _ = integrate.quad(integrand, tau_lo, tau_hi, **QUAD_OPTIONS)
    return value


def cex_lower_bound(pair, R):
    """The explicit radial lower bound c R^(1-2n) int_0^(1/100) r^(-n/p+2n-2) (log 1/r)^(-2/p) dr.

    c = 2 for n = 1 (both branches of the line integral) and 1 otherwise.
    """
    _check_scale(R)
    constant = 2.0 if pair.n == 1 else 1.0
    return constant * R ** (1 - 2 * pair.n) * _radial_bound_integral(pair)


@dataclass
class DivergenceTrace:
    cutoffs: list
    values: list = field(default_factory=list)

    def gaps(self):
        return np.diff(self.values)

    def strictly_increasing(self):
        return bool(np.all(self.gaps() > 0))

    def growth_ratio(self):
        gaps = self.gaps()
        # undefined unless the first step grows
        return float(gaps[-1] / gaps[0]) if gaps[0] > 0 else math.nan

    def cauchy(self, tol=1e-6):
        return abs(self.values[-1] - self.values[-2]) <= tol * abs(self.values[-1])

    def diverges(self):
        return self.strictly_increasing() and self.growth_ratio() > 10 and not self.cauchy()

    def to_dict(self):
        return {'cutoffs': list(self.cutoffs), 'values': list(self.values)}


def divergence_probe(pair, R=MIN_SCALE, ks=range(4, 21)):
    """Truncated averages excluding the singular set at radius < 2^(-k^2).

    The cutoff is applied to the radial variable of the reduced integral
    (w for n = 1, the radial lower-bound variable for n >= 2).
    """
    _check_scale(R)
    ks = list(ks)
    log2_cutoffs = [-(k * k) for k in ks]
    taus = [1.0 / (k * k * math.log(2.0)) for k in ks]
    values = []
    if pair.n == 1:
        for tau in taus:
            values.append(_average_line(pair, R, tau_min=tau))
    else:
        scale = R ** (1 - 2 * pair.n)
        for log2_cut in log2_cutoffs:
            values.append(scale * _radial_bound_integral(pair, lower=2.0 ** log2_cut))
    trace = DivergenceTrace([float(c) for c in log2_cutoffs], values)
    logger.debug("divergence_probe: n=%d p=%.3f ratio=%s", pair.n, pair.p, trace.growth_ratio())
    return trace


def growth_floor(pair, R_list, config_hash=""):
    """Log-log fit of cex_average against R."""
    R_list = sorted(float(R) for R in R_list)
    if len(R_list) < 5:
        raise DomainError(f"growth_floor: need at least 5 scales, got {len(R_list)}")
    if R_list[0] < 2.0 ** 10:
        raise DomainError(f"growth_floor: smallest scale must be >= 2^10, got {R_list[0]}")
    values = ordered_map(lambda R: cex_average(pair, R), R_list)
    return fit_loglog(list(zip(R_list, values)), config_hash)


# ---------------------------------------------------------------------------
# monotonicity lemma


def _log_F(x, r1, r2):
    x = np.asarray(x, dtype=float)
    if r2 == 0:
        return r1 * np.log(x)
    return r1 * np.log(x) - r2 * np.log(np.log(x))


def monotone_since(r1, r2):
    """Threshold exp(r2/r1) beyond which x^r1 (log x)^-r2 increases."""
    if r1 <= 0 or r2 < 0:
        raise DomainError(f"monotone_since: need r1 > 0 and r2 >= 0, got {r1}, {r2}")
    return math.exp(r2 / r1)


def is_increasing_from(r1, r2, x0, x_max=1e6, samples=4096):
    """Sample x^r1 (log x)^-r2 geometrically on [x0, x_max] and check it never decreases."""
    start = max(x0, 1.0 + 1e-12)
    if start >= x_max:
        return True
    x = np.geomspace(start, x_max, samples)
    values = _log_F(x, r1, r2)
    return bool(np.all(np.diff(values) >= -1e-12 * np.maximum(1.0, np.abs(values[1:]))))


def lemma_constant(C, r1, r2):
    """C' with s^-r1 (log 1/s)^-r2 <= C' t^-r1 (log 1/t)^-r2 whenever t <= C s <= 1/10, C >= 1."""
    if C < 1:
        raise DomainError(f"lemma_constant: C must be >= 1, got {C}")
    x_min = max(monotone_since(r1, r2), 10.0)
    # F dips to its minimum at x_min on [10, inf) before increasing
    dip = math.exp(float(_log_F(10.0, r1, r2) - _log_F(x_min, r1, r2)))
    return C ** r1 * max(1.0, dip)


def lemma_violations(r1, r2, trials, rng):
    """Count random triples (s, t, C) with t <= C s <= 1/10 breaking the inequality."""
    C = rng.uniform(1.0, 10.0, trials)
    s = 10.0 ** -rng.uniform(1.0, 12.0, trials) / C
    t = C * s * 10.0 ** -rng.uniform(0.0, 8.0, trials)
    c_prime = np.array([lemma_constant(c, r1, r2) for c in C])
    lhs = _log_F(1.0 / s, r1, r2)
    rhs = np.log(c_prime) + _log_F(1.0 / t, r1, r2)
    return int(np.sum(lhs > rhs + 1e-12 * np.abs(rhs)))
