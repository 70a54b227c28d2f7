"""Symbol calculus for the dyadic decomposition of the bilinear multiplier.

A bilinear symbol sigma(xi, eta) on R^n x R^n that is radial in each factor is
stored through its reduced profile s(u, v), u = |xi|, v = |eta|. Kinds:

    FULL           dsigma_hat(2n, r), r = |(xi, eta)|
    PIECE          m_j  = dsigma_hat * phi(2^-j r)   (phi0 for j = 0)
    DIAG           m_j^1 = m_j * rho(log2(u/v) / j)
    OFFDIAG        m_j^2 = m_j - m_j^1
    EULER          (xi, eta) . grad m_j
    EULER_DIAG     rho(log2(u/v) / j) * (xi, eta) . grad m_j
    EULER_OFFDIAG  EULER - EULER_DIAG
    CUSTOM         caller supplied profile with declared support radii
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from ..errors import ConvergenceError, DomainError
from ..utils.parallel import ordered_map
from ..utils.rng import stream
from . import specfn

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.1


class SymbolKind(enum.Enum):
    FULL = "full"
    PIECE = "piece"
    DIAG = "diag"
    OFFDIAG = "offdiag"
    EULER = "euler"
    EULER_DIAG = "euler_diag"
    EULER_OFFDIAG = "euler_offdiag"
    CUSTOM = "custom"


SPLIT_KINDS = (SymbolKind.DIAG, SymbolKind.OFFDIAG, SymbolKind.EULER_DIAG, SymbolKind.EULER_OFFDIAG)


def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _h_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def phi0(s):
    """Smooth cutoff: 1 on [0, 1], 0 on [2, inf), strictly decreasing between."""
    s_arr = np.asarray(s, dtype=float)
    a = _h(2.0 - s_arr)
    b = _h(s_arr - 1.0)
    return _scalar_or_array(a / (a + b), s)


def phi0_deriv(s):
    s_arr = np.asarray(s, dtype=float)
    a = _h(2.0 - s_arr)
    b = _h(s_arr - 1.0)
    da = -_h_deriv(2.0 - s_arr)
    db = _h_deriv(s_arr - 1.0)
    return _scalar_or_array((da * b - a * db) / (a + b) ** 2, s)


def phi(s):
    """Dyadic bump phi0(s) - phi0(2s), supported in [1/2, 2]."""
    s_arr = np.asarray(s, dtype=float)
    return _scalar_or_array(phi0(s_arr) - phi0(2.0 * s_arr), s)


def phi_deriv(s):
    s_arr = np.asarray(s, dtype=float)
    return _scalar_or_array(phi0_deriv(s_arr) - 2.0 * phi0_deriv(2.0 * s_arr), s)


def _check_epsilon(epsilon):
    if not 0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")


def rho(u, epsilon=DEFAULT_EPSILON):
    """Window equal to 1 on [eps - 1, 1 - eps] and 0 outside [-1, 1]."""
    _check_epsilon(epsilon)
    u_arr = np.abs(np.asarray(u, dtype=float))
    return _scalar_or_array(phi0(1.0 + (u_arr - 1.0 + epsilon) / epsilon), u)


def log_ratio(u, v):
    """log2(u / v) with the conventions log2(0/v) = -inf, log2(u/0) = inf, log2(0/0) = 0."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.log2(u) - np.log2(v)
    return np.where((u == 0) & (v == 0), 0.0, t)


def _bump(j, r):
    if j == 0:
        return phi0(r)
    return phi(r / 2.0 ** j)


def _bump_deriv(j, r):
    if j == 0:
        return phi0_deriv(r)
    return phi_deriv(r / 2.0 ** j) / 2.0 ** j


def piece_radial(n, j, r):
    """m_j as a function of r = |(xi, eta)|."""
    r = np.asarray(r, dtype=float)
    return specfn.dsigma_hat(2 * n, r) * _bump(j, r)


def euler_radial(n, j, r):
    """r d/dr of m_j, zero at the origin."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    rp = r[pos]
    out[pos] = rp * (specfn.dsigma_hat_deriv(2 * n, rp) * _bump(j, rp)
                     + specfn.dsigma_hat(2 * n, rp) * _bump_deriv(j, rp))
    return out


@dataclass(frozen=True)
class RadialBilinearSymbol:
    n: int
    j: Optional[int]
    kind: SymbolKind
    epsilon: float = DEFAULT_EPSILON
    profile: Callable = field(default=None, repr=False, compare=False)
    # (r_min, r_max) of the support in r = |(xi, eta)|; None when not compact
    support: Optional[Tuple[float, float]] = None

    def __call__(self, u, v):
        u = np.abs(np.asarray(u, dtype=float))
        v = np.abs(np.asarray(v, dtype=float))
        u, v = np.broadcast_arrays(u, v)
        out = np.asarray(self.profile(u, v), dtype=float)
        return float(out) if out.ndim == 0 else out

    def evaluate(self, xi, eta):
        """sigma(xi, eta) for vectors whose last axis has length n."""
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        if xi.shape[-1] != self.n or eta.shape[-1] != self.n:
            raise DomainError(f"evaluate: expected trailing axis of length {self.n}")
        return self(np.linalg.norm(xi, axis=-1), np.linalg.norm(eta, axis=-1))

    @property
    def compact(self):
        return self.support is not None

    def label(self):
        return f"{self.kind.value}(n={self.n}, j={self.j})"


def _dyadic_support(j):
    if j == 0:
        return (0.0, 2.0)
    return (2.0 ** (j - 1), 2.0 ** (j + 1))


def make_symbol(n, j=None, kind=SymbolKind.PIECE, epsilon=DEFAULT_EPSILON, profile=None, support=None):
    """Build the reduced profile of one of the symbols listed in the module docstring."""
    if isinstance(kind, str):
        kind = SymbolKind(kind)
    if int(n) != n or n < 1:
        raise DomainError(f"make_symbol: n must be a positive integer, got {n}")
    n = int(n)
    _check_epsilon(epsilon)

    if kind is SymbolKind.CUSTOM:
        if profile is None:
            raise DomainError("make_symbol: CUSTOM kind needs a profile")
        return RadialBilinearSymbol(n, j, kind, epsilon, profile, support)
    if kind is SymbolKind.FULL:
        if j is not None:
            raise DomainError("make_symbol: the full symbol takes no dyadic index")
        return RadialBilinearSymbol(
            n, None, kind, epsilon, lambda u, v: specfn.dsigma_hat(2 * n, np.hypot(u, v)), None)

    if j is None or int(j) != j or j < 0:
        raise DomainError(f"make_symbol: {kind.value} needs a dyadic index j >= 0, got {j}")
    j = int(j)
    if kind in SPLIT_KINDS and j < 1:
        raise DomainError(f"make_symbol: {kind.value} needs j >= 1")

    def window(u, v):
        return rho(log_ratio(u, v) / j, epsilon)

    profiles = {
        SymbolKind.PIECE: lambda u, v: piece_radial(n, j, np.hypot(u, v)),
        SymbolKind.DIAG: lambda u, v: piece_radial(n, j, np.hypot(u, v)) * window(u, v),
        SymbolKind.OFFDIAG: lambda u, v: piece_radial(n, j, np.hypot(u, v)) * (1.0 - window(u, v)),
        SymbolKind.EULER: lambda u, v: euler_radial(n, j, np.hypot(u, v)),
        SymbolKind.EULER_DIAG: lambda u, v: euler_radial(n, j, np.hypot(u, v)) * window(u, v),
        SymbolKind.EULER_OFFDIAG: lambda u, v: euler_radial(n, j, np.hypot(u, v)) * (1.0 - window(u, v)),
    }
    return RadialBilinearSymbol(n, j, kind, epsilon, profiles[kind], _dyadic_support(j))


def decay_targets(n):
    """Exponents of the sup bounds on d(m_j^1), d(tilde m_j^1) and of the L2 growth of tilde m_j^1."""
    return {
        'diag_gradient': -(2 * n - 1) / 2,
        'euler_diag_gradient': -(2 * n - 3) / 2,
        'euler_diag_l2': 1.5,
    }


# ---------------------------------------------------------------------------
# norms


FD_STEP = 1e-4
WINDOW_BAND_SAMPLES = 33


def _check_alpha(n, alpha):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != 2 * n or any(a < 0 for a in alpha):
        raise DomainError(f"alpha must be a multi-index of length {2 * n}, got {alpha}")
    if sum(alpha) > 2:
        raise DomainError(f"derivatives of order {sum(alpha)} are not supported (max 2)")
    return alpha


def _partials(sym, u, v, order, h=FD_STEP):
    """Central differences of the profile; reflection keeps u, v >= 0 (the profile is even)."""
    s = sym(u, v)
    out = {'s': s}
    if order == 0:
        return out
    up, um = u + h, np.abs(u - h)
    vp, vm = v + h, np.abs(v - h)
    s_up, s_um = sym(up, v), sym(um, v)
    s_vp, s_vm = sym(u, vp), sym(u, vm)
    out['u'] = (s_up - s_um) / (2 * h)
    out['v'] = (s_vp - s_vm) / (2 * h)
    if order == 2:
        out['uu'] = (s_up - 2 * s + s_um) / h ** 2
        out['vv'] = (s_vp - 2 * s + s_vm) / h ** 2
        out['uv'] = (sym(up, vp) - sym(up, vm) - sym(um, vp) + sym(um, vm)) / (4 * h * h)
    return out


def _over(a, b, fallback):
    # a / b with the axis limit a / b -> fallback where b vanishes
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = a / b
    return np.where(b > 1e-12, ratio, fallback)


def _directional_bound(n, alpha, d):
    """Sup over directions of |d^alpha sigma| at fixed (u, v), through the chain rule."""
    order = sum(alpha)
    if order == 0:
        return np.abs(d['s'])
    xi_idx = [i for i in range(n) for _ in range(alpha[i])]
    eta_idx = [i for i in range(n) for _ in range(alpha[n + i])]
    if order == 1:
        return np.abs(d['u'] if xi_idx else d['v'])
    if len(xi_idx) == 1:
        return np.abs(d['uv'])
    key, var = ('uu', 'u') if xi_idx else ('vv', 'v')
    idx = xi_idx or eta_idx
    radius = d['_u'] if var == 'u' else d['_v']
    first_over_radius = _over(d[var], radius, d[key])
    if idx[0] == idx[1]:
        if n == 1:
            return np.abs(d[key])
        return np.maximum(np.abs(d[key]), np.abs(first_over_radius))
    return np.abs(d[key] - first_over_radius) / 2


def _band_grid(sym, nr, nt):
    r_lo, r_hi = sym.support
    r = np.linspace(max(r_lo, 0.0), r_hi, nr)
    span = (sym.j or 0) + 8
    t = np.linspace(-span, span, nt)
    if sym.kind in SPLIT_KINDS:
        # the window varies only for (1 - eps) j <= |log2(u/v)| <= j
        band = np.linspace((1.0 - sym.epsilon) * sym.j, sym.j, WINDOW_BAND_SAMPLES)
        t = np.unique(np.concatenate([t, band, -band]))
    # u = r cos(theta), v = r sin(theta) with log2(u/v) = t, plus both axes
    cos_t = np.concatenate([[0.0], 1.0 / np.sqrt(1.0 + 2.0 ** (-2 * t)), [1.0]])
    sin_t = np.concatenate([[1.0], 1.0 / np.sqrt(1.0 + 2.0 ** (2 * t)), [0.0]])
    return r, cos_t, sin_t


def _sup_on_grid(sym, alpha, nr, nt, chunk=256):
    r, cos_t, sin_t = _band_grid(sym, nr, nt)
    order = sum(alpha)

    def block(start):
        rr = r[start:start + chunk, None]
        u = rr * cos_t[None, :]
        v = rr * sin_t[None, :]
        d = _partials(sym, u, v, order)
        d['_u'], d['_v'] = u, v
        return float(np.max(_directional_bound(sym.n, alpha, d)))

    return max(ordered_map(block, range(0, len(r), chunk)))


def sup_norm_partial(sym, alpha, samples_per_unit=8, rel_tol=0.05, max_doublings=6):
    """Estimate sup |d^alpha sigma| over the support by grid doubling.

    ``alpha`` is a multi-index of length 2n (xi coordinates first), order <= 2.
    """
    alpha = _check_alpha(sym.n, alpha)
    if not sym.compact:
        raise DomainError("sup_norm_partial: symbol must have compact support")
    r_lo, r_hi = sym.support
    nr = max(64, int(math.ceil(samples_per_unit * (r_hi - r_lo))))
    nt = 8 * ((sym.j or 0) + 8) + 1

    trace = [_sup_on_grid(sym, alpha, nr, nt)]
    for _ in range(max_doublings):
        nr *= 2
        trace.append(_sup_on_grid(sym, alpha, nr, nt))
        previous, current = trace[-2], trace[-1]
        if abs(current - previous) <= rel_tol * max(abs(current), 1e-300):
            logger.debug("sup_norm_partial: %s alpha=%s value=%.6e levels=%d",
                         sym.label(), alpha, current, len(trace))
            return current
        if current == 0.0 and previous == 0.0:
            return 0.0
    raise ConvergenceError(f"sup_norm_partial: {sym.label()} alpha={alpha} did not settle", trace)


def difference_quotient_sup(sym, axis=0, step=1e-3, samples=20000, seed=0):
    """max |sigma(x + step e_axis) - sigma(x)| / step over random x in the support.

    x ranges over R^{2n} (xi coordinates first). By the mean value theorem the
    result never exceeds sup |d sigma / dx_axis|, which makes it a check on
    ``sup_norm_partial``.
    """
    if not sym.compact:
        raise DomainError("difference_quotient_sup: symbol must have compact support")
    n = sym.n
    if int(axis) != axis or not 0 <= axis < 2 * n:
        raise DomainError(f"difference_quotient_sup: axis must lie in [0, {2 * n}), got {axis}")
    if step <= 0:
        raise DomainError(f"difference_quotient_sup: step must be positive, got {step}")
    rng = stream(seed, n, sym.j or 0, int(axis))
    r_lo, r_hi = sym.support
    x = rng.standard_normal((samples, 2 * n))
    x *= (rng.uniform(r_lo, r_hi, samples) / np.linalg.norm(x, axis=1))[:, None]
    shifted = x.copy()
    shifted[:, int(axis)] += step
    before = sym.evaluate(x[:, :n], x[:, n:])
    after = sym.evaluate(shifted[:, :n], shifted[:, n:])
    value = float(np.max(np.abs(after - before))) / step
    logger.debug("difference_quotient_sup: %s axis=%d value=%.6e", sym.label(), axis, value)
    return value


GL_NODES = 8


def _panel_nodes(lo, hi, width, nodes=GL_NODES):
    """Composite Gauss-Legendre nodes/weights on [lo, hi] with panels of about ``width``."""
    panels = max(1, int(math.ceil((hi - lo) / width)))
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    points = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return points, weights


def _l2_squared(sym, r_width, t_width, chunk=512):
    r_lo, r_hi = sym.support
    span = (sym.j or 0) + int(math.ceil(20 / sym.n))
    r, wr = _panel_nodes(r_lo, r_hi, r_width)
    t, wt = _panel_nodes(-span, span, t_width)
    cos_t = 1.0 / np.sqrt(1.0 + 2.0 ** (-2 * t))
    sin_t = 1.0 / np.sqrt(1.0 + 2.0 ** (2 * t))
    n = sym.n
    # dtheta = ln2 cos sin dt turns (cos sin)^(n-1) dtheta into ln2 (cos sin)^n dt
    t_weight = wt * math.log(2.0) * (cos_t * sin_t) ** n

    def block(start):
        rr = r[start:start + chunk, None]
        values = sym(rr * cos_t[None, :], rr * sin_t[None, :])
        inner = (values ** 2) @ t_weight
        return float(np.sum(wr[start:start + chunk] * r[start:start + chunk] ** (2 * n - 1) * inner))

    total = float(np.sum(ordered_map(block, range(0, len(r), chunk))))
    return specfn.sphere_measure(n) ** 2 * total


def l2_norm(sym, rel_tol=1e-4, max_refinements=4):
    """L2 norm over R^{2n} through the reduced integral in polar coordinates (r, log2(u/v))."""
    if not sym.compact:
        raise DomainError(f"l2_norm: {sym.label()} is not compactly supported")
    r_width, t_width = 1.0, 1.0
    trace = [_l2_squared(sym, r_width, t_width)]
    for _ in range(max_refinements):
        r_width, t_width = r_width / 2, t_width / 2
        trace.append(_l2_squared(sym, r_width, t_width))
        previous, current = trace[-2], trace[-1]
        if current == 0.0 or abs(current - previous) <= rel_tol * abs(current):
            value = math.sqrt(max(current, 0.0))
            logger.debug("l2_norm: %s value=%.6e", sym.label(), value)
            return value
    raise ConvergenceError(f"l2_norm: {sym.label()} did not settle", [math.sqrt(max(x, 0.0)) for x in trace])
