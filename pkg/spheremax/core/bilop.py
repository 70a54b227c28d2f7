"""Bilinear spherical averages, maximal operators and square functions on periodic grids.

A ``GridFunction`` samples a function on the torus [0, L)^n at N points per
axis. Its coefficients c_k = DFT(values)/N^n expand the trigonometric
interpolant sum_k c_k exp(2 pi i k.x/L), so c_k approximates f_hat(k/L)/L^n
for functions decayed well inside the box.

For a symbol sigma the bilinear multiplier at radius t is realised as

    T_t(f, g)(x) = sum_{k,l} c_k d_l sigma(t k/L, t l/L) exp(2 pi i (k+l).x/L),

which at grid nodes equals the continuum operator applied to the
interpolants of f and g. Pairs (k, l) are accumulated onto the wrapped index
(k + l) mod N and inverted with one FFT.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from ..errors import DomainError
from ..utils import grid_io
from ..utils.parallel import ordered_map, pairwise_sum
from ..utils.rng import stream
from . import specfn
from .symbols import RadialBilinearSymbol, SymbolKind, make_symbol

logger = logging.getLogger(__name__)

DEFAULT_T_RATIO = 2.0 ** (1.0 / 16.0)
DECAY_TOLERANCE = 1e-10


def _is_power_of_two(N):
    return N >= 1 and (N & (N - 1)) == 0


@dataclass(frozen=True)
class GridFunction:
    n: int
    N: int
    L: float
    values: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"GridFunction: n must be >= 1, got {self.n}")
        if not _is_power_of_two(int(self.N)):
            raise DomainError(f"GridFunction: N must be a power of two, got {self.N}")
        if self.L <= 0:
            raise DomainError(f"GridFunction: L must be positive, got {self.L}")
        values = np.asarray(self.values)
        if values.shape != (self.N,) * self.n:
            raise DomainError(f"GridFunction: expected shape {(self.N,) * self.n}, got {values.shape}")
        object.__setattr__(self, "values", values)

    # construction ---------------------------------------------------------

    @classmethod
    def zeros(cls, n, N, L):
        return cls(n, N, L, np.zeros((N,) * n, dtype=complex))

    @classmethod
    def from_function(cls, func, n, N, L):
        """Sample ``func`` (points of shape (..., n) -> values) at the grid nodes."""
        blank = cls.zeros(n, N, L)
        return cls(n, N, L, np.asarray(func(blank.nodes()), dtype=complex))

    @classmethod
    def from_fourier(cls, coeffs, n, N, L):
        coeffs = np.asarray(coeffs).reshape((N,) * n)
        return cls(n, N, L, sp_fft.ifftn(coeffs) * N ** n)

    # geometry -------------------------------------------------------------

    @property
    def spacing(self):
        return self.L / self.N

    @property
    def cell_volume(self):
        return self.spacing ** self.n

    def nodes(self):
        """Node coordinates, shape (N,)*n + (n,)."""
        axis = self.spacing * np.arange(self.N)
        return np.stack(np.meshgrid(*([axis] * self.n), indexing="ij"), axis=-1)

    def frequency_indices(self):
        """Integer frequency vectors k in [-N/2, N/2)^n, shape (N^n, n), in FFT order."""
        k = np.rint(np.fft.fftfreq(self.N) * self.N).astype(int)
        return np.stack(np.meshgrid(*([k] * self.n), indexing="ij"), axis=-1).reshape(-1, self.n)

    def fourier(self):
        return sp_fft.fftn(self.values) / self.N ** self.n

    def same_grid(self, other):
        return (self.n, self.N, self.L) == (other.n, other.N, other.L)

    def _check_same_grid(self, other):
        if not self.same_grid(other):
            raise DomainError(f"grid mismatch: {(self.n, self.N, self.L)} vs {(other.n, other.N, other.L)}")

    # pointwise ------------------------------------------------------------

    def with_values(self, values):
        return GridFunction(self.n, self.N, self.L, values)

    def __add__(self, other):
        self._check_same_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        self._check_same_grid(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def pointwise_product(self, other):
        self._check_same_grid(other)
        return self.with_values(self.values * other.values)

    def abs(self):
        return self.with_values(np.abs(self.values).astype(complex))

    @property
    def real(self):
        return np.real(self.values)

    def sup(self):
        return float(np.max(np.abs(self.values)))

    # symmetries -----------------------------------------------------------

    def shift(self, steps):
        """Translate by integer grid steps: result(x) = self(x - steps*h)."""
        steps = tuple(int(s) for s in np.atleast_1d(steps))
        return self.with_values(np.roll(self.values, steps, axis=tuple(range(self.n))))

    def reflect(self, axis=0):
        """x_axis -> -x_axis (mod L)."""
        return self.with_values(np.roll(np.flip(self.values, axis=axis), 1, axis=axis))

    def transpose(self):
        return self.with_values(np.transpose(self.values))

    def interpolate(self, points):
        """Periodic multilinear interpolation at points of shape (M, n)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        scaled = points / self.spacing
        base = np.floor(scaled).astype(int)
        frac = scaled - base
        out = np.zeros(len(points), dtype=complex)
        for corner in range(2 ** self.n):
            offsets = np.array([(corner >> a) & 1 for a in range(self.n)])
            weight = np.prod(np.where(offsets, frac, 1.0 - frac), axis=1)
            idx = tuple(((base[:, a] + offsets[a]) % self.N) for a in range(self.n))
            out += weight * self.values[idx]
        return out

    # storage --------------------------------------------------------------

    def save(self, path, metadata=None):
        return grid_io.write_grid(path, self.n, self.N, self.L, self.values, metadata)

    @classmethod
    def load(cls, path):
        n, N, L, values, _ = grid_io.read_grid(path)
        return cls(n, N, L, values)


# ---------------------------------------------------------------------------
# analytic test functions


def _displacement(x, center, period):
    x = np.asarray(x, dtype=float)
    diff = x - np.asarray(center, dtype=float)
    if period is not None:
        # nearest periodic image
        diff = (diff + period / 2) % period - period / 2
    return diff


class TestFunctionFamily:
    """Analytic functions with closed-form point evaluation.

    Members evaluate on arrays of points of shape (..., n). ``period``
    selects the nearest periodic image, which is how grid sampling and the
    quadrature path see the same function.
    """

    __test__ = False
    has_fourier = False

    def __call__(self, x, period=None):
        raise NotImplementedError

    def envelope(self, r):
        """max |f| over the sphere of radius r around the centre."""
        raise NotImplementedError

    def fourier(self, xi):
        raise NotImplementedError(f"{type(self).__name__} has no closed-form Fourier transform")

    def sample(self, n, N, L):
        return GridFunction.from_function(lambda x: self(x, period=L), n, N, L)

    @classmethod
    def random_pair(cls, rng, n, L):
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(TestFunctionFamily):
    center: tuple
    width: float = 1.0
    amplitude: float = 1.0

    has_fourier = True

    def __call__(self, x, period=None):
        d = _displacement(x, self.center, period)
        return self.amplitude * np.exp(-np.pi * np.sum(d ** 2, axis=-1) / self.width ** 2)

    def envelope(self, r):
        return abs(self.amplitude) * math.exp(-math.pi * r ** 2 / self.width ** 2)

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        n = len(self.center)
        phase = np.exp(-2j * np.pi * xi @ np.asarray(self.center, dtype=float))
        return self.amplitude * self.width ** n * np.exp(-np.pi * self.width ** 2 * np.sum(xi ** 2, axis=-1)) * phase

    @classmethod
    def random_pair(cls, rng, n, L):
        """Two Gaussians of equal width whose centres differ by at most a quarter width."""
        width = rng.uniform(0.5, 1.5)
        center = np.full(n, L / 2) + rng.uniform(-1.0, 1.0, n)
        offset = rng.standard_normal(n)
        offset *= rng.uniform(0.0, 0.25) * width / max(np.linalg.norm(offset), 1e-300)
        return cls(tuple(center), width), cls(tuple(center + offset), width)


@dataclass(frozen=True)
class ModulatedGaussian(TestFunctionFamily):
    center: tuple
    width: float = 1.0
    frequency: tuple = None

    has_fourier = True

    def _omega(self):
        return np.zeros(len(self.center)) if self.frequency is None else np.asarray(self.frequency, dtype=float)

    def __call__(self, x, period=None):
        x = np.asarray(x, dtype=float)
        d = _displacement(x, self.center, period)
        carrier = np.exp(2j * np.pi * (d @ self._omega()))
        return np.exp(-np.pi * np.sum(d ** 2, axis=-1) / self.width ** 2) * carrier

    def envelope(self, r):
        return math.exp(-math.pi * r ** 2 / self.width ** 2)

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        shifted = xi - self._omega()
        n = len(self.center)
        phase = np.exp(-2j * np.pi * xi @ np.asarray(self.center, dtype=float))
        return self.width ** n * np.exp(-np.pi * self.width ** 2 * np.sum(shifted ** 2, axis=-1)) * phase

    @classmethod
    def random_pair(cls, rng, n, L):
        center = tuple(np.full(n, L / 2) + rng.uniform(-1.0, 1.0, n))
        width = rng.uniform(0.75, 1.5)
        return (cls(center, width, tuple(rng.uniform(-1.0, 1.0, n))),
                cls(center, width, tuple(rng.uniform(-1.0, 1.0, n))))


@dataclass(frozen=True)
class SmoothBump(TestFunctionFamily):
    center: tuple
    radius: float = 1.0

    def __call__(self, x, period=None):
        d = _displacement(x, self.center, period)
        s = np.sum(d ** 2, axis=-1) / self.radius ** 2
        out = np.zeros_like(s)
        inside = s < 1
        out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
        return out

    def envelope(self, r):
        s = (r / self.radius) ** 2
        return math.exp(-1.0 / (1.0 - s)) if s < 1 else 0.0

    @classmethod
    def random_pair(cls, rng, n, L):
        center = np.full(n, L / 2) + rng.uniform(-1.0, 1.0, n)
        return cls(tuple(center), rng.uniform(1.0, 3.0)), cls(tuple(center + rng.uniform(-0.5, 0.5, n)), rng.uniform(1.0, 3.0))


def decay_check(member, L, tol=DECAY_TOLERANCE):
    """True when the member is below ``tol`` at distance L/2 from its centre."""
    return member.envelope(L / 2) < tol


# ---------------------------------------------------------------------------
# radius grids


def geometric_t_grid(t_min, t_max, ratio=DEFAULT_T_RATIO):
    if t_min <= 0 or t_max < t_min:
        raise DomainError(f"geometric_t_grid: need 0 < t_min <= t_max, got {t_min}, {t_max}")
    if ratio <= 1:
        raise DomainError(f"geometric_t_grid: ratio must exceed 1, got {ratio}")
    count = int(math.floor(math.log(t_max / t_min) / math.log(ratio) + 1e-9)) + 1
    return t_min * ratio ** np.arange(count)


def default_t_grid(grid, ratio=DEFAULT_T_RATIO):
    """Geometric radii spanning [2^-6, 2^6] times the grid spacing L/N."""
    scale = grid.L / grid.N
    return geometric_t_grid(scale * 2.0 ** -6, scale * 2.0 ** 6, ratio)


def _check_t_grid(t_grid):
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.size == 0:
        raise DomainError("t_grid must not be empty")
    if np.any(t_grid <= 0):
        raise DomainError("t_grid radii must be positive")
    # radii are used in increasing order; repeats add nothing to a sup or a ds/s sum
    return np.unique(t_grid)


def log_weights(t_grid):
    """Midpoint weights of ds/s on a sorted grid of radii."""
    logs = np.log(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(logs) <= 0):
        raise DomainError("log_weights: radii must be strictly increasing")
    if logs.size == 1:
        return np.ones(1)
    edges = np.concatenate([[logs[0]], (logs[:-1] + logs[1:]) / 2, [logs[-1]]])
    return np.diff(edges)


# ---------------------------------------------------------------------------
# operators


def average_quad(f, g, x, t, rule):
    """A_t(f, g)(x) = int_{S^{2n-1}} f(x - t y) g(x - t z) dsigma(y, z) by a sphere rule.

    ``f`` and ``g`` are point evaluators or GridFunctions (interpolated).
    """
    if t <= 0:
        raise DomainError(f"average_quad: radius must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if rule.d != 2 * n:
        raise DomainError(f"average_quad: rule lives on S^{rule.d - 1}, need S^{2 * n - 1}")

    def evaluator(h):
        if isinstance(h, GridFunction):
            return h.interpolate
        return h

    fe, ge = evaluator(f), evaluator(g)
    return rule.integrate(lambda w: fe(x - t * w[:, :n]) * ge(x - t * w[:, n:]))


def _symbol_matrix(sym, grid, t):
    k = grid.frequency_indices()
    if isinstance(sym, RadialBilinearSymbol):
        # the symbol depends on |k| only: evaluate on distinct norms
        norms = np.sqrt(np.sum(k ** 2, axis=1))
        distinct, inverse = np.unique(norms, return_inverse=True)
        radii = t * distinct / grid.L
        small = sym(radii[:, None], radii[None, :])
        return small[inverse][:, inverse]
    xi = t * k / grid.L
    size = len(k)
    return np.broadcast_to(np.asarray(sym(xi[:, None, :], xi[None, :, :])), (size, size))


def _target_indices(grid):
    k = grid.frequency_indices()
    wrapped = (k[:, None, :] + k[None, :, :]) % grid.N
    flat = np.zeros(wrapped.shape[:2], dtype=np.int64)
    for a in range(grid.n):
        flat = flat * grid.N + wrapped[..., a]
    return flat


def average_mult(sym, f, g, t, rows_per_block=256):
    """Discrete bilinear multiplier T_t(f, g) for the symbol ``sym``."""
    f._check_same_grid(g)
    if t <= 0:
        raise DomainError(f"average_mult: radius must be positive, got {t}")
    size = f.N ** f.n
    c = f.fourier().ravel()
    d = g.fourier().ravel()
    sigma = _symbol_matrix(sym, f, t)
    target = _target_indices(f)

    def block(start):
        rows = slice(start, start + rows_per_block)
        product = c[rows, None] * d[None, :] * sigma[rows]
        idx = target[rows].ravel()
        return (np.bincount(idx, weights=product.real.ravel(), minlength=size)
                + 1j * np.bincount(idx, weights=product.imag.ravel(), minlength=size))

    spectrum = pairwise_sum(ordered_map(block, range(0, size, rows_per_block)))
    return GridFunction.from_fourier(spectrum, f.n, f.N, f.L)


def maximal(f, g, sym, t_grid):
    """Pointwise max over t_grid of |T_t(f, g)|."""
    t_grid = _check_t_grid(t_grid)
    out = np.zeros((f.N,) * f.n)
    for t in t_grid:
        out = np.maximum(out, np.abs(average_mult(sym, f, g, t).values))
    return f.with_values(out.astype(complex))


def linear_average(f, t):
    """The linear multiplier dsigma_hat(2n, t|xi|) applied to f."""
    if t <= 0:
        raise DomainError(f"linear_average: radius must be positive, got {t}")
    k = f.frequency_indices()
    radii = t * np.sqrt(np.sum(k ** 2, axis=1)) / f.L
    multiplier = specfn.dsigma_hat(2 * f.n, radii).reshape((f.N,) * f.n)
    return GridFunction.from_fourier(f.fourier() * multiplier, f.n, f.N, f.L)


def linear_max(f, t_grid):
    """sup over t_grid of the linear multiplier applied to |f|."""
    t_grid = _check_t_grid(t_grid)
    magnitude = f.abs()
    out = np.full((f.N,) * f.n, -np.inf)
    for t in t_grid:
        out = np.maximum(out, linear_average(magnitude, t).real)
    return f.with_values(out.astype(complex))


def square_function(f, g, j, variant="G", t_grid=None, epsilon=0.1):
    """(sum_s |T_s|^2 dlog s)^(1/2) for the off-diagonal piece (G) or its Euler symbol (G~)."""
    if j < 1:
        raise DomainError(f"square_function: j must be >= 1, got {j}")
    kinds = {'G': SymbolKind.OFFDIAG, 'G~': SymbolKind.EULER_OFFDIAG}
    if variant not in kinds:
        raise DomainError(f"square_function: unknown variant {variant!r}")
    t_grid = _check_t_grid(default_t_grid(f) if t_grid is None else t_grid)
    sym = make_symbol(f.n, j, kinds[variant], epsilon)
    weights = log_weights(t_grid)
    total = np.zeros((f.N,) * f.n)
    for t, w in zip(t_grid, weights):
        total += w * np.abs(average_mult(sym, f, g, t).values) ** 2
    return f.with_values(np.sqrt(total).astype(complex))


def lp_norm(h, p):
    """(sum |h|^p (L/N)^n)^(1/p); the max norm for p = inf; a quasi-norm for p < 1."""
    if p <= 0:
        raise DomainError(f"lp_norm: exponent must be positive, got {p}")
    magnitude = np.abs(h.values)
    if math.isinf(p):
        return float(magnitude.max())
    return float((np.sum(magnitude ** p) * h.cell_volume) ** (1.0 / p))


def opnorm_lower(op, p1, p2, p, family, trials, seed, n, N, L):
    """max over sampled pairs of ||op(f, g)||_p / (||f||_p1 ||g||_p2).

    Trial k draws its pair from substream (seed, k).
    """
    if trials < 1:
        raise DomainError(f"opnorm_lower: trials must be >= 1, got {trials}")

    def trial(k):
        f_member, g_member = family.random_pair(stream(seed, k), n, L)
        f, g = f_member.sample(n, N, L), g_member.sample(n, N, L)
        denominator = lp_norm(f, p1) * lp_norm(g, p2)
        if denominator == 0:
            return 0.0
        return lp_norm(op(f, g), p) / denominator

    ratios = ordered_map(trial, range(trials))
    best = max(ratios)
    logger.debug("opnorm_lower: trials=%d best=%.6e", trials, best)
    return best


def hardy_littlewood(f, max_radius=None):
    """Centred discrete Hardy-Littlewood maximal function of |f| over grid balls."""
    max_radius = max_radius or f.N // 4
    k = np.rint(np.fft.fftfreq(f.N) * f.N)
    dist2 = sum(np.meshgrid(*([k ** 2] * f.n), indexing="ij"))
    spectrum = sp_fft.fftn(np.abs(f.values))
    out = np.abs(f.values)
    for radius in range(1, max_radius + 1):
        ball = (dist2 <= radius ** 2).astype(float)
        ball /= ball.sum()
        averaged = np.real(sp_fft.ifftn(spectrum * sp_fft.fftn(ball)))
        out = np.maximum(out, averaged)
    return f.with_values(out.astype(complex))
