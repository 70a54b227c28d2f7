import math

import numpy as np
import pytest

from spheremax.core import bilop, squad
from spheremax.core.bilop import Gaussian, GridFunction, ModulatedGaussian, SmoothBump
from spheremax.core.specfn import sphere_measure
from spheremax.core.symbols import SymbolKind, make_symbol
from spheremax.errors import DomainError
from spheremax.utils.rng import stream


@pytest.fixture
def line_pair(gaussian_pair):
    f_member, g_member = gaussian_pair
    return f_member.sample(1, 128, 16.0), g_member.sample(1, 128, 16.0)


def test_grid_function_validation():
    with pytest.raises(DomainError):
        GridFunction.zeros(1, 12, 1.0)
    with pytest.raises(DomainError):
        GridFunction.zeros(0, 8, 1.0)
    with pytest.raises(DomainError):
        GridFunction(1, 8, 1.0, np.zeros(4))


def test_grid_geometry():
    grid = GridFunction.zeros(2, 8, 4.0)
    assert grid.spacing == 0.5
    assert grid.cell_volume == 0.25
    assert grid.nodes().shape == (8, 8, 2)
    assert grid.frequency_indices().shape == (64, 2)
    assert grid.frequency_indices().min() == -4


def test_fourier_round_trip():
    grid = GridFunction.from_function(lambda x: np.cos(2 * np.pi * x[..., 0] / 4.0), 1, 16, 4.0)
    coeffs = grid.fourier()
    assert coeffs[1] == pytest.approx(0.5)
    back = GridFunction.from_fourier(coeffs, 1, 16, 4.0)
    assert np.allclose(back.values, grid.values)


def test_arithmetic_and_symmetries():
    f = GridFunction.from_function(lambda x: x[..., 0] + 2 * x[..., 1], 2, 4, 4.0)
    g = 2 * f - f
    assert np.allclose(g.values, f.values)
    assert np.allclose(f.transpose().values, f.values.T)
    assert np.allclose(f.reflect(0).reflect(0).values, f.values)
    assert np.allclose(f.shift((1, 0)).values[1], f.values[0])
    assert f.abs().sup() == f.sup()
    with pytest.raises(DomainError):
        f + GridFunction.zeros(2, 8, 4.0)


def test_interpolate_at_nodes_and_midpoints():
    f = GridFunction.from_function(lambda x: x[..., 0], 1, 8, 8.0)
    assert np.allclose(f.interpolate([[2.0], [2.5]]).real, [2.0, 2.5])


def test_save_and_load(tmp_path):
    f = GridFunction.from_function(lambda x: np.sin(x[..., 0]), 1, 8, 2.0)
    f.save(tmp_path / "f.grid")
    loaded = GridFunction.load(tmp_path / "f.grid")
    assert loaded.L == 2.0
    assert np.array_equal(loaded.values, f.values)


def test_gaussian_family():
    g = Gaussian((1.0, 2.0), 0.5, 3.0)
    assert g(np.array([1.0, 2.0])) == pytest.approx(3.0)
    assert g.envelope(0.0) == 3.0
    # periodic image
    assert g(np.array([1.0, 2.0 + 4.0]), period=4.0) == pytest.approx(3.0)
    assert Gaussian((0.0,), 1.0).fourier(np.array([[0.0]]))[0] == pytest.approx(1.0)
    assert bilop.decay_check(Gaussian((8.0,), 1.0), 16.0)
    assert not bilop.decay_check(Gaussian((8.0,), 4.0), 16.0)


def test_random_pairs_are_reproducible():
    a = Gaussian.random_pair(stream(1, 0), 2, 16.0)
    b = Gaussian.random_pair(stream(1, 0), 2, 16.0)
    assert a == b
    f, g = a
    offset = np.linalg.norm(np.subtract(f.center, g.center))
    assert offset <= 0.25 * f.width + 1e-12
    assert len(ModulatedGaussian.random_pair(stream(1, 0), 1, 16.0)) == 2
    bump, _ = SmoothBump.random_pair(stream(1, 0), 1, 16.0)
    assert bump(np.array([100.0])) == 0.0


def test_geometric_t_grid():
    grid = bilop.geometric_t_grid(1.0, 8.0, 2.0)
    assert np.allclose(grid, [1, 2, 4, 8])
    with pytest.raises(DomainError):
        bilop.geometric_t_grid(0.0, 1.0)
    with pytest.raises(DomainError):
        bilop.geometric_t_grid(1.0, 2.0, 1.0)
    default = bilop.default_t_grid(GridFunction.zeros(1, 16, 16.0))
    assert default[0] == pytest.approx(2.0 ** -6)


def test_log_weights_sum_to_log_span():
    grid = bilop.geometric_t_grid(1.0, 16.0, 2.0 ** 0.25)
    assert bilop.log_weights(grid).sum() == pytest.approx(math.log(16.0))


def test_average_quad_of_constants():
    rule = squad.sphere_rule(2, 32)
    one = lambda x: np.ones(len(x))
    assert bilop.average_quad(one, one, np.array([0.3]), 1.0, rule) == pytest.approx(sphere_measure(2))
    with pytest.raises(DomainError):
        bilop.average_quad(one, one, np.array([0.3]), 0.0, rule)
    with pytest.raises(DomainError):
        bilop.average_quad(one, one, np.array([0.3, 0.1]), 1.0, rule)


def test_multiplier_of_constants():
    one = GridFunction(1, 16, 8.0, np.ones(16, dtype=complex))
    full = make_symbol(1, kind=SymbolKind.FULL)
    out = bilop.average_mult(full, one, one, 1.7)
    assert np.allclose(out.values, sphere_measure(2))


def test_quadrature_matches_multiplier(gaussian_pair, line_pair):
    f_member, g_member = gaussian_pair
    f, g = line_pair
    full = make_symbol(1, kind=SymbolKind.FULL)
    rule = squad.sphere_rule(2, 256)
    for t in (0.5, 2.0):
        mult = bilop.average_mult(full, f, g, t)
        for index in (60, 64, 70):
            x = f.nodes()[index]
            quad = bilop.average_quad(lambda p: f_member(p, period=16.0), lambda p: g_member(p, period=16.0),
                                      x, t, rule)
            assert mult.values[index].real == pytest.approx(quad, abs=1e-6)


def test_multiplier_is_bilinear_and_symmetric(line_pair):
    f, g = line_pair
    h = Gaussian((7.0,), 0.8).sample(1, 128, 16.0)
    full = make_symbol(1, kind=SymbolKind.FULL)
    alpha = 0.7 - 0.3j
    lhs = bilop.average_mult(full, alpha * f + h, g, 1.0)
    rhs = alpha * bilop.average_mult(full, f, g, 1.0) + bilop.average_mult(full, h, g, 1.0)
    assert np.allclose(lhs.values, rhs.values, atol=1e-12)
    swapped = bilop.average_mult(full, g, f, 1.0)
    assert np.allclose(swapped.values, bilop.average_mult(full, f, g, 1.0).values, atol=1e-12)


def test_pieces_sum_to_full(line_pair):
    f, g = line_pair
    t = 1.0
    top = t * math.sqrt(2) * 64 / 16.0
    J = math.ceil(math.log2(top))
    total = bilop.average_mult(make_symbol(1, 0), f, g, t)
    for j in range(1, J + 1):
        total = total + bilop.average_mult(make_symbol(1, j), f, g, t)
    full = bilop.average_mult(make_symbol(1, kind=SymbolKind.FULL), f, g, t)
    assert np.allclose(total.values, full.values, atol=1e-10)


def test_maximal_dominated_by_linear_maximal(gaussian_pair, line_pair):
    _, g_member = gaussian_pair
    f, g = line_pair
    t_grid = bilop.geometric_t_grid(0.05, 4.0, 2.0 ** 0.25)
    full = make_symbol(1, kind=SymbolKind.FULL)
    M = bilop.maximal(f, g, full, t_grid)
    bound = g_member.envelope(0.0) * bilop.linear_max(f, t_grid).real
    assert np.all(M.real <= bound + 1e-10)
    refined = bilop.maximal(f, g, full, np.append(t_grid, 0.07))
    assert np.all(refined.real >= M.real)


def test_maximal_rejects_bad_radii(line_pair):
    f, g = line_pair
    with pytest.raises(DomainError):
        bilop.maximal(f, g, make_symbol(1, 2), [])
    with pytest.raises(DomainError):
        bilop.maximal(f, g, make_symbol(1, 2), [1.0, -1.0])


def test_linear_average_of_constant():
    one = GridFunction(1, 8, 4.0, np.ones(8, dtype=complex))
    assert np.allclose(bilop.linear_average(one, 0.5).values, sphere_measure(2))
    with pytest.raises(DomainError):
        bilop.linear_average(one, 0.0)


def test_square_function_variants(line_pair):
    f, g = line_pair
    t_grid = bilop.geometric_t_grid(0.5, 16.0, 2.0 ** 0.125)
    G = bilop.square_function(f, g, 2, "G", t_grid)
    G_euler = bilop.square_function(f, g, 2, "G~", t_grid)
    assert np.all(G.real >= 0)
    assert G.sup() > 0
    assert G_euler.sup() > 0
    # a single radius carries log weight 1
    single = bilop.square_function(f, g, 2, "G", [1.0])
    direct = bilop.average_mult(make_symbol(1, 2, SymbolKind.OFFDIAG), f, g, 1.0)
    assert np.allclose(single.real, np.abs(direct.values))
    with pytest.raises(DomainError):
        bilop.square_function(f, g, 2, "H", t_grid)
    with pytest.raises(DomainError):
        bilop.square_function(f, g, 0, "G", t_grid)


def test_lp_norm():
    one = GridFunction(1, 8, 4.0, np.ones(8, dtype=complex))
    assert bilop.lp_norm(one, 1) == pytest.approx(4.0)
    assert bilop.lp_norm(one, 2) == pytest.approx(2.0)
    assert bilop.lp_norm(one, float("inf")) == 1.0
    with pytest.raises(DomainError):
        bilop.lp_norm(one, 0)


def test_opnorm_lower_of_pointwise_product():
    ratio = bilop.opnorm_lower(lambda f, g: f.pointwise_product(g), 2, 2, 1, Gaussian, 4, 0, 1, 64, 16.0)
    assert 0.9 <= ratio <= 1 + 1e-9
    with pytest.raises(DomainError):
        bilop.opnorm_lower(lambda f, g: f, 2, 2, 1, Gaussian, 0, 0, 1, 64, 16.0)


def test_hardy_littlewood_dominates_function(line_pair):
    f, _ = line_pair
    hl = bilop.hardy_littlewood(f)
    assert np.all(hl.real >= np.abs(f.values) - 1e-15)
    one = GridFunction(1, 8, 4.0, np.ones(8, dtype=complex))
    assert np.allclose(bilop.hardy_littlewood(one).values, 1.0)


def test_lp_norm_of_gaussian_matches_closed_form():
    for n, N in ((1, 128), (2, 64)):
        member = Gaussian((10.0,) * n, 1.0)
        h = member.sample(n, N, 20.0)
        # int exp(-2 pi |x|^2 / w^2) dx = (w^2 / 2)^(n/2)
        assert bilop.lp_norm(h, 2) == pytest.approx(0.5 ** (n / 4), rel=1e-4)


def test_dilation_covariance():
    f = Gaussian((8.1,), 0.75).sample(1, 256, 16.0)
    g = Gaussian((8.25,), 0.75).sample(1, 256, 16.0)
    f_half = Gaussian((4.05,), 0.375).sample(1, 256, 8.0)
    g_half = Gaussian((4.125,), 0.375).sample(1, 256, 8.0)
    full = make_symbol(1, kind=SymbolKind.FULL)
    wide = bilop.average_mult(full, f, g, 2.0).values
    narrow = bilop.average_mult(full, f_half, g_half, 1.0).values
    assert np.max(np.abs(wide - narrow)) <= 1e-3 * np.max(np.abs(wide))


def test_unordered_t_grid_is_sorted(line_pair):
    f, g = line_pair
    t_grid = bilop.geometric_t_grid(0.5, 8.0, 2.0 ** 0.25)
    forward = bilop.square_function(f, g, 2, "G", t_grid)
    backward = bilop.square_function(f, g, 2, "G", t_grid[::-1])
    repeated = bilop.square_function(f, g, 2, "G", np.concatenate([t_grid, t_grid[:3]]))
    assert np.all(np.isfinite(backward.real))
    assert np.allclose(backward.real, forward.real, rtol=1e-12, atol=0.0)
    assert np.allclose(repeated.real, forward.real, rtol=1e-12, atol=0.0)
    assert np.allclose(bilop.maximal(f, g, make_symbol(1, 2), t_grid[::-1]).real,
                       bilop.maximal(f, g, make_symbol(1, 2), t_grid).real)


def test_log_weights_need_increasing_radii():
    with pytest.raises(DomainError):
        bilop.log_weights([2.0, 1.0])
    with pytest.raises(DomainError):
        bilop.log_weights([1.0, 1.0, 2.0])
