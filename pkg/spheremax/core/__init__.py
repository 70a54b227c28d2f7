"""
Core numerics for spheremax: exponent region, special functions, symbols,
sphere quadrature, grid operators and the singular counterexample family.
"""

from .bilop import GridFunction, average_mult, average_quad, maximal
from .cex import CexPair, cex_average, divergence_probe, growth_floor
from .region import ExponentPoint, RegionStatus, classify
from .specfn import bessel_j, dsigma_hat
from .squad import integrate_cov, integrate_hemigraph, integrate_mc
from .symbols import RadialBilinearSymbol, SymbolKind, make_symbol

__all__ = [
    'CexPair', 'ExponentPoint', 'GridFunction', 'RadialBilinearSymbol', 'RegionStatus', 'SymbolKind',
    'average_mult', 'average_quad', 'bessel_j', 'cex_average', 'classify', 'divergence_probe',
    'dsigma_hat', 'growth_floor', 'integrate_cov', 'integrate_hemigraph', 'integrate_mc',
    'make_symbol', 'maximal',
]
