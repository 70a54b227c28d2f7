"""
spheremax - a numerical laboratory for the bilinear spherical maximal function.
"""

__version__ = "0.1.0"
