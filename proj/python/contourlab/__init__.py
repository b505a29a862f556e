"""Loop functionals, monodromy and Melnikov tools for planar polynomial Hamiltonians."""

from ._core import *  # noqa: F401,F403
from ._core import ContourError, Poly


def elliptic():
    """y^2 - x^3 + 3x."""
    return Poly([(0, 2, 1.0), (3, 0, -1.0), (1, 0, 3.0)])


__version__ = "0.1.0"
