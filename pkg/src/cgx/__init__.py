"""cgx: numerical toolkit for star/convex bodies and their verification suite."""

__version__ = "0.1.0"

from . import bodies, quadrature, positions, radon  # noqa: F401
