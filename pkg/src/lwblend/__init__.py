"""Single-stage Lax-Wendroff flux reconstruction solver with subcell blending."""

from .basis import Basis, build_basis, gauss_legendre_01, gauss_lobatto_01

__all__ = ["Basis", "build_basis", "gauss_legendre_01", "gauss_lobatto_01"]

__version__ = "0.1.0"
