"""Pseudospectral toolkit for a fourth-order NLS-type equation on the torus."""

__version__ = "0.1.0"

from .spectral import (  # noqa: F401
    GridSpec,
    PhysicalField,
    SpectralField,
    derivative,
    gn_ratio,
    l2_norm,
    lp_norm,
    sobolev_norm,
    to_physical,
    to_spectral,
    zero_field,
)
