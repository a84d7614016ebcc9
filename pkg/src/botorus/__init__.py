"""botorus: a pseudospectral laboratory for the Benjamin-Ono equation on the torus."""

__version__ = "0.1.0"

from .spectral import (  # noqa: F401
    GridSpec, RealField, ComplexField,
    hilbert, derivative, antiderivative, free_group, project, product,
    exp_gauge, l2_norm, hs_norm, sup_norm, inner, mean,
    read_field, write_field,
)
