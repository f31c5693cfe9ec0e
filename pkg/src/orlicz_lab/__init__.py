"""Numerical laboratory for Orlicz-Sobolev embeddings and elliptic estimates with
coefficients in Orlicz and rearrangement-invariant spaces."""
from . import elliptic, embeddings, fields, kernels, ri_spaces, young
from .errors import OrliczLabError

__version__ = "0.1.0"
__all__ = ["young", "embeddings", "fields", "kernels", "elliptic", "ri_spaces",
           "OrliczLabError", "__version__"]
