"""Lee-Yang zeros, Asano contraction certificates and correlation inequalities for finite spin systems."""

from .analysis import UniPoly, alpha, cayley, gauss_lucas_check, roots
from .asano import audit_certificate, certify_region, contract_model, epsilon_rho_search
from .correlations import correlation, newman_ratio_check, sandwich_check
from .errors import LeeYangError
from .gibbs import InteractionSpec, chain, fugacity_poly, partition_function, ring, torus
from .measures import DiscreteEvenMeasure, pn_check
from .polycore import MultiAffinePoly, ma_contract, ma_mul
from .ursell import mass_gap_fit

__all__ = [
    "DiscreteEvenMeasure",
    "InteractionSpec",
    "LeeYangError",
    "MultiAffinePoly",
    "UniPoly",
    "alpha",
    "audit_certificate",
    "cayley",
    "certify_region",
    "chain",
    "contract_model",
    "correlation",
    "epsilon_rho_search",
    "fugacity_poly",
    "gauss_lucas_check",
    "ma_contract",
    "ma_mul",
    "mass_gap_fit",
    "newman_ratio_check",
    "partition_function",
    "pn_check",
    "ring",
    "roots",
    "sandwich_check",
    "torus",
]
