"""Exact and numeric tools for Kloosterman-type sums at square-free moduli."""
__version__ = "0.1.0"

from .cyclotomic import CycElem, cyclotomic_poly, lambda_valuation, rational_ratio, root_power
from .expsums import SumSpec, SumValue, birch, generic_sum, kl, kloosterman, kloosterman_crt, salie

__all__ = ["__version__", "CycElem", "cyclotomic_poly", "lambda_valuation", "rational_ratio", "root_power",
           "SumSpec", "SumValue", "birch", "generic_sum", "kl", "kloosterman", "kloosterman_crt", "salie"]
