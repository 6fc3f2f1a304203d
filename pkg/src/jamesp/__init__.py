"""Exact norms, the c0 construction and proof checks for the James space J_p."""

from .core import (
    FiniteVector,
    GpElement,
    JpInftyElement,
    NormResult,
    PruningMismatchWarning,
    as_chain,
    chain_power,
    check_exponent,
    gp_norm,
    jp_norm_bruteforce,
    jp_norm_exact,
    jp_norm_pruned,
    jpinfty_norm,
    nu_p,
    right_shift,
    spike,
    stretch,
)

__version__ = "0.1.0"
