"""Dirac operators on the quantum disk.

Modules: ``sequences`` (weights, symbols, certified series), ``toeplitz``
(the algebra and its covariant derivations), ``gns`` (weighted GNS spaces),
``dirac`` (mode operators, kernels, parametrices, assembly), ``analysis``
(hypothesis checks and the spectral-triple battery) and ``cli``.
"""

from .sequences import PowerLawFamily, normalize_weight, predicted_N, sequence_from_dict
from .toeplitz import ToeplitzElement, derive, identity, shift, shift_adjoint
from .gns import GnsVector, WeightedSpace, act, inner, norm
from .dirac import DiracData, ModeOperator, apply_D, assemble, build_parametrix, kernel_vector
from .analysis import check_condition, commutator_norm, kernel_dimension, singular_values, verify_triple

__all__ = [
    "PowerLawFamily",
    "normalize_weight",
    "predicted_N",
    "sequence_from_dict",
    "ToeplitzElement",
    "derive",
    "identity",
    "shift",
    "shift_adjoint",
    "GnsVector",
    "WeightedSpace",
    "act",
    "inner",
    "norm",
    "DiracData",
    "ModeOperator",
    "apply_D",
    "assemble",
    "build_parametrix",
    "kernel_vector",
    "check_condition",
    "commutator_norm",
    "kernel_dimension",
    "singular_values",
    "verify_triple",
]
