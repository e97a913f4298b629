"""hypernorm: certified hypercontractive operator norms at desk scale.

Moment relaxations of quartic sphere maximization with rigorous dual
certificates, multistart lower-bound oracles, graph small-set-expansion
checks, symmetric-extension separability relaxations, and the explicit
matrix constructions tying them together.
"""

__version__ = "0.1.0"

from .core import OperatorInstance, TensorShape, load_matrix, matrix_from_json, matrix_to_json, save_matrix

__all__ = [
    "OperatorInstance",
    "TensorShape",
    "load_matrix",
    "save_matrix",
    "matrix_from_json",
    "matrix_to_json",
    "__version__",
]
