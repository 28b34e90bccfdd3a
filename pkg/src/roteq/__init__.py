"""Rotation-equivariant regression for symmetric tensor data.

Inputs are rotated into a canonical standard position, a kernel predictor
(MLP or regression forest) is trained there, and its predictions are
rotated back into the observed frame.
"""

from .linalg import qr3, random_rotation, random_rotations, sym_eig3
from .standardize import restore_label, standardize_tuple
from .tensor import TensorTuple, contract, flatten, rotate, symmetrize, unflatten

__version__ = "0.1.0"

__all__ = [
    "TensorTuple", "contract", "flatten", "qr3", "random_rotation", "random_rotations",
    "restore_label", "rotate", "standardize_tuple", "sym_eig3",
    "symmetrize", "unflatten",
]
