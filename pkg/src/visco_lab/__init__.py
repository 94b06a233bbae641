"""Viscoelastic constitutive laws, homogeneous-flow integrators and a 2D spectral solver."""
from __future__ import annotations

from .models import MODEL_NAMES, ModelError, ModelSpec, builtin_model
from .tensor import SymTensor2, Tensor2

__version__ = "0.1.0"
