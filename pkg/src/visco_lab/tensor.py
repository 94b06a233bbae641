"""Closed-form algebra for 2x2 tensors.

Every function here broadcasts: components may be Python floats (a single
tensor) or numpy arrays of a common shape (a tensor field on a grid).  The
same constitutive code therefore runs pointwise in the homogeneous ODE
integrator and over whole grids in the spectral solver.

Velocity gradients follow the convention ``(grad v)_ij = d_i v_j``; with it
the upper convected derivative reads ``d_t A - A.grad(v) - grad(v)^T.A``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

@dataclass(frozen=True, slots=True)
class SymTensor2:
    """Symmetric 2x2 tensor stored by its three independent components."""

    # Make ``ndarray * tensor`` defer to ``__rmul__`` instead of broadcasting.
    __array_ufunc__ = None

    xx: Any
    xy: Any
    yy: Any

    def __add__(self, other: SymTensor2) -> SymTensor2:
        return SymTensor2(self.xx + other.xx, self.xy + other.xy, self.yy + other.yy)

    def __sub__(self, other: SymTensor2) -> SymTensor2:
        return SymTensor2(self.xx - other.xx, self.xy - other.xy, self.yy - other.yy)

    def __neg__(self) -> SymTensor2:
        return SymTensor2(-self.xx, -self.xy, -self.yy)

    def __mul__(self, s) -> SymTensor2:
        return SymTensor2(s * self.xx, s * self.xy, s * self.yy)

    __rmul__ = __mul__

    def __truediv__(self, s) -> SymTensor2:
        return SymTensor2(self.xx / s, self.xy / s, self.yy / s)

    def as_array(self) -> np.ndarray:
        """Components stacked on a leading axis: ``[xx, xy, yy]``."""
        return np.array([self.xx, self.xy, self.yy], dtype=float)

    def as_matrix(self) -> np.ndarray:
        """Full matrix; trailing axes ``(..., 2, 2)`` for fields."""
        xx, xy, yy = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (self.xx, self.xy, self.yy)))
        return np.stack([np.stack([xx, xy], -1), np.stack([xy, yy], -1)], -2)

    @classmethod
    def from_array(cls, a) -> SymTensor2:
        a = np.asarray(a, dtype=float)
        return cls(a[0], a[1], a[2])

    @classmethod
    def from_matrix(cls, m) -> SymTensor2:
        """Symmetric part of a 2x2 matrix (or stack of them)."""
        m = np.asarray(m, dtype=float)
        return cls(m[..., 0, 0], 0.5 * (m[..., 0, 1] + m[..., 1, 0]), m[..., 1, 1])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.xx)) and np.all(np.isfinite(self.xy))
                    and np.all(np.isfinite(self.yy)))


@dataclass(frozen=True, slots=True)
class Tensor2:
    """General 2x2 tensor, e.g. a velocity gradient."""

    __array_ufunc__ = None

    xx: Any
    xy: Any
    yx: Any
    yy: Any

    def __add__(self, other: Tensor2) -> Tensor2:
        return Tensor2(self.xx + other.xx, self.xy + other.xy, self.yx + other.yx, self.yy + other.yy)

    def __mul__(self, s) -> Tensor2:
        return Tensor2(s * self.xx, s * self.xy, s * self.yx, s * self.yy)

    __rmul__ = __mul__

    @property
    def T(self) -> Tensor2:
        return Tensor2(self.xx, self.yx, self.xy, self.yy)

    def sym(self) -> SymTensor2:
        """Symmetric part, ``Dv = (grad v + grad v^T)/2`` for a velocity gradient."""
        return SymTensor2(self.xx, 0.5 * (self.xy + self.yx), self.yy)

    def trace(self):
        return self.xx + self.yy

    def as_matrix(self) -> np.ndarray:
        xx, xy, yx, yy = np.broadcast_arrays(
            *(np.asarray(c, dtype=float) for c in (self.xx, self.xy, self.yx, self.yy)))
        return np.stack([np.stack([xx, xy], -1), np.stack([yx, yy], -1)], -2)

    @classmethod
    def from_matrix(cls, m) -> Tensor2:
        m = np.asarray(m, dtype=float)
        return cls(m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1])


def identity(scale=1.0) -> SymTensor2:
    return SymTensor2(scale, 0.0 * scale, scale)


def zero_gradient() -> Tensor2:
    return Tensor2(0.0, 0.0, 0.0, 0.0)


def trace(a: SymTensor2):
    return a.xx + a.yy


def det(a: SymTensor2):
    return a.xx * a.yy - a.xy * a.xy


def frobenius_norm(a: SymTensor2):
    """Frobenius norm; the off-diagonal entry counts twice."""
    return np.sqrt(a.xx * a.xx + 2.0 * a.xy * a.xy + a.yy * a.yy)


def eigenvalues(a: SymTensor2):
    """Eigenvalues ``(largest, smallest)`` of ``l^2 - tr(A) l + det(A) = 0``.

    The discriminant is evaluated as ``((xx - yy)/2)^2 + xy^2``, the same
    quantity as ``tr^2/4 - det`` without the cancellation.  The root of
    smaller magnitude is taken as ``det / (root of larger magnitude)`` so
    that a tiny eigenvalue next to a large one keeps its relative accuracy.
    """
    half_tr = 0.5 * (a.xx + a.yy)
    disc = (0.5 * (a.xx - a.yy)) ** 2 + a.xy * a.xy
    d = a.xx * a.yy - a.xy * a.xy
    if isinstance(disc, float):
        root = math.sqrt(disc) if disc == disc else disc
        if half_tr >= 0.0:
            hi = half_tr + root
            lo = d / hi if hi != 0.0 else half_tr - root
        else:
            lo = half_tr - root
            hi = d / lo
        return float(hi), float(lo)
    root = np.sqrt(disc)
    big = np.where(half_tr >= 0.0, half_tr + root, half_tr - root)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0.0, d / np.where(big != 0.0, big, 1.0), half_tr - root)
    hi = np.where(half_tr >= 0.0, big, small)
    lo = np.where(half_tr >= 0.0, small, big)
    if np.ndim(hi) == 0:
        return float(hi), float(lo)
    return hi, lo


def min_eigenvalue(a: SymTensor2):
    return eigenvalues(a)[1]


def is_spd(a: SymTensor2, tol: float = 0.0):
    """True where the smallest eigenvalue exceeds ``tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    lo = eigenvalues(a)[1]
    if np.ndim(lo) == 0:
        return bool(lo > tol)
    return lo > tol


def sqrt_spd(a: SymTensor2) -> SymTensor2:
    """Principal square root of an SPD tensor.

    Uses the 2x2 identity ``sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A))``,
    which is the spectral square root written without eigenvectors (all terms
    positive, so it stays accurate up to large condition numbers).

    Raises
    ------
    ValueError
        If any point of ``a`` is not positive definite.
    """
    if not np.all(is_spd(a, 0.0)):
        raise ValueError("sqrt_spd requires a symmetric positive definite tensor")
    rd = np.sqrt(det(a))
    norm = np.sqrt(trace(a) + 2.0 * rd)
    return SymTensor2((a.xx + rd) / norm, a.xy / norm, (a.yy + rd) / norm)


def inverse(a: SymTensor2) -> SymTensor2:
    d = det(a)
    return SymTensor2(a.yy / d, -a.xy / d, a.xx / d)


def square(a: SymTensor2) -> SymTensor2:
    """``A.A`` for symmetric ``A`` (symmetric again)."""
    return SymTensor2(a.xx * a.xx + a.xy * a.xy,
                      a.xy * (a.xx + a.yy),
                      a.xy * a.xy + a.yy * a.yy)


def double_contract(a, b: SymTensor2):
    """``A : B = sum_ij A_ij B_ij`` for a general or symmetric ``A``."""
    if isinstance(a, Tensor2):
        return a.xx * b.xx + (a.xy + a.yx) * b.xy + a.yy * b.yy
    return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy


def one_contract(a: SymTensor2, b: Tensor2) -> Tensor2:
    """Matrix product ``A.B``."""
    return Tensor2(a.xx * b.xx + a.xy * b.yx,
                   a.xx * b.xy + a.xy * b.yy,
                   a.xy * b.xx + a.yy * b.yx,
                   a.xy * b.xy + a.yy * b.yy)


def one_contract_left(b: Tensor2, a: SymTensor2) -> Tensor2:
    """Matrix product ``B.A``."""
    return Tensor2(b.xx * a.xx + b.xy * a.xy,
                   b.xx * a.xy + b.xy * a.yy,
                   b.yx * a.xx + b.yy * a.xy,
                   b.yx * a.xy + b.yy * a.yy)


def cayley_hamilton_residual(a: SymTensor2) -> SymTensor2:
    """``A^2 - tr(A) A + det(A) I``, identically zero in two dimensions."""
    return square(a) - trace(a) * a + identity(det(a))
