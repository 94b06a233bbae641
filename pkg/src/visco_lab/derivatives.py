"""Stretching terms of the objective time derivatives.

A frame-indifferent derivative is written ``D A = d_t A - S(A, grad v)`` with
``d_t`` the material derivative.  The functions below return ``S`` so that a
constitutive law ``D A = F(A)`` integrates as ``d_t A = S(A, grad v) + F(A)``.
"""
from __future__ import annotations

from .tensor import SymTensor2, Tensor2


def check_xi(xi: float) -> float:
    """Validate the slip parameter of the ``D_xi`` family (``-1 <= xi <= 1``)."""
    xi = float(xi)
    if not -1.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [-1, 1], got {xi}")
    return xi


def _a_l(a: SymTensor2, g: Tensor2) -> SymTensor2:
    # A.grad(v) + grad(v)^T.A ; symmetric because A is.
    xx = 2.0 * (a.xx * g.xx + a.xy * g.yx)
    yy = 2.0 * (a.xy * g.xy + a.yy * g.yy)
    xy = a.xx * g.xy + a.xy * g.yy + g.xx * a.xy + g.yx * a.yy
    return SymTensor2(xx, xy, yy)


def _a_lt(a: SymTensor2, g: Tensor2) -> SymTensor2:
    # A.grad(v)^T + grad(v).A
    xx = 2.0 * (a.xx * g.xx + a.xy * g.xy)
    yy = 2.0 * (a.xy * g.yx + a.yy * g.yy)
    xy = a.xx * g.yx + a.xy * g.yy + g.xx * a.xy + g.xy * a.yy
    return SymTensor2(xx, xy, yy)


def ucm_stretch(a: SymTensor2, gradv: Tensor2) -> SymTensor2:
    """``A.grad(v) + grad(v)^T.A``, the upper convected stretching term."""
    return _a_l(a, gradv)


def dxi_stretch(xi: float, a: SymTensor2, gradv: Tensor2) -> SymTensor2:
    """Stretching term of ``D_xi``.

    ``-(1 - xi)/2 (A.grad(v)^T + grad(v).A) + (1 + xi)/2 (A.grad(v) + grad(v)^T.A)``;
    ``xi = 1, 0, -1`` give the upper convected, Jaumann and lower convected
    derivatives.
    """
    xi = check_xi(xi)
    if xi == 1.0:
        return _a_l(a, gradv)
    up = _a_l(a, gradv)
    if xi == -1.0:
        return -_a_lt(a, gradv)
    return 0.5 * (1.0 + xi) * up - 0.5 * (1.0 - xi) * _a_lt(a, gradv)
