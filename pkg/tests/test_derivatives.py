from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from visco_lab.derivatives import check_xi, dxi_stretch, ucm_stretch
from visco_lab.homogeneous import HomogeneousScenario, integrate
from visco_lab.models import builtin_model
from visco_lab.tensor import SymTensor2, Tensor2, double_contract, trace

finite = st.floats(-5.0, 5.0, allow_nan=False)
xis = st.floats(-1.0, 1.0)


def _matrix_stretch(xi, a, g):
    # Oracle straight from the definition, with (grad v)_ij = d_i v_j.
    A, L = a.as_matrix(), g.as_matrix()
    return -(1 - xi) / 2 * (A @ L.T + L @ A) + (1 + xi) / 2 * (A @ L + L.T @ A)


@given(xis, finite, finite, finite, finite, finite, finite, finite)
def test_dxi_matches_matrix_definition(xi, a, b, c, d, e, f, g):
    s = SymTensor2(a, b, c)
    grad = Tensor2(d, e, f, g)
    np.testing.assert_allclose(dxi_stretch(xi, s, grad).as_matrix(), _matrix_stretch(xi, s, grad), atol=1e-10)


@given(xis, finite, finite, finite, finite, finite, finite)
def test_trace_of_stretch_is_2xi_dv_a(xi, a, b, c, d, e, f):
    # trace-free gradient
    grad = Tensor2(d, e, f, -d)
    s = SymTensor2(a, b, c)
    lhs = trace(dxi_stretch(xi, s, grad))
    assert lhs == pytest.approx(2 * xi * double_contract(grad, s), abs=1e-9)


@given(xis, finite, finite, finite, finite)
def test_all_derivatives_agree_in_rigid_rotation(xi, a, b, c, w):
    rot = Tensor2(0.0, w, -w, 0.0)
    s = SymTensor2(a, b, c)
    np.testing.assert_allclose(dxi_stretch(xi, s, rot).as_matrix(), ucm_stretch(s, rot).as_matrix(), atol=1e-12)


def test_named_limits():
    s = SymTensor2(1.0, 0.5, 2.0)
    g = Tensor2(0.3, -0.7, 1.1, -0.3)
    np.testing.assert_allclose(dxi_stretch(1.0, s, g).as_matrix(), ucm_stretch(s, g).as_matrix())
    A, L = s.as_matrix(), g.as_matrix()
    np.testing.assert_allclose(dxi_stretch(-1.0, s, g).as_matrix(), -(A @ L.T + L @ A), atol=1e-14)


def test_check_xi_range():
    assert check_xi(-1) == -1.0
    with pytest.raises(ValueError):
        check_xi(1.0001)


def test_upper_convected_transport_is_deformation_pullback():
    # d_t A = A L + L^T A with constant L has A(t) = F^T A0 F, F = exp(t L).
    m = builtin_model("mgi")  # pure transport: alpha = beta = 0
    g = Tensor2(0.4, 0.9, -0.2, -0.4)
    c0 = SymTensor2(1.3, 0.2, 0.6)
    traj = integrate(HomogeneousScenario(m, c0, lambda t: g, dt=1e-3, t_max=1.0))
    F = expm(1.0 * g.as_matrix())
    expected = F.T @ c0.as_matrix() @ F
    np.testing.assert_allclose(traj.tensor(-1).as_matrix(), expected, rtol=1e-10)
