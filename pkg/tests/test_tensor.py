from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from visco_lab.tensor import (SymTensor2, Tensor2, cayley_hamilton_residual, det, double_contract,
                              eigenvalues, frobenius_norm, identity, inverse, is_spd, one_contract,
                              one_contract_left, sqrt_spd, square, trace)

finite = st.floats(-10.0, 10.0, allow_nan=False)


@st.composite
def spd(draw, min_eig=1e-3):
    # Random eigenvalues and rotation angle.
    l1 = draw(st.floats(min_eig, 50.0))
    l2 = draw(st.floats(min_eig, 50.0))
    th = draw(st.floats(0.0, math.pi))
    c, s = math.cos(th), math.sin(th)
    return SymTensor2(l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c)


def test_identity_basics():
    d = identity()
    assert trace(d) == 2.0
    assert det(d) == 1.0
    assert frobenius_norm(d) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert eigenvalues(d) == (1.0, 1.0)


@given(finite, finite, finite)
def test_eigenvalues_match_numpy(xx, xy, yy):
    a = SymTensor2(xx, xy, yy)
    w = np.linalg.eigvalsh(a.as_matrix())
    hi, lo = eigenvalues(a)
    scale = max(1.0, abs(xx), abs(xy), abs(yy))
    assert abs(lo - w[0]) <= 1e-12 * scale
    assert abs(hi - w[1]) <= 1e-12 * scale


def test_small_eigenvalue_keeps_relative_accuracy():
    # half_tr - root would cancel to zero here
    hi, lo = eigenvalues(SymTensor2(3.0, 0.0, 1e-26))
    assert hi == 3.0
    assert lo == pytest.approx(1e-26, rel=1e-14)


def test_eigenvalues_broadcast_over_fields():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((50, 2, 2))
    m = m + np.swapaxes(m, 1, 2)
    hi, lo = eigenvalues(SymTensor2.from_matrix(m))
    w = np.linalg.eigvalsh(m)
    np.testing.assert_allclose(lo, w[:, 0], atol=1e-13)
    np.testing.assert_allclose(hi, w[:, 1], atol=1e-13)


@settings(max_examples=200)
@given(spd())
def test_sqrt_spd_against_eigendecomposition(a):
    w, v = np.linalg.eigh(a.as_matrix())
    expected = v @ np.diag(np.sqrt(w)) @ v.T
    got = sqrt_spd(a).as_matrix()
    assert np.max(np.abs(got - expected)) <= 1e-10 * max(1.0, np.max(np.sqrt(w)))
    # and it squares back
    assert np.max(np.abs(square(sqrt_spd(a)).as_matrix() - a.as_matrix())) <= 1e-10 * frobenius_norm(a)


def test_sqrt_spd_rejects_indefinite():
    with pytest.raises(ValueError):
        sqrt_spd(SymTensor2(1.0, 0.0, -1.0))


@given(finite, finite, finite)
def test_cayley_hamilton_identity(xx, xy, yy):
    r = cayley_hamilton_residual(SymTensor2(xx, xy, yy))
    scale = 1.0 + xx * xx + xy * xy + yy * yy
    assert max(abs(r.xx), abs(r.xy), abs(r.yy)) <= 1e-12 * scale


@given(spd())
def test_inverse(a):
    prod = a.as_matrix() @ inverse(a).as_matrix()
    np.testing.assert_allclose(prod, np.eye(2), atol=1e-9)


def test_is_spd():
    assert is_spd(SymTensor2(2.0, 1.0, 2.0))
    assert not is_spd(SymTensor2(1.0, 1.0, 1.0))
    assert not is_spd(SymTensor2(1.0, 0.0, 0.0), tol=0.0)
    with pytest.raises(ValueError):
        is_spd(identity(), tol=-1.0)


@given(finite, finite, finite, finite, finite, finite, finite)
def test_contractions_match_matrix_products(a, b, c, d, e, f, g):
    s = SymTensor2(a, b, c)
    t = Tensor2(d, e, f, g)
    sm, tm = s.as_matrix(), t.as_matrix()
    np.testing.assert_allclose(one_contract(s, t).as_matrix(), sm @ tm, atol=1e-9)
    np.testing.assert_allclose(one_contract_left(t, s).as_matrix(), tm @ sm, atol=1e-9)
    assert double_contract(t, s) == pytest.approx(np.sum(tm * sm), abs=1e-9)
    assert double_contract(s, s) == pytest.approx(np.sum(sm * sm), abs=1e-9)


def test_array_times_tensor_defers_to_tensor():
    f = np.array([1.0, 2.0])
    out = f * SymTensor2(np.ones(2), np.zeros(2), np.ones(2))
    assert isinstance(out, SymTensor2)
    np.testing.assert_array_equal(out.xx, [1.0, 2.0])


def test_matrix_roundtrip_and_sym_part():
    m = np.array([[1.0, 2.0], [4.0, 3.0]])
    s = SymTensor2.from_matrix(m)
    assert (s.xx, s.xy, s.yy) == (1.0, 3.0, 3.0)
    t = Tensor2.from_matrix(m)
    np.testing.assert_array_equal(t.as_matrix(), m)
    np.testing.assert_array_equal(t.T.as_matrix(), m.T)
    assert t.sym() == SymTensor2(1.0, 3.0, 3.0)
