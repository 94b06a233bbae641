"""Monitors for the inequalities and identities satisfied by the models.

Each monitor returns a ``DiagnosticReport`` whose status is ``"pass"``,
``"fail"`` or ``"inapplicable"`` (hypotheses of the inequality not met).
Reports serialize to JSON lines.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .models import ModelSpec, hulsen_form_classifier  # noqa: F401  (re-exported)
from .tensor import SymTensor2, Tensor2, det, eigenvalues, frobenius_norm, trace

PASS, FAIL, INAPPLICABLE = "pass", "fail", "inapplicable"
ABS_FLOOR = 1e-12


@dataclass
class DiagnosticReport:
    name: str
    status: str
    worst: Optional[float] = None
    location: Any = None
    tolerance: Optional[float] = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> str:
        return json.dumps(asdict(self), default=_json_default, sort_keys=True)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_jsonl(reports: Sequence[DiagnosticReport], path) -> None:
    with open(path, "w") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")


def _loc(flat_index: int, shape) -> Any:
    if not shape:
        return None
    return [int(i) for i in np.unravel_index(flat_index, shape)]


# ---------------------------------------------------------------------------
# |A| <= tr A <= sqrt(d) |A|


def trace_norm_equivalence(a: SymTensor2, tol: float = 1e-12) -> DiagnosticReport:
    """Check ``|A| <= tr A <= sqrt(2) |A|`` for positive semi-definite ``A``.

    ``a`` may be a single tensor or a field.  Points that are not positive
    semi-definite are excluded; if none remain the report is inapplicable.
    ``worst`` is the smallest slack of either inequality relative to ``|A|``.
    """
    lo = np.asarray(eigenvalues(a)[1])
    norm = np.asarray(frobenius_norm(a), dtype=float)
    tr = np.asarray(trace(a), dtype=float)
    shape = np.shape(lo)
    ok = lo >= -tol * np.maximum(norm, ABS_FLOOR)
    n_bad = int(np.size(ok) - np.count_nonzero(ok))
    if not np.any(ok):
        return DiagnosticReport("trace_norm_equivalence", INAPPLICABLE, None, None, tol,
                                {"reason": "not positive semi-definite", "min_eigenvalue": float(np.min(lo))})
    scale = np.maximum(norm, ABS_FLOOR)
    slack = np.minimum(tr - norm, math.sqrt(2.0) * norm - tr) / scale
    slack = np.where(ok, slack, np.inf)
    i = int(np.argmin(slack))
    worst = float(np.ravel(slack)[i])
    status = PASS if worst >= -tol else FAIL
    return DiagnosticReport("trace_norm_equivalence", status, worst, _loc(i, shape), tol,
                            {"points": int(np.size(ok)), "inapplicable_points": n_bad})


# ---------------------------------------------------------------------------
# |grad sigma| <= |sigma^-1| |grad sigma^2| / sqrt 2


def _spectral_grad(f: np.ndarray, length: float) -> list:
    """Spectral derivative of a periodic array along each of its axes."""
    out = []
    fh = np.fft.fftn(f)
    for ax, n in enumerate(f.shape):
        k = 2.0 * math.pi / length * np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            k[n // 2] = 0.0
        shape = [1] * f.ndim
        shape[ax] = n
        out.append(np.real(np.fft.ifftn(1j * k.reshape(shape) * fh)))
    return out


def _matrix_field(sigma) -> np.ndarray:
    m = sigma.as_matrix()
    if m.ndim < 3:
        raise ValueError("gradient_sqrt_inequality needs a field, not a single tensor")
    return m


def gradient_sqrt_inequality(sigma, length: float = 2.0 * math.pi, rtol: float = 1e-8,
                             atol: float = ABS_FLOOR, det_floor: float = 1e-14) -> DiagnosticReport:
    """Pointwise check of ``|grad s| <= |s^-1| |grad(s^2)| / sqrt 2`` on a periodic grid.

    ``sigma`` is a ``SymTensor2`` or ``Tensor2`` field over a 1D or 2D
    periodic grid of period ``length``.  ``grad s`` is spectral and
    ``grad(s^2) = s grad s + (grad s) s`` (Frobenius norms over all indices).
    A field that is not symmetric or not positive definite everywhere does
    not meet the hypotheses; the report is then inapplicable and records
    ``max|grad s|`` and ``max|grad s^2|``.  Points with ``det s < det_floor``
    are skipped.
    """
    m = _matrix_field(sigma)
    spatial = m.shape[:-2]
    grads = _spectral_grad_matrix(m, length)
    grad_norm_sq = sum(np.sum(g * g, axis=(-2, -1)) for g in grads)
    sq_grads = [m @ g + g @ m for g in grads]
    sq_norm_sq = sum(np.sum(g * g, axis=(-2, -1)) for g in sq_grads)
    lhs, grad_sq = np.sqrt(grad_norm_sq), np.sqrt(sq_norm_sq)
    details = {"max_grad_sigma": float(lhs.max()), "max_grad_sigma_sq": float(grad_sq.max())}

    symmetric = np.allclose(m[..., 0, 1], m[..., 1, 0], rtol=0.0, atol=1e-14)
    if not symmetric:
        return DiagnosticReport("gradient_sqrt_inequality", INAPPLICABLE, None, None, rtol,
                                {**details, "reason": "field is not symmetric"})
    s = SymTensor2.from_matrix(m)
    lo = np.asarray(eigenvalues(s)[1])
    d = np.asarray(det(s))
    usable = (lo > 0) & (d >= det_floor)
    if not np.all(lo > 0):
        return DiagnosticReport("gradient_sqrt_inequality", INAPPLICABLE, None, None, rtol,
                                {**details, "reason": "field is not positive definite",
                                 "min_eigenvalue": float(lo.min())})
    inv_norm = np.sqrt(s.xx ** 2 + 2 * s.xy ** 2 + s.yy ** 2) / np.where(usable, d, 1.0)
    rhs = inv_norm * grad_sq / math.sqrt(2.0)
    slack = np.where(usable, rhs * (1.0 + rtol) + atol - lhs, np.inf)
    i = int(np.argmin(slack))
    worst = float(np.ravel(slack)[i])
    status = PASS if worst >= 0 else FAIL
    details.update(skipped_points=int(np.size(usable) - np.count_nonzero(usable)),
                   max_ratio=float(np.max(np.where(usable & (rhs > 0), lhs / np.where(rhs > 0, rhs, 1.0), 0.0))))
    return DiagnosticReport("gradient_sqrt_inequality", status, worst, _loc(i, spatial), rtol, details)


def _spectral_grad_matrix(m: np.ndarray, length: float) -> list:
    """``[d_k m]`` for each spatial axis ``k`` of a ``(..., 2, 2)`` field."""
    ndim = m.ndim - 2
    comps = {(i, j): _spectral_grad(m[..., i, j], length) for i in range(2) for j in range(2)}
    out = []
    for k in range(ndim):
        g = np.empty_like(m)
        for (i, j), gl in comps.items():
            g[..., i, j] = gl[k]
        out.append(g)
    return out


def random_spd_field(n: int, rng: np.random.Generator, c: float = 0.1, band: int = 3) -> SymTensor2:
    """Smooth SPD field ``A^T A + c I`` on an ``n x n`` periodic grid.

    The entries of ``A`` are random trigonometric polynomials of degree
    ``band`` in each direction.
    """
    x = 2.0 * math.pi * np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    entries = []
    for _ in range(4):
        f = np.zeros((n, n))
        for kx in range(-band, band + 1):
            for ky in range(-band, band + 1):
                a, phase = rng.standard_normal(), rng.uniform(0, 2 * math.pi)
                f += a * np.cos(kx * X + ky * Y + phase)
        entries.append(f / (2 * band + 1))
    a11, a12, a21, a22 = entries
    return SymTensor2(a11 * a11 + a21 * a21 + c, a11 * a12 + a21 * a22, a12 * a12 + a22 * a22 + c)


def counter_field(n: int = 64) -> Tensor2:
    """Non-symmetric field ``[[1, cos 2 pi x], [0, -1]]`` on ``[0, 1)``; its square is ``I``."""
    x = np.arange(n) / n
    one = np.ones(n)
    return Tensor2(one, np.cos(2 * math.pi * x), 0.0 * one, -one)


# ---------------------------------------------------------------------------
# Trace cap and positivity


def numeric_trace_sup(m: ModelSpec, s_max: float = 1e6, points: int = 20001) -> float:
    """Largest ``s gamma(s)`` on a log-spaced grid of ``[0, s_max]``, in physical stress units."""
    if m.conformation is None or m.stress_kind != "gamma":
        raise ValueError(f"{m.name} has no gamma(s) stress map")
    s = np.concatenate([[0.0], np.logspace(-6, math.log10(s_max), points)])
    return float(np.max(s * m.conformation.gamma(s)))


def stress_bound_monitor(m: ModelSpec, sigma_series: Sequence[SymTensor2],
                         times: Optional[Sequence[float]] = None, tol: float = 1e-10) -> DiagnosticReport:
    """Check ``tr sigma`` against the model's closed-form cap over a series.

    Traces are taken in the form variable ``sigma_f`` (equal to ``sigma``
    unless the model shifts it).  For laws whose cap is only approached
    (PEC, PTT) the check is strict, ``max tr < cap``.  For normalized laws
    (MGI, Pom-Pom) the cap (``Lambda(t)``, or ``q^2`` with a stretch
    variable) is attained and the check is ``tr <= cap`` within ``tol``
    relative.  ``worst`` is the smallest margin
    ``cap - tr``.
    """
    traces = [np.asarray(trace(m.to_form_stress(sig)), dtype=float) for sig in sigma_series]
    return stress_bound_from_traces(m, traces, times, tol)


def stress_bound_from_traces(m: ModelSpec, traces: Sequence, times: Optional[Sequence[float]] = None,
                             tol: float = 1e-10) -> DiagnosticReport:
    """``stress_bound_monitor`` on precomputed traces of ``sigma_f`` (arrays or maxima)."""
    times = list(times) if times is not None else [0.0] * len(traces)
    if len(times) != len(traces):
        raise ValueError("times and the trace series differ in length")
    if not times or m.trace_cap(times[0]) is None:
        return DiagnosticReport("stress_bound_monitor", INAPPLICABLE, None, None, tol,
                                {"reason": f"{m.name} has no bounded trace"})
    worst, where, max_tr = math.inf, None, -math.inf
    for k, (t, tr) in enumerate(zip(times, traces)):
        tr = np.asarray(tr, dtype=float)
        i = int(np.argmax(tr))
        top = float(np.ravel(tr)[i])
        max_tr = max(max_tr, top)
        margin = m.trace_cap(t) - top
        if margin < worst:
            worst, where = margin, {"index": k, "t": float(t), "point": _loc(i, np.shape(tr))}
    cap0 = m.trace_cap(times[0])
    # The sup of s gamma(s) is never reached; normalized laws sit on (or, for
    # the stretch variable, round onto) their cap.
    strict = m.stress_kind == "gamma"
    ok = worst > 0 if strict else worst >= -tol * max(abs(cap0), 1.0)
    return DiagnosticReport("stress_bound_monitor", PASS if ok else FAIL, worst, where, tol,
                            {"max_trace": max_tr, "cap": cap0, "strict": strict})


def positivity_monitor(c_series: Sequence[SymTensor2], times: Sequence[float]) -> DiagnosticReport:
    """Smallest eigenvalue over space at each time and the first time it is ``<= 0``.

    ``details["crossing_estimate"]`` interpolates the zero crossing linearly
    between the last positive and the first non-positive sample.
    """
    mins = [float(np.min(eigenvalues(c)[1])) for c in c_series]
    return positivity_from_minima(mins, times)


def positivity_from_minima(mins: Sequence[float], times: Sequence[float]) -> DiagnosticReport:
    """``positivity_monitor`` on a precomputed series of spatial minimum eigenvalues."""
    times = list(times)
    mins = np.asarray(mins, dtype=float)
    if len(times) != len(mins):
        raise ValueError("times and the eigenvalue series differ in length")
    bad = np.flatnonzero(mins <= 0.0)
    k = int(np.argmin(mins))
    details = {"min_eigenvalue_series_min": float(mins[k]), "samples": len(mins)}
    if bad.size == 0:
        return DiagnosticReport("positivity_monitor", PASS, float(mins[k]),
                                {"index": k, "t": float(times[k])}, 0.0, details)
    j = int(bad[0])
    loc = {"index": j, "t": float(times[j])}
    if j > 0:
        t0, t1, l0, l1 = times[j - 1], times[j], mins[j - 1], mins[j]
        details["crossing_estimate"] = float(t0 + (t1 - t0) * l0 / (l0 - l1))
    else:
        details["crossing_estimate"] = float(times[0])
    details["first_violation_time"] = float(times[j])
    return DiagnosticReport("positivity_monitor", FAIL, float(mins[k]), loc, 0.0, details)
