"""Evolution of a single tensor under a spatially uniform velocity gradient."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .derivatives import ucm_stretch
from .models import (ModelSpec, builtin_model, conformation_rhs,
                     stress_from_conformation, stress_rhs)
from .tensor import (SymTensor2, Tensor2, double_contract, eigenvalues,
                     frobenius_norm, square, trace)

BLOWUP_NORM = 1e12
SQRT3 = math.sqrt(3.0)
# Time at which the positivity-loss example reaches a(t) = 0.
T1_CLOSED_FORM = math.log(3.0) / (8.0 * SQRT3)


def extensional(rate: float = 1.0) -> Callable[[float], Tensor2]:
    """Planar extension ``v = rate * (x, -y)``."""
    g = Tensor2(rate, 0.0, 0.0, -rate)
    return lambda t: g


def simple_shear(rate: float = 1.0) -> Callable[[float], Tensor2]:
    """``v = (rate * y, 0)``, so ``d_y v_x = rate``."""
    g = Tensor2(0.0, 0.0, rate, 0.0)
    return lambda t: g


def rotation(rate: float = 1.0) -> Callable[[float], Tensor2]:
    """Rigid rotation ``v = rate * (-y, x)``."""
    g = Tensor2(0.0, rate, -rate, 0.0)
    return lambda t: g


def oscillatory_shear(rate: float = 1.0, omega: float = 2.0 * math.pi) -> Callable[[float], Tensor2]:
    return lambda t: Tensor2(0.0, 0.0, rate * math.cos(omega * t), 0.0)


def no_flow() -> Callable[[float], Tensor2]:
    g = Tensor2(0.0, 0.0, 0.0, 0.0)
    return lambda t: g


FLOWS = {"extensional": extensional, "shear": simple_shear, "rotation": rotation,
         "oscillatory_shear": oscillatory_shear, "none": no_flow}


@dataclass
class HomogeneousScenario:
    """A model, an initial tensor and a uniform flow history.

    ``formulation`` selects which law is integrated: ``"conformation"``
    (``initial`` is ``C0``) or ``"stress"`` (``initial`` is ``sigma0``).
    """

    model: ModelSpec
    initial: SymTensor2
    gradv_fn: Callable[[float], Tensor2]
    dt: float = 1e-3
    t_max: float = 1.0
    scheme: str = "rk4"
    formulation: str = "conformation"
    aux0: Optional[float] = None
    stop_on_positivity_loss: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max >= self.dt:
            raise ValueError("t_max must be at least dt")
        if self.scheme not in ("rk4", "euler"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.formulation == "conformation" and self.model.conformation is None:
            raise ValueError(f"{self.model.name} has no conformation form")
        if self.formulation == "stress" and self.model.stress is None:
            raise ValueError(f"{self.model.name} has no stress form")
        if self.formulation not in ("conformation", "stress"):
            raise ValueError(f"unknown formulation {self.formulation!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray          # rows [xx, xy, yy]
    aux: Optional[np.ndarray] = None
    stop_reason: str = "completed"
    stop_time: Optional[float] = None
    stepper: Optional[Callable] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def tensors(self) -> list:
        return [SymTensor2(*row) for row in self.states]

    def tensor(self, i: int) -> SymTensor2:
        return SymTensor2(*self.states[i])

    @property
    def field(self) -> SymTensor2:
        """All states as one tensor with array components."""
        return SymTensor2(self.states[:, 0], self.states[:, 1], self.states[:, 2])

    def min_eigenvalues(self) -> np.ndarray:
        return np.asarray(eigenvalues(self.field)[1])

    def to_csv(self, path) -> None:
        """Columns ``t, Cxx, Cxy, Cyy, lambda_min, tr, aux``."""
        lam = self.min_eigenvalues()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "Cxx", "Cxy", "Cyy", "lambda_min", "tr", "aux"])
            for i, t in enumerate(self.times):
                xx, xy, yy = self.states[i]
                aux = "" if self.aux is None else repr(float(self.aux[i]))
                w.writerow([repr(float(t)), repr(float(xx)), repr(float(xy)), repr(float(yy)),
                            repr(float(lam[i])), repr(float(xx + yy)), aux])


def pompom_regularized_rhs(state, gradv: Tensor2, q: float, eps_reg: float, model: Optional[ModelSpec] = None):
    """Right-hand side of the regularized Pom-Pom law.

    ``d_t Lambda = (q - Lambda)/(q - Lambda + eps) * (Lambda (Dv:C) - (Lambda - 1))``
    together with ``D C + (C - I/d) = 0``.  ``eps_reg = 0`` gives the
    unregularized stretch equation.
    """
    c, lam = state
    if lam >= q:
        raise ValueError(f"backbone stretch {lam} must stay below q = {q}")
    if model is None:
        model = builtin_model("pompom_regularized", {"q": q, "eps_reg": eps_reg, "unsafe_model": eps_reg == 0})
    dc = conformation_rhs(model, c, gradv)
    pref = (q - lam) / (q - lam + eps_reg)
    dlam = pref * (lam * double_contract(gradv, c) - (lam - 1.0))
    return dc, dlam


def _make_rhs(s: HomogeneousScenario) -> Callable:
    m = s.model
    g_of_t = s.gradv_fn
    if s.formulation == "stress":
        def rhs(t, y):
            d = stress_rhs(m, SymTensor2(*y[:3].tolist()), g_of_t(t))
            return np.array([d.xx, d.xy, d.yy])
    elif m.stress_kind == "trace_normalized_aux":
        # The stretch is carried as w = ln(q - Lambda), which keeps Lambda < q
        # in floating point while q - Lambda decays exponentially.
        q, eps = m.aux["q"], m.aux["eps_reg"]

        def rhs(t, y):
            c = SymTensor2(*y[:3].tolist())
            g = g_of_t(t)
            gap = math.exp(y[3])
            lam = q - gap
            dc = conformation_rhs(m, c, g)
            bracket = lam * double_contract(g, c) - (lam - 1.0)
            return np.array([dc.xx, dc.xy, dc.yy, -bracket / (gap + eps)])
    else:
        def rhs(t, y):
            d = conformation_rhs(m, SymTensor2(*y.tolist()), g_of_t(t))
            return np.array([d.xx, d.xy, d.yy])
    return rhs


def _rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _euler_step(rhs, t, y, h):
    return y + h * rhs(t, y)


def _check_trace_free(g: Tensor2, t: float) -> None:
    tr = g.xx + g.yy
    scale = 1.0 + abs(g.xx) + abs(g.xy) + abs(g.yx) + abs(g.yy)
    if abs(tr) > 1e-12 * scale:
        raise ValueError(f"velocity gradient is not trace-free at t={t} (tr = {tr:g})")


def integrate(s: HomogeneousScenario) -> Trajectory:
    """Fixed-step integration of ``d_t A = rhs(A, grad v(t))``.

    Integration stops early (``stop_reason = "blowup"``) at the first state
    that is non-finite or has norm above ``1e12``; that state is not
    recorded and ``stop_time`` is its time.

    Raises
    ------
    ValueError
        If the velocity gradient is not trace-free at a step time.
    """
    rhs = _make_rhs(s)
    step = _rk4_step if s.scheme == "rk4" else _euler_step
    n_steps = int(round(s.t_max / s.dt))
    h = s.dt
    y = s.initial.as_array()
    with_aux = s.model.stress_kind == "trace_normalized_aux" and s.formulation == "conformation"
    if with_aux:
        q = s.model.aux["q"]
        lam0 = s.model.aux["lambda0"] if s.aux0 is None else s.aux0
        if lam0 >= q:
            raise ValueError(f"initial stretch {lam0} must be below q = {q}")
        y = np.append(y, math.log(q - lam0))
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, y.size))
    times[0], states[0] = 0.0, y
    stop_reason, stop_time = "completed", None
    count = n_steps + 1
    for i in range(n_steps):
        t = i * h
        _check_trace_free(s.gradv_fn(t), t)
        try:
            y_new = step(rhs, t, y, h)
        except (ValueError, FloatingPointError, ZeroDivisionError):
            y_new = np.full_like(y, np.nan)
        t_new = (i + 1) * h
        if not np.all(np.isfinite(y_new)) or math.sqrt(float(y_new[:3] @ y_new[:3] + y_new[1] ** 2)) > BLOWUP_NORM:
            stop_reason, stop_time, count = "blowup", t_new, i + 1
            break
        y = y_new
        times[i + 1], states[i + 1] = t_new, y
        if s.stop_on_positivity_loss and eigenvalues(SymTensor2(*y[:3].tolist()))[1] <= 0.0:
            stop_reason, stop_time, count = "positivity_loss", t_new, i + 2
            break
    times, states = times[:count], states[:count]
    if with_aux:
        aux = q - np.exp(states[:, 3])

        def stepper(t, y, hh):
            # Public states carry Lambda; the integrator works with ln(q - Lambda).
            z = step(rhs, t, np.append(y[:3], math.log(q - y[3])), hh)
            return np.append(z[:3], q - math.exp(z[3]))
    else:
        aux = None

        def stepper(t, y, hh):
            return step(rhs, t, y, hh)
    return Trajectory(times, states[:, :3].copy(), aux, stop_reason, stop_time, stepper=stepper)


def first_loss_of_positivity(traj: Trajectory, tol: float = 1e-8) -> Optional[float]:
    """First time the smallest eigenvalue reaches zero, or ``None``.

    The crossing is bracketed on the trajectory grid and refined by bisection
    over partial steps of the trajectory's own integrator (linear
    interpolation of the eigenvalue if no integrator is attached).
    """
    lam = traj.min_eigenvalues()
    bad = np.flatnonzero(lam <= 0.0)
    if bad.size == 0:
        return None
    i = int(bad[0])
    if i == 0:
        return float(traj.times[0])
    t0, t1 = float(traj.times[i - 1]), float(traj.times[i])
    if traj.stepper is None:
        return t0 + (t1 - t0) * lam[i - 1] / (lam[i - 1] - lam[i])
    y0 = np.asarray(traj.states[i - 1])
    if traj.aux is not None:
        y0 = np.append(y0, traj.aux[i - 1])
    lo, hi = 0.0, t1 - t0
    while hi - lo > 0.01 * tol:
        mid = 0.5 * (lo + hi)
        y = traj.stepper(t0, y0, mid)
        if eigenvalues(SymTensor2(*y[:3].tolist()))[1] > 0.0:
            lo = mid
        else:
            hi = mid
    return t0 + 0.5 * (lo + hi)


class RiccatiBlowUp(ValueError):
    def __init__(self, t: float, blowup_time: float):
        self.blowup_time = blowup_time
        super().__init__(f"t = {t} is past the blow-up time {blowup_time}")


def riccati_blowup_time(beta0: float) -> Optional[float]:
    """Finite forward blow-up time of ``beta' = 6 - 2 beta^2`` (only for ``beta0 < -sqrt 3``)."""
    if beta0 >= -SQRT3:
        return None
    k = (SQRT3 + beta0) / (SQRT3 - beta0)
    return math.log(-1.0 / k) / (4.0 * SQRT3)


def riccati_beta(t: float, beta0: float) -> float:
    """Closed-form solution of ``beta' + 2 beta^2 = 6``.

    ``beta(t) = sqrt3 - 2 sqrt3 / (1 + K exp(4 sqrt3 t))``, ``K = (sqrt3 + beta0)/(sqrt3 - beta0)``.

    Raises
    ------
    ValueError
        For ``beta0 = sqrt3`` (use the constant solution) or ``t`` beyond the
        blow-up time (``RiccatiBlowUp``, carrying ``blowup_time``).
    """
    if beta0 == SQRT3:
        raise ValueError("beta0 = sqrt(3) is the equilibrium; the closed form is singular there")
    tb = riccati_blowup_time(beta0)
    if tb is not None and t >= tb:
        raise RiccatiBlowUp(t, tb)
    k = (SQRT3 + beta0) / (SQRT3 - beta0)
    return SQRT3 - 2.0 * SQRT3 / (1.0 + k * math.exp(4.0 * SQRT3 * t))


COUNTEREXAMPLE_C0 = SymTensor2((3.0 - SQRT3) / 4.0, 0.0, (9.0 + SQRT3) / 4.0)


def counterexample_scenario(dt: float = 1e-5, t_max: float = 0.1) -> HomogeneousScenario:
    """Planar extension ``v = (x, -y)`` of the law ``D C = 2 (Dv:C)(I - C)``.

    With ``C = diag(a, b)`` this is exactly ``a' - 2a = 2(a - b)(1 - a)``,
    ``b' + 2b = 2(a - b)(1 - b)``; from ``a0 = (3 - sqrt3)/4``,
    ``b0 = (9 + sqrt3)/4`` the entry ``a`` reaches zero at ``ln 3 / (8 sqrt 3)``.
    """
    model = builtin_model("hulsen_counterexample", {"coupling": 2.0})
    return HomogeneousScenario(model, COUNTEREXAMPLE_C0, extensional(1.0), dt=dt, t_max=t_max,
                               stop_on_positivity_loss=True)


def formulation_equivalence(m: ModelSpec, c0: SymTensor2, gradv_fn, dt: float, t_max: float,
                            scheme: str = "rk4") -> float:
    """Max over time of ``|sigma_stress(t) - sigma(C(t))|`` for the two formulations.

    Raises
    ------
    FloatingPointError
        If either integration blows up before ``t_max``.
    """
    tc = integrate(HomogeneousScenario(m, c0, gradv_fn, dt, t_max, scheme, "conformation"))
    sigma0 = stress_from_conformation(m, c0)
    ts = integrate(HomogeneousScenario(m, sigma0, gradv_fn, dt, t_max, scheme, "stress"))
    if tc.stop_reason != "completed" or ts.stop_reason != "completed":
        raise FloatingPointError(f"integration stopped early ({tc.stop_reason}, {ts.stop_reason})")
    from_c = stress_from_conformation(m, tc.field)
    diff = ts.field - from_c
    return float(np.max(frobenius_norm(diff)))


def convergence_order(dts, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(dt)``."""
    return float(np.polyfit(np.log(np.asarray(dts)), np.log(np.asarray(errors)), 1)[0])


def mgi_square_law_residual(m: ModelSpec, traj: Trajectory, gradv_fn, stencil: int = 4) -> np.ndarray:
    """Residual of the stress-squared law along an MGI trajectory.

    ``d_t(s^2) - (s^2.grad v + grad v^T.s^2) - (2 L'/L) s^2 + (2/L)(Dv:s) s^2``
    with ``d_t`` from centred differences of order ``stencil`` (2 or 4);
    returns its norm at the interior times the stencil reaches.
    """
    if stencil not in (2, 4):
        raise ValueError("stencil must be 2 or 4")
    t = traj.times
    sig = stress_from_conformation(m, traj.field, t)
    sq = square(sig)
    sq_arr = np.stack([sq.xx, sq.xy, sq.yy], 1)
    h = t[1] - t[0]
    w = stencil // 2
    if stencil == 2:
        dsq = (sq_arr[2:] - sq_arr[:-2]) / (2.0 * h)
    else:
        dsq = (-sq_arr[4:] + 8.0 * sq_arr[3:-1] - 8.0 * sq_arr[1:-3] + sq_arr[:-4]) / (12.0 * h)
    out = np.empty(len(t) - 2 * w)
    for j in range(w, len(t) - w):
        g = gradv_fn(t[j])
        sj = SymTensor2(float(sig.xx[j]), float(sig.xy[j]), float(sig.yy[j]))
        s2 = SymTensor2(*sq_arr[j])
        lam, dlam = m.stretch(t[j]), m.dstretch(t[j])
        model_part = (ucm_stretch(s2, g) + (2.0 * dlam / lam) * s2
                      - (2.0 / lam) * double_contract(g, sj) * s2)
        out[j - w] = frobenius_norm(SymTensor2(*dsq[j - w]) - model_part)
    return out


def mgi_cayley_defect(m: ModelSpec, traj: Trajectory, gradv_fn) -> np.ndarray:
    """``|Lambda (Dv:sigma) - Dv:sigma^2|`` along an MGI trajectory."""
    t = traj.times
    sig = stress_from_conformation(m, traj.field, t)
    sq = square(sig)
    out = np.empty(len(t))
    for j in range(len(t)):
        g = gradv_fn(t[j]).sym()
        sj = SymTensor2(sig.xx[j], sig.xy[j], sig.yy[j])
        s2 = SymTensor2(sq.xx[j], sq.xy[j], sq.yy[j])
        out[j] = abs(m.stretch(t[j]) * double_contract(g, sj) - double_contract(g, s2))
    return out


def trace_series(traj: Trajectory) -> np.ndarray:
    return np.asarray(trace(traj.field))
