"""Constitutive laws in conformation and stress form.

Conformation form (d = 2)::

    D_xi C = -alpha(s) C + beta(s) I - (Dv:C)(p C - q I),   s = tr C
    sigma_f = gamma(s) C

The trilinear ``(p, q)`` term is zero for every law covered by the
conformation/stress mapping; it carries the Rolie-Poly coupling and the
positivity-loss example.

Stress form, in the same variable ``sigma_f``::

    D_xi sigma_f = -a(t) sigma_f - b(t) (Dv:sigma_f) sigma_f + c(t) I,  t = tr sigma_f

Laws obtained from an Oldroyd-type equation through the change of variable
``sigma_f = lam * sigma + eta_p * I`` (Oldroyd-B, PTT) keep that shift inside
the model; everything user-facing is expressed in the physical stress
``sigma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .derivatives import check_xi, dxi_stretch
from .tensor import (SymTensor2, Tensor2, double_contract, identity, is_spd,
                     sqrt_spd, trace)

DIM = 2

G1_POSITIVE = "g1_positive"
G1_ZERO = "g1_zero"
G1_INDEFINITE = "g1_indefinite"
INAPPLICABLE = "inapplicable"


class ModelError(ValueError):
    """Unknown model name or invalid parameters; ``errors`` lists every problem."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _const(value: float) -> Callable:
    value = float(value)
    return lambda s: value + 0.0 * s


def _zero(s):
    return 0.0 * s


@dataclass(frozen=True)
class ConformationForm:
    alpha: Callable
    beta: Callable
    gamma: Callable
    dgamma: Callable
    beta_zero: bool = False
    trilinear: tuple = (0.0, 0.0)

    @property
    def has_trilinear(self) -> bool:
        return self.trilinear[0] != 0.0 or self.trilinear[1] != 0.0


@dataclass(frozen=True)
class StressForm:
    """``a, b, c`` as functions of ``t = tr sigma_f``.

    ``b_constant`` is set when ``b`` is the constant ``epsilon`` of the PEC
    theorem rather than a general function.
    """

    a: Callable
    b: Callable
    c: Callable
    b_constant: Optional[float] = None


@dataclass(frozen=True)
class ModelSpec:
    name: str
    conformation: Optional[ConformationForm] = None
    stress: Optional[StressForm] = None
    xi: float = 1.0
    params: dict = field(default_factory=dict)
    # "gamma" | "sqrt_normalized" (MGI) | "trace_normalized" (Pom-Pom) | "trace_normalized_aux"
    stress_kind: str = "gamma"
    stretch: Optional[Callable] = None
    dstretch: Optional[Callable] = None
    # sigma = (sigma_f - offset I) / scale
    shift_scale: float = 1.0
    shift_offset: float = 0.0
    hulsen: str = G1_POSITIVE
    # closed-form supremum of tr sigma_f (None when unbounded)
    trace_sup: Optional[float] = None
    aux: Optional[dict] = None
    # epsilon of the PEC theorem (b = epsilon) when the model has one
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.conformation is None and self.stress is None:
            raise ModelError("a model needs at least one formulation")
        check_xi(self.xi)

    # --- shift between physical stress and the form variable -------------
    def to_form_stress(self, sigma: SymTensor2) -> SymTensor2:
        if self.shift_scale == 1.0 and self.shift_offset == 0.0:
            return sigma
        return self.shift_scale * sigma + identity(self.shift_offset)

    def from_form_stress(self, sigma_f: SymTensor2) -> SymTensor2:
        if self.shift_scale == 1.0 and self.shift_offset == 0.0:
            return sigma_f
        return (sigma_f - identity(self.shift_offset)) / self.shift_scale

    def trace_cap(self, t: float = 0.0, aux=None) -> Optional[float]:
        """Closed-form upper bound of ``tr sigma_f`` at time ``t``."""
        if self.stress_kind in ("sqrt_normalized", "trace_normalized"):
            return float(self.stretch(t))
        if self.stress_kind == "trace_normalized_aux":
            return float(self.aux["q"]) ** 2
        return self.trace_sup


# ---------------------------------------------------------------------------
# Right-hand sides


def pec_form_rhs(sigma_f: SymTensor2, gradv: Tensor2, a_val, b_val, c_val, xi: float = 1.0) -> SymTensor2:
    """``d_t sigma_f`` for given values of ``a, b, c``."""
    dv_s = double_contract(gradv, sigma_f)
    return (dxi_stretch(xi, sigma_f, gradv) - (a_val + b_val * dv_s) * sigma_f
            + identity(c_val))


def conformation_rhs(m: ModelSpec, c: SymTensor2, gradv: Tensor2) -> SymTensor2:
    """``d_t C`` from the conformation law of ``m``."""
    f = m.conformation
    if f is None:
        raise ModelError(f"model {m.name!r} has no conformation form")
    s = trace(c)
    rhs = dxi_stretch(m.xi, c, gradv) - f.alpha(s) * c + identity(f.beta(s))
    if f.has_trilinear:
        p, q = f.trilinear
        dv_c = double_contract(gradv, c)
        rhs = rhs - dv_c * (p * c - identity(q))
    return rhs


def stress_rhs(m: ModelSpec, sigma: SymTensor2, gradv: Tensor2) -> SymTensor2:
    """``d_t sigma`` from the stress law of ``m`` (physical stress in and out)."""
    f = m.stress
    if f is None:
        raise ModelError(f"model {m.name!r} has no stress form")
    sf = m.to_form_stress(sigma)
    t = trace(sf)
    rhs_f = pec_form_rhs(sf, gradv, f.a(t), f.b(t), f.c(t), m.xi)
    return rhs_f / m.shift_scale


def stress_from_conformation(m: ModelSpec, c: SymTensor2, t: float = 0.0, aux=None) -> SymTensor2:
    """Physical stress carried by the conformation ``c``.

    ``gamma(tr C) C`` for polynomial-form laws, ``Lambda(t) sqrt(C)/tr sqrt(C)``
    for MGI and ``Lambda(t) C / tr C`` for the constant-stretch Pom-Pom law;
    ``aux`` is the backbone stretch for the regularized Pom-Pom law
    (``Lambda^2 C / tr C``).
    """
    if m.conformation is None:
        raise ModelError(f"model {m.name!r} has no conformation form")
    kind = m.stress_kind
    if kind == "gamma":
        sf = m.conformation.gamma(trace(c)) * c
    elif kind == "sqrt_normalized":
        if not np.all(is_spd(c, 0.0)):
            raise ValueError("MGI stress needs a positive definite conformation")
        b = sqrt_spd(c)
        sf = (m.stretch(t) / trace(b)) * b
    elif kind == "trace_normalized":
        sf = (m.stretch(t) / trace(c)) * c
    elif kind == "trace_normalized_aux":
        lam = m.aux["lambda0"] if aux is None else aux
        sf = (lam * lam / trace(c)) * c
    else:
        raise ModelError(f"unknown stress kind {kind!r}")
    return m.from_form_stress(sf)


def conformation_from_stress_pec(epsilon: float, sigma: SymTensor2) -> SymTensor2:
    """Inverse of ``sigma = 2 C / (1 + epsilon tr C)``: ``C = sigma / (2 - epsilon tr sigma)``."""
    tr = trace(sigma)
    if np.any(epsilon * tr >= 2.0):
        raise ValueError(f"epsilon * tr(sigma) = {np.max(epsilon * tr):g} must be < 2")
    return sigma / (2.0 - epsilon * tr)


def conformation_from_stress(m: ModelSpec, sigma: SymTensor2) -> SymTensor2:
    """Initial conformation matching a physical stress, for laws with a stress form."""
    sf = m.to_form_stress(sigma)
    if m.name == "pec_larson":
        g, xp = m.params["G"], m.params["xi_prime"]
        # sigma = 3G C / (3(1 - xp) + xp s)  =>  s from the trace, then C.
        tr = trace(sf)
        if np.any(xp * tr >= 3.0 * g):
            raise ValueError("tr(sigma) must stay below 3G/xi'")
        s = 3.0 * (1.0 - xp) * tr / (3.0 * g - xp * tr)
        return sf / m.conformation.gamma(s)
    if m.name == "oldroyd_b":
        return sf / m.params["eta_p"]
    if m.epsilon is not None:
        return conformation_from_stress_pec(m.epsilon, sf)
    raise ModelError(f"no closed-form stress-to-conformation map for {m.name!r}")


# ---------------------------------------------------------------------------
# Mapping between the two formulations


def map_conformation_to_stress_form(f: ConformationForm, s):
    """Values of ``a, b, c`` at the trace point ``s gamma(s)`` (d = 2).

    ``a = (1 + s g'/g) alpha - d g'/g beta``, ``b = -2 g'/g^2``, ``c = g beta``.
    """
    if f.has_trilinear:
        raise ValueError("the mapping does not cover laws with a trilinear conformation term")
    g = f.gamma(s)
    if np.any(np.asarray(g) <= 0):
        raise ValueError("gamma(s) must be positive")
    dg = f.dgamma(s)
    al, be = f.alpha(s), f.beta(s)
    a = (1.0 + s * dg / g) * al - DIM * dg / g * be
    b = -2.0 * dg / (g * g)
    c = g * be
    return a, b, c


def invert_trace_map(f: ConformationForm, t, s_max: float = 1e8, iterations: int = 200):
    """Solve ``s gamma(s) = t`` for ``s`` by bisection on ``[0, s_max]``.

    Diagnostic only; assumes ``s -> s gamma(s)`` is increasing.
    """
    t = np.asarray(t, dtype=float)
    lo = np.zeros_like(t)
    hi = np.full_like(t, s_max)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = mid * f.gamma(mid) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out) if out.ndim == 0 else out


def mapped_stress_form(f: ConformationForm, xi: float = 1.0, s_max: float = 1e8) -> StressForm:
    """Stress form built pointwise from a conformation form via trace inversion.

    Under ``D_xi`` the trilinear coefficient picks up a factor ``xi``.
    """
    def at(t, k):
        return map_conformation_to_stress_form(f, invert_trace_map(f, t, s_max))[k]
    return StressForm(a=lambda t: at(t, 0), b=lambda t: xi * at(t, 1), c=lambda t: at(t, 2))


def pec_construction(a: Callable, c: Callable, epsilon: float, c_zero: bool = False) -> ConformationForm:
    """Conformation form realising ``D sigma + a sigma + eps (Dv:sigma) sigma = c I``.

    ``gamma(s) = 2/(1 + eps s)``, ``alpha(s) = (1 + eps s)(a(s gamma) - d eps c(s gamma)/2)``,
    ``beta(s) = c(s gamma)/gamma(s)``.
    """
    eps = float(epsilon)

    def gamma(s):
        return 2.0 / (1.0 + eps * s)

    def dgamma(s):
        return -2.0 * eps / (1.0 + eps * s) ** 2

    def alpha(s):
        t = s * gamma(s)
        return (1.0 + eps * s) * (a(t) - 0.5 * DIM * eps * c(t))

    def beta(s):
        return c(s * gamma(s)) / gamma(s)

    return ConformationForm(alpha=alpha, beta=beta, gamma=gamma, dgamma=dgamma, beta_zero=c_zero)


# ---------------------------------------------------------------------------
# Catalog

MODEL_NAMES = (
    "oldroyd_b", "pec_larson", "pec_general", "ptt_linear", "ptt_quadratic",
    "ptt_exponential", "mgi", "pompom_const_stretch", "pompom_regularized",
    "rolie_poly_ns", "hulsen_counterexample",
)

# name -> {param: (default or None if required, check, message)}
_POS = (lambda v: v > 0, "must be > 0")
_NONNEG = (lambda v: v >= 0, "must be >= 0")
_UNIT_OPEN = (lambda v: 0 < v < 1, "must lie in (0,1)")
_UNIT_CLOSED = (lambda v: 0 <= v <= 1, "must lie in [0,1]")
_XI = (lambda v: -1 <= v <= 1, "must lie in [-1,1]")
_ANY = (lambda v: True, "")

_PTT_PARAMS = {"lam": (1.0, *_POS), "eta_p": (1.0, *_POS), "kappa": (0.0, *_UNIT_CLOSED),
               "eps_tilde": (0.0, *_NONNEG)}

PARAM_TABLE = {
    "oldroyd_b": {"lam": (1.0, *_POS), "eta_p": (1.0, *_POS)},
    "pec_larson": {"G": (1.0, *_POS), "xi_prime": (None, *_UNIT_OPEN)},
    "pec_general": {"a": (0.0, *_NONNEG), "c": (0.0, *_NONNEG), "epsilon": (None, *_NONNEG)},
    "ptt_linear": dict(_PTT_PARAMS),
    "ptt_quadratic": dict(_PTT_PARAMS),
    "ptt_exponential": dict(_PTT_PARAMS),
    "mgi": {"tau0": (1.0, *_POS)},
    "pompom_const_stretch": {"stretch": (1.0, *_POS)},
    "pompom_regularized": {"q": (2.0, *_POS), "eps_reg": (0.1, *_NONNEG), "lambda0": (1.0, *_POS),
                           "unsafe_model": (False, *_ANY)},
    "rolie_poly_ns": {"mu": (0.0, *_NONNEG), "epsilon": (1.0, *_NONNEG), "G": (1.0, *_POS),
                      "trace_consistent_2d": (False, *_ANY)},
    "hulsen_counterexample": {"coupling": (2.0, *_ANY)},
}
_SHIFTED = {"oldroyd_b", "ptt_linear", "ptt_quadratic", "ptt_exponential"}
# Closures supplied from Python rather than numbers.
_CALLABLE_PARAMS = {"Lambda", "dLambda", "a_fn", "c_fn"}

# Symbol shown in messages, e.g. "xi' must lie in (0,1)".
_DISPLAY = {"xi_prime": "ξ′", "xi": "ξ", "lam": "λ", "eta_p": "η_p", "kappa": "κ",
            "eps_tilde": "ε̃", "epsilon": "ε", "tau0": "τ₀", "mu": "μ", "eps_reg": "ε_reg"}


def validate_params(name: str, params: dict) -> list:
    """Every problem with ``params`` for model ``name`` (empty when valid)."""
    if name not in PARAM_TABLE:
        return [f"unknown model {name!r}; known models: {', '.join(MODEL_NAMES)}"]
    table = PARAM_TABLE[name]
    errors = []
    for key, value in params.items():
        if key in _CALLABLE_PARAMS:
            if not callable(value):
                errors.append(f"{key} must be callable")
            continue
        if key == "xi":
            default, ok, msg = 1.0, *_XI
        elif key in table:
            default, ok, msg = table[key]
        else:
            errors.append(f"unknown parameter {key!r} for model {name!r}")
            continue
        label = _DISPLAY.get(key, key)
        if isinstance(default, bool):
            if not isinstance(value, bool):
                errors.append(f"{label} must be a boolean")
        elif isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            errors.append(f"{label} must be a finite number")
        elif not ok(value):
            errors.append(f"{label} {msg}")
    for key, entry in table.items():
        if entry[0] is None and key not in params:
            errors.append(f"missing required parameter {_DISPLAY.get(key, key)} ({key})")
    if name in _SHIFTED and params.get("xi", 1.0) != 1.0:
        errors.append(f"{name} is only available with the upper convected derivative (xi = 1)")
    if name == "pompom_regularized":
        q = params.get("q", 2.0)
        if params.get("eps_reg", 0.1) == 0 and not params.get("unsafe_model", False):
            errors.append("eps_reg = 0 (unregularized stretch equation) requires unsafe_model = true")
        if params.get("lambda0", 1.0) >= q:
            errors.append("lambda0 must be < q")
    return errors


def _resolved(name: str, params: dict) -> dict:
    out = {k: v[0] for k, v in PARAM_TABLE[name].items()}
    out.update(params)
    return out


def _ptt_f(kind: str, lam: float, eta_p: float, kappa: float) -> Callable:
    k = kappa * lam / eta_p
    if kind == "ptt_linear":
        return lambda s: 1.0 + k * s
    if kind == "ptt_quadratic":
        return lambda s: 1.0 + k * s + 0.5 * (k * s) ** 2
    return lambda s: np.exp(k * s)


def builtin_model(name: str, params: Optional[dict] = None) -> ModelSpec:
    """Catalog model by name.

    Raises
    ------
    ModelError
        Unknown name or invalid parameters (all problems are listed).
    """
    params = dict(params or {})
    errors = validate_params(name, params)
    if errors:
        raise ModelError(errors)
    p = _resolved(name, params)
    xi = float(p.pop("xi", 1.0))

    if name == "oldroyd_b":
        lam, eta = p["lam"], p["eta_p"]
        # lam C^ + C = I, sigma = eta_p (C - I)/lam, i.e. sigma_f = lam sigma + eta_p I = eta_p C.
        conf = ConformationForm(alpha=_const(1.0 / lam), beta=_const(1.0 / lam),
                                gamma=_const(eta), dgamma=_zero)
        stress = StressForm(a=_const(1.0 / lam), b=_zero, c=_const(eta / lam), b_constant=0.0)
        return ModelSpec(name, conf, stress, xi, p, shift_scale=lam, shift_offset=eta,
                         hulsen=G1_POSITIVE, trace_sup=None)

    if name == "pec_larson":
        g, xp = p["G"], p["xi_prime"]
        eps = 2.0 * xp / (3.0 * g)
        conf = ConformationForm(
            alpha=_zero, beta=_zero,
            gamma=lambda s: 3.0 * g / (3.0 * (1.0 - xp) + s * xp),
            dgamma=lambda s: -3.0 * g * xp / (3.0 * (1.0 - xp) + s * xp) ** 2,
            beta_zero=True)
        stress = StressForm(a=_zero, b=_const(xi * eps), c=_zero, b_constant=xi * eps)
        return ModelSpec(name, conf, stress, xi, p, hulsen=G1_ZERO, trace_sup=3.0 * g / xp,
                         epsilon=eps)

    if name == "pec_general":
        eps = p["epsilon"]
        a_fn = p.get("a_fn") or _const(p["a"])
        c_fn = p.get("c_fn") or _const(p["c"])
        c_zero = "c_fn" not in p and p["c"] == 0
        conf = pec_construction(a_fn, c_fn, eps, c_zero=c_zero)
        stress = StressForm(a=a_fn, b=_const(xi * eps), c=c_fn, b_constant=xi * eps)
        return ModelSpec(name, conf, stress, xi, p, hulsen=G1_ZERO if c_zero else G1_POSITIVE,
                         trace_sup=2.0 / eps if eps > 0 else None, epsilon=eps)

    if name.startswith("ptt_"):
        lam, eta, kappa, et = p["lam"], p["eta_p"], p["kappa"], p["eps_tilde"]
        f = _ptt_f(name, lam, eta, kappa)
        # In sigma_f = lam sigma + eta_p I: a = f(.)/lam, c = eta_p f(.)/lam, eps = eps_tilde/lam.
        a_fn = lambda t: f((t - DIM * eta) / lam) / lam  # noqa: E731
        c_fn = lambda t: eta * f((t - DIM * eta) / lam) / lam  # noqa: E731
        eps = et / lam
        conf = pec_construction(a_fn, c_fn, eps)
        stress = StressForm(a=a_fn, b=_const(eps), c=c_fn, b_constant=eps)
        return ModelSpec(name, conf, stress, xi, p, shift_scale=lam, shift_offset=eta,
                         hulsen=G1_POSITIVE, trace_sup=2.0 / eps if eps > 0 else None, epsilon=eps)

    if name == "mgi":
        tau0 = p["tau0"]
        lam_fn = p.get("Lambda") or (lambda t: np.exp(-np.asarray(t) / tau0))
        dlam_fn = p.get("dLambda") or (lambda t: -np.exp(-np.asarray(t) / tau0) / tau0)
        conf = ConformationForm(alpha=_zero, beta=_zero, gamma=_const(1.0), dgamma=_zero, beta_zero=True)
        return ModelSpec(name, conf, None, xi, p, stress_kind="sqrt_normalized",
                         stretch=lam_fn, dstretch=dlam_fn, hulsen=G1_ZERO)

    if name == "pompom_const_stretch":
        st = p.get("Lambda") or _const(p["stretch"])
        dst = p.get("dLambda") or _zero
        conf = ConformationForm(alpha=_const(1.0), beta=_const(1.0 / DIM), gamma=_const(1.0), dgamma=_zero)
        return ModelSpec(name, conf, None, xi, p, stress_kind="trace_normalized",
                         stretch=st, dstretch=dst, hulsen=G1_POSITIVE)

    if name == "pompom_regularized":
        conf = ConformationForm(alpha=_const(1.0), beta=_const(1.0 / DIM), gamma=_const(1.0), dgamma=_zero)
        aux = {"q": p["q"], "eps_reg": p["eps_reg"], "lambda0": p["lambda0"]}
        return ModelSpec(name, conf, None, xi, p, stress_kind="trace_normalized_aux",
                         hulsen=G1_POSITIVE, aux=aux)

    if name == "rolie_poly_ns":
        mu, eps, g = p["mu"], p["epsilon"], p["G"]
        k = 1.0 if p["trace_consistent_2d"] else 2.0 / 3.0
        conf = ConformationForm(alpha=_const(eps), beta=_const(eps), gamma=_const(g), dgamma=_zero,
                                beta_zero=eps == 0, trilinear=(k * (1.0 + mu), k * mu))
        if mu > 0:
            hulsen = G1_INDEFINITE
        else:
            hulsen = G1_POSITIVE if eps > 0 else G1_ZERO
        return ModelSpec(name, conf, None, xi, p, hulsen=hulsen)

    if name == "hulsen_counterexample":
        k = p["coupling"]
        # D C = k (Dv:C)(I - C): g1 = k Dv:C, g2 = -k Dv:C, g3 = 0.
        conf = ConformationForm(alpha=_zero, beta=_zero, gamma=_const(1.0), dgamma=_zero,
                                beta_zero=True, trilinear=(k, k))
        return ModelSpec(name, conf, None, xi, p, hulsen=G1_INDEFINITE if k != 0 else G1_ZERO)

    raise ModelError(f"unknown model {name!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Theorem hypotheses


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    values: dict


@dataclass
class AdmissibilityReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, **c.values} for c in self.checks]}


def pec_admissibility(m: ModelSpec, sigma0: SymTensor2) -> AdmissibilityReport:
    """Evaluate the global-existence hypotheses of the stress formulation.

    Checks ``eps tr sigma_f(0) < 2``, ``(2/eps) a(2/eps) >= d c(2/eps)``,
    ``c > 0 or c == 0`` and that ``sigma_f(0)`` is positive definite.
    """
    f = m.stress
    if f is None or m.epsilon is None:
        raise ModelError(f"model {m.name!r} has no constant-epsilon stress form")
    eps = m.epsilon
    sf = m.to_form_stress(sigma0)
    tr0 = float(trace(sf))
    checks = [HypothesisCheck("sigma_init_spd", bool(is_spd(sf, 0.0)), {"tr": tr0})]
    checks.append(HypothesisCheck("trace_bound", eps * tr0 < 2.0,
                                  {"epsilon_tr_sigma": eps * tr0, "limit": 2.0}))
    if eps > 0:
        x = 2.0 / eps
        lhs, rhs = x * float(f.a(x)), DIM * float(f.c(x))
        checks.append(HypothesisCheck("growth_condition", lhs >= rhs - 1e-12 * max(1.0, abs(rhs)),
                                      {"lhs": lhs, "rhs": rhs}))
    else:
        checks.append(HypothesisCheck("epsilon_positive", False, {"epsilon": eps}))
    grid = np.linspace(0.0, 2.0 / eps if eps > 0 else 10.0, 1001)
    cv = np.asarray(f.c(grid), dtype=float)
    sign_ok = bool(np.all(cv > 0) or np.all(cv == 0))
    checks.append(HypothesisCheck("c_sign", sign_ok, {"c_min": float(cv.min()), "c_max": float(cv.max())}))
    return AdmissibilityReport(checks)


def hulsen_form_classifier(m: ModelSpec) -> str:
    """Sign class of the ``g1`` coefficient in ``D C = g1 I + g2 C + g3 C^2``."""
    if m.conformation is None:
        return INAPPLICABLE
    return m.hulsen
