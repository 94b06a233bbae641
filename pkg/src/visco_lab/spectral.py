"""Pseudo-spectral solver for 2D periodic Navier-Stokes with polymer stress.

Solves on ``[0, 2 pi)^2``::

    d_t v + v.grad v + grad p = lap v + div sigma,   div v = 0
    d_t C + v.grad C = conformation law of the model,  sigma = sigma(C)

Arrays are indexed ``[ix, iy]``.  Velocity is held in Fourier space
(``rfft2`` over both axes, last axis real), the conformation in physical
space.  Products are evaluated pointwise and dealiased with the 2/3 rule.
Time stepping is fourth-order Runge-Kutta with an integrating factor for the
viscous term (Lawson's method) on the velocity and plain RK4 on ``C``.
"""
from __future__ import annotations

import csv
import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .models import ModelSpec, conformation_rhs, stress_from_conformation
from .tensor import SymTensor2, Tensor2, eigenvalues, trace

log = logging.getLogger(__name__)

SERIES_COLUMNS = ("t", "energy", "max_grad_v", "max_tr_sigma", "min_eig_C", "div_residual")
SNAPSHOT_MAGIC = "visco-lab-snapshot"
CFL_LIMIT = 0.5


@dataclass(frozen=True)
class Grid:
    """Uniform ``n x n`` grid on the periodic square of side ``2 pi``."""

    n: int

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 * math.pi / self.n

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @cached_property
    def coords(self) -> tuple:
        x = np.arange(self.n) * self.h
        return np.meshgrid(x, x, indexing="ij")

    @cached_property
    def kx(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, 1.0 / self.n)[:, None]

    @cached_property
    def ky(self) -> np.ndarray:
        return np.fft.rfftfreq(self.n, 1.0 / self.n)[None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx ** 2 + self.ky ** 2

    @cached_property
    def inv_k2(self) -> np.ndarray:
        """``1/|k|^2`` with the mean mode set to zero."""
        with np.errstate(divide="ignore"):
            out = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1.0), 0.0)
        return out

    @cached_property
    def mask(self) -> np.ndarray:
        """2/3-rule dealiasing mask: zero where any ``|k_i| > n/3``."""
        cut = self.n / 3.0
        return ((np.abs(self.kx) <= cut) & (np.abs(self.ky) <= cut)).astype(float)

    def fft(self, f):
        return np.fft.rfft2(f, axes=(-2, -1))

    def ifft(self, fh):
        return np.fft.irfft2(fh, s=(self.n, self.n), axes=(-2, -1))

    def dx(self, fh):
        return 1j * self.kx * fh

    def dy(self, fh):
        return 1j * self.ky * fh

    def integrate(self, f) -> float:
        return float(np.sum(f) * self.cell_area)


# ---------------------------------------------------------------------------
# Projections and pressure


def leray_project(u_hat, grid: Grid):
    """Per-mode projection ``(I - k k^T/|k|^2) u_hat``; the mean mode is untouched.

    ``u_hat`` has a leading axis of length 2 (x and y components).
    """
    ux, uy = u_hat[0], u_hat[1]
    kdotu = (grid.kx * ux + grid.ky * uy) * grid.inv_k2
    return np.stack([ux - grid.kx * kdotu, uy - grid.ky * kdotu])


def _stress_spectra(sigma: SymTensor2, grid: Grid):
    return (grid.fft(np.broadcast_to(sigma.xx, (grid.n, grid.n))),
            grid.fft(np.broadcast_to(sigma.xy, (grid.n, grid.n))),
            grid.fft(np.broadcast_to(sigma.yy, (grid.n, grid.n))))


def pressure_field(sigma: SymTensor2, v, grid: Grid) -> np.ndarray:
    """Zero-mean pressure ``p = -(-lap)^{-1} div div (sigma - v (x) v)``.

    In Fourier space ``p_hat = k_i k_j F_hat_ij / |k|^2`` with ``F = sigma - v (x) v``.
    """
    vx, vy = v[0], v[1]
    f = SymTensor2(sigma.xx - vx * vx, sigma.xy - vx * vy, sigma.yy - vy * vy)
    fxx, fxy, fyy = _stress_spectra(f, grid)
    kx, ky = grid.kx, grid.ky
    ph = (kx * kx * fxx + 2.0 * kx * ky * fxy + ky * ky * fyy) * grid.inv_k2
    return grid.ifft(ph)


def divergence_of_stress(sigma: SymTensor2, grid: Grid):
    """Spectral ``(div sigma)_j = d_i sigma_ij`` as a ``(2, n, n//2+1)`` array."""
    sxx, sxy, syy = _stress_spectra(sigma, grid)
    return np.stack([grid.dx(sxx) + grid.dy(sxy), grid.dx(sxy) + grid.dy(syy)])


def velocity_gradient(v_hat, grid: Grid) -> Tensor2:
    """Physical ``(grad v)_ij = d_i v_j``."""
    vx, vy = v_hat[0], v_hat[1]
    return Tensor2(grid.ifft(grid.dx(vx)), grid.ifft(grid.dx(vy)),
                   grid.ifft(grid.dy(vx)), grid.ifft(grid.dy(vy)))


def divergence_residual(v_hat, grid: Grid) -> float:
    """``max_k |k.v_hat(k)|`` relative to ``max |v_hat|``."""
    num = np.max(np.abs(grid.kx * v_hat[0] + grid.ky * v_hat[1]))
    den = np.max(np.abs(v_hat))
    return float(num / den) if den > 0 else 0.0


# ---------------------------------------------------------------------------
# Initial data


def taylor_green(grid: Grid, amplitude: float = 1.0) -> np.ndarray:
    """``v = A (cos x sin y, -sin x cos y)`` in physical space, shape ``(2, n, n)``."""
    x, y = grid.coords
    return amplitude * np.stack([np.cos(x) * np.sin(y), -np.sin(x) * np.cos(y)])


def taylor_green_pressure(grid: Grid, amplitude: float = 1.0) -> np.ndarray:
    x, y = grid.coords
    return -0.25 * amplitude ** 2 * (np.cos(2 * x) + np.cos(2 * y))


def random_solenoidal(grid: Grid, seed: int, amplitude: float = 1.0,
                      band: tuple = (1.0, 4.0)) -> np.ndarray:
    """Band-limited divergence-free field from a random stream function.

    ``v = (d_y psi, -d_x psi)`` with ``psi`` supported on ``band[0] <= |k| <= band[1]``,
    scaled so that ``max |v| = amplitude``.
    """
    rng = np.random.default_rng(seed)
    psi_h = grid.fft(rng.standard_normal((grid.n, grid.n)))
    kk = np.sqrt(grid.k2)
    psi_h = psi_h * ((kk >= band[0]) & (kk <= band[1]))
    v = np.stack([grid.ifft(grid.dy(psi_h)), -grid.ifft(grid.dx(psi_h))])
    vmax = np.max(np.hypot(v[0], v[1]))
    if vmax == 0:
        raise ValueError("random field vanished; widen the band")
    return v * (amplitude / vmax)


# ---------------------------------------------------------------------------
# Snapshots


def write_snapshot(path, grid: Grid, t: float, fields: dict) -> None:
    """Binary snapshot: one ASCII header line, then little-endian float64 data.

    Header: ``visco-lab-snapshot n=<n> t=<t> fields=<a,b,...> dtype=<f8``.
    Fields follow in header order, each ``n*n`` values, row-major with x
    varying fastest (value at ``(ix, iy)`` is element ``iy*n + ix``).
    """
    names = list(fields)
    header = f"{SNAPSHOT_MAGIC} n={grid.n} t={t!r} fields={','.join(names)} dtype=<f8\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for name in names:
            arr = np.broadcast_to(np.asarray(fields[name], dtype=float), (grid.n, grid.n))
            fh.write(np.ascontiguousarray(arr.T).astype("<f8").tobytes())


def read_snapshot(path) -> tuple:
    """Inverse of ``write_snapshot``: returns ``(n, t, {name: array[ix, iy]})``."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        body = fh.read()
    if not header or header[0] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path} is not a visco-lab snapshot")
    meta = dict(item.split("=", 1) for item in header[1:])
    n, t = int(meta["n"]), float(meta["t"])
    names = meta["fields"].split(",")
    data = np.frombuffer(body, dtype="<f8")
    if data.size != len(names) * n * n:
        raise ValueError(f"{path}: expected {len(names) * n * n} values, found {data.size}")
    out = {name: data[i * n * n:(i + 1) * n * n].reshape(n, n).T.copy() for i, name in enumerate(names)}
    return n, t, out


# ---------------------------------------------------------------------------
# Configuration and state


@dataclass
class SolverConfig:
    """Everything a run needs.

    ``init`` is ``"taylor_green"``, ``"random_solenoidal"`` or ``"from_file"``;
    ``c_init`` is ``"identity_scaled"`` (``C = c_scale I``) or ``"from_file"``.
    ``output_every`` is the cadence in steps.
    """

    n: int
    dt: float
    t_max: float
    model: ModelSpec
    init: str = "taylor_green"
    amplitude: float = 1.0
    seed: int = 0
    init_file: Optional[str] = None
    c_init: str = "identity_scaled"
    c_scale: float = 1.0
    c_file: Optional[str] = None
    output_every: int = 10
    convective_term: bool = True
    viscosity: float = 1.0
    wall_budget: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.init not in ("taylor_green", "random_solenoidal", "from_file"):
            raise ValueError(f"unknown velocity init {self.init!r}")
        if self.c_init not in ("identity_scaled", "from_file"):
            raise ValueError(f"unknown conformation init {self.c_init!r}")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")
        if self.model.conformation is None:
            raise ValueError(f"model {self.model.name!r} has no conformation form")
        if self.model.stress_kind == "trace_normalized_aux":
            raise ValueError("the regularized Pom-Pom law (extra stretch field) is not supported by the spectral solver")

    @property
    def grid(self) -> Grid:
        return Grid(self.n)


@dataclass
class SimState:
    v_hat: np.ndarray      # (2, n, n//2+1) complex
    C: SymTensor2          # components (n, n)
    t: float = 0.0

    def velocity(self, grid: Grid) -> np.ndarray:
        return grid.ifft(self.v_hat)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.v_hat)) and self.C.is_finite())


def initial_state(cfg: SolverConfig) -> SimState:
    grid = cfg.grid
    if cfg.init == "taylor_green":
        v = taylor_green(grid, cfg.amplitude)
    elif cfg.init == "random_solenoidal":
        v = random_solenoidal(grid, cfg.seed, cfg.amplitude)
    else:
        n, _, f = read_snapshot(cfg.init_file)
        if n != grid.n:
            raise ValueError(f"snapshot grid {n} does not match n = {grid.n}")
        v = np.stack([f["vx"], f["vy"]])
    v_hat = leray_project(grid.fft(v) * grid.mask, grid)
    if cfg.c_init == "identity_scaled":
        if not cfg.c_scale >= 0:
            raise ValueError("c_scale must be non-negative (0 decouples the stress)")
        ones = np.ones((grid.n, grid.n))
        c = SymTensor2(cfg.c_scale * ones, 0.0 * ones, cfg.c_scale * ones)
    else:
        n, _, f = read_snapshot(cfg.c_file)
        if n != grid.n:
            raise ValueError(f"snapshot grid {n} does not match n = {grid.n}")
        c = SymTensor2(f["Cxx"], f["Cxy"], f["Cyy"])
    return SimState(v_hat, c, 0.0)


# ---------------------------------------------------------------------------
# Time stepping


def _mask_field(a: SymTensor2, grid: Grid) -> SymTensor2:
    stacked = grid.fft(np.stack([a.xx, a.xy, a.yy])) * grid.mask
    out = grid.ifft(stacked)
    return SymTensor2(out[0], out[1], out[2])


def _rhs(v_hat, c: SymTensor2, t: float, cfg: SolverConfig, grid: Grid):
    """Nonlinear momentum forcing (projected) and ``d_t C``."""
    m = cfg.model
    v = grid.ifft(v_hat)
    g = velocity_gradient(v_hat, grid)
    sigma = stress_from_conformation(m, c, t)
    forcing = divergence_of_stress(sigma, grid)
    if cfg.convective_term:
        # (v.grad v)_j = v_i d_i v_j
        adv = np.stack([v[0] * g.xx + v[1] * g.yx, v[0] * g.xy + v[1] * g.yy])
        forcing = forcing - grid.fft(adv)
    forcing = forcing * grid.mask
    forcing[:, 0, 0] = 0.0
    forcing = leray_project(forcing, grid)

    ch = grid.fft(np.stack([c.xx, c.xy, c.yy]))
    cdx, cdy = grid.ifft(grid.dx(ch)), grid.ifft(grid.dy(ch))
    adv_c = v[0] * cdx + v[1] * cdy
    dc = conformation_rhs(m, c, g)
    dc = SymTensor2(dc.xx - adv_c[0], dc.xy - adv_c[1], dc.yy - adv_c[2])
    return forcing, _mask_field(dc, grid)


def step(state: SimState, cfg: SolverConfig, grid: Optional[Grid] = None) -> SimState:
    """One Lawson IF-RK4 step of size ``cfg.dt``."""
    grid = grid or cfg.grid
    h, t = cfg.dt, state.t
    e_full = np.exp(-cfg.viscosity * grid.k2 * h)
    e_half = np.exp(-cfg.viscosity * grid.k2 * 0.5 * h)
    v0, c0 = state.v_hat, state.C
    k1, l1 = _rhs(v0, c0, t, cfg, grid)
    v2 = e_half * (v0 + 0.5 * h * k1)
    k2, l2 = _rhs(v2, c0 + 0.5 * h * l1, t + 0.5 * h, cfg, grid)
    v3 = e_half * v0 + 0.5 * h * k2
    k3, l3 = _rhs(v3, c0 + 0.5 * h * l2, t + 0.5 * h, cfg, grid)
    v4 = e_full * v0 + h * e_half * k3
    k4, l4 = _rhs(v4, c0 + h * l3, t + h, cfg, grid)
    v_new = e_full * v0 + (h / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
    c_new = c0 + (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
    return SimState(v_new, c_new, t + h)


# ---------------------------------------------------------------------------
# Diagnostics sampled during a run


def sample(state: SimState, cfg: SolverConfig, grid: Optional[Grid] = None) -> dict:
    """Per-output quantities for the time series.

    ``max_tr_sigma`` is taken on the physical stress and ``max_tr_sigma_f`` on
    the stress the model's bound is stated for (they differ for shifted laws).
    ``grad_sigma_l2`` is the spectral ``L2`` norm of ``grad sigma``;
    ``log_bound`` is ``1 + |sigma|_inf ln(e + |grad sigma|_inf)``, logged next
    to ``max_grad_v`` as an observation only.
    """
    grid = grid or cfg.grid
    v = grid.ifft(state.v_hat)
    g = velocity_gradient(state.v_hat, grid)
    sigma = stress_from_conformation(cfg.model, state.C, state.t)
    grad_v = np.sqrt(g.xx ** 2 + g.xy ** 2 + g.yx ** 2 + g.yy ** 2)
    sh = np.stack(_stress_spectra(sigma, grid))
    gx, gy = grid.ifft(grid.dx(sh)), grid.ifft(grid.dy(sh))
    weights = np.array([1.0, 2.0, 1.0])[:, None, None]
    grad_sigma_sq = np.sum(weights * (gx ** 2 + gy ** 2), axis=0)
    sigma_norm = np.sqrt(sigma.xx ** 2 + 2 * sigma.xy ** 2 + sigma.yy ** 2)
    max_grad_sigma = float(np.sqrt(np.max(grad_sigma_sq)))
    return {
        "t": state.t,
        "energy": 0.5 * grid.integrate(v[0] ** 2 + v[1] ** 2),
        "max_grad_v": float(np.max(grad_v)),
        "max_tr_sigma": float(np.max(trace(sigma))),
        "max_tr_sigma_f": float(np.max(trace(cfg.model.to_form_stress(sigma)))),
        "min_eig_C": float(np.min(eigenvalues(state.C)[1])),
        "div_residual": divergence_residual(state.v_hat, grid),
        "grad_sigma_l2": math.sqrt(grid.integrate(grad_sigma_sq)),
        "log_bound": 1.0 + float(np.max(sigma_norm)) * math.log(math.e + max_grad_sigma),
    }


@dataclass
class RunArtifact:
    """Result of ``run``: ``status`` is ``"ok"``, ``"aborted"`` or ``"budget_exceeded"``."""

    status: str
    series: list
    state: SimState
    log: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    steps: int = 0

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.series])


def write_series_csv(path, series: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        for row in series:
            w.writerow([repr(float(row[c])) for c in SERIES_COLUMNS])


def state_fields(state: SimState, grid: Grid) -> dict:
    v = grid.ifft(state.v_hat)
    return {"vx": v[0], "vy": v[1], "Cxx": state.C.xx, "Cxy": state.C.xy, "Cyy": state.C.yy}


def run(cfg: SolverConfig, output_dir=None) -> RunArtifact:
    """Integrate to ``cfg.t_max``, sampling every ``cfg.output_every`` steps.

    A non-finite state aborts the run (``status = "aborted"``) and, when
    ``output_dir`` is given, is written as ``abort_snapshot.bin``.  Loss of
    positivity of ``C`` is logged at its first occurrence and never clipped.
    """
    grid = cfg.grid
    state = initial_state(cfg)
    n_steps = int(round(cfg.t_max / cfg.dt))
    messages: list = []
    series = [sample(state, cfg, grid)]
    status = "ok"
    cfl_warned = False
    # A decoupled run (C = 0) starts without positivity; only a loss is reported.
    positivity_warned = series[0]["min_eig_C"] <= 0.0
    started = time.perf_counter()
    steps_done = 0
    for i in range(n_steps):
        vmax = float(np.max(np.abs(grid.ifft(state.v_hat))))
        if not cfl_warned and vmax * cfg.dt * cfg.n > CFL_LIMIT:
            msg = f"CFL number {vmax * cfg.dt * cfg.n:.3g} exceeds {CFL_LIMIT} at t={state.t:.6g}"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            messages.append(msg)
            cfl_warned = True
        new = step(state, cfg, grid)
        steps_done = i + 1
        if not new.is_finite():
            status = "aborted"
            messages.append(f"non-finite state at t={new.t:.6g}; run aborted")
            log.error(messages[-1])
            state = new
            break
        state = new
        if steps_done % cfg.output_every == 0 or steps_done == n_steps:
            row = sample(state, cfg, grid)
            series.append(row)
            if row["min_eig_C"] <= 0.0 and not positivity_warned:
                messages.append(f"conformation lost positivity at t={row['t']:.6g} "
                                f"(min eigenvalue {row['min_eig_C']:.3g})")
                log.warning(messages[-1])
                positivity_warned = True
        if cfg.wall_budget is not None and time.perf_counter() - started > cfg.wall_budget:
            status = "budget_exceeded"
            messages.append(f"wall-clock budget {cfg.wall_budget}s exceeded at t={state.t:.6g}")
            log.warning(messages[-1])
            break
    art = RunArtifact(status, series, state, messages, steps=steps_done)
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_series_csv(out / "timeseries.csv", series)
        art.files["timeseries"] = str(out / "timeseries.csv")
        name = "abort_snapshot.bin" if status == "aborted" else "final_snapshot.bin"
        write_snapshot(out / name, grid, state.t, state_fields(state, grid))
        art.files["snapshot"] = str(out / name)
    return art


def oldroyd_free_energy(state: SimState, grid: Grid) -> float:
    """``1/2 |v|^2 + 1/2 int (tr C - ln det C - 2)`` for the unit Oldroyd-B system."""
    v = grid.ifft(state.v_hat)
    c = state.C
    det = c.xx * c.yy - c.xy * c.xy
    return 0.5 * grid.integrate(v[0] ** 2 + v[1] ** 2) + 0.5 * grid.integrate(c.xx + c.yy - np.log(det) - 2.0)

