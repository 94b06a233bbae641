from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp

from visco_lab.models import builtin_model
from visco_lab.spectral import (SERIES_COLUMNS, SNAPSHOT_MAGIC, Grid, SimState, SolverConfig,
                                divergence_of_stress, divergence_residual, initial_state, leray_project,
                                oldroyd_free_energy, pressure_field, random_solenoidal, read_snapshot, run,
                                step, taylor_green, taylor_green_pressure, write_snapshot)
from visco_lab.tensor import SymTensor2


def _zero_stress_config(**kw):
    # C = 0 stays zero under the Larson law, so sigma = 0 and the flow is pure Navier-Stokes.
    base = dict(n=32, dt=1e-2, t_max=0.5, model=builtin_model("pec_larson", {"xi_prime": 0.5}), c_scale=0.0)
    base.update(kw)
    return SolverConfig(**base)


def test_grid_rejects_bad_sizes():
    with pytest.raises(ValueError):
        Grid(48)
    with pytest.raises(ValueError):
        Grid(4)


def test_leray_kills_gradients_and_is_idempotent():
    g = Grid(32)
    x, y = g.coords
    phi = np.sin(2 * x) * np.cos(3 * y) + np.cos(x + y)
    ph = g.fft(phi)
    grad = np.stack([g.dx(ph), g.dy(ph)])
    assert np.max(np.abs(leray_project(grad, g))) < 1e-10 * np.max(np.abs(grad))
    rng = np.random.default_rng(0)
    u = g.fft(rng.standard_normal((2, 32, 32)))
    p1 = leray_project(u, g)
    p2 = leray_project(p1, g)
    assert np.max(np.abs(p2 - p1)) <= 1e-14 * np.max(np.abs(p1))
    assert divergence_residual(p1, g) < 1e-14


def test_random_solenoidal_is_divergence_free_and_seeded():
    g = Grid(32)
    v1 = random_solenoidal(g, seed=7, amplitude=2.0)
    v2 = random_solenoidal(g, seed=7, amplitude=2.0)
    np.testing.assert_array_equal(v1, v2)
    assert np.max(np.hypot(v1[0], v1[1])) == pytest.approx(2.0)
    assert divergence_residual(g.fft(v1), g) < 1e-13
    assert not np.array_equal(v1, random_solenoidal(g, seed=8, amplitude=2.0))


def test_pressure_vanishes_for_constant_stress_and_rest():
    g = Grid(16)
    sigma = SymTensor2(2.0, 0.3, -1.0)
    p = pressure_field(sigma, np.zeros((2, 16, 16)), g)
    assert np.max(np.abs(p)) < 1e-14


def test_taylor_green_pressure_closed_form():
    g = Grid(32)
    zero = SymTensor2(np.zeros((32, 32)), np.zeros((32, 32)), np.zeros((32, 32)))
    for amp in (1.0, 0.3):
        p = pressure_field(zero, taylor_green(g, amp), g)
        np.testing.assert_allclose(p, taylor_green_pressure(g, amp), atol=1e-13)


def test_taylor_green_pressure_solves_poisson_symbolically():
    # -lap p = div div (v (x) v) for the closed-form pressure
    x, y, a = sp.symbols("x y A")
    vx, vy = a * sp.cos(x) * sp.sin(y), -a * sp.sin(x) * sp.cos(y)
    p = -a ** 2 / 4 * (sp.cos(2 * x) + sp.cos(2 * y))
    lhs = -(sp.diff(p, x, 2) + sp.diff(p, y, 2))
    rhs = sp.diff(vx * vx, x, 2) + 2 * sp.diff(vx * vy, x, y) + sp.diff(vy * vy, y, 2)
    assert sp.simplify(lhs - rhs) == 0
    assert sp.simplify(rhs) != 0


def test_pressure_gradient_closes_momentum_balance():
    # div F - grad p is solenoidal, with F = sigma - v (x) v.
    g = Grid(32)
    v = random_solenoidal(g, 1)
    x, y = g.coords
    sigma = SymTensor2(np.cos(x) * np.sin(2 * y), 0.5 * np.sin(x + y), np.cos(3 * y))
    f = SymTensor2(sigma.xx - v[0] ** 2, sigma.xy - v[0] * v[1], sigma.yy - v[1] ** 2)
    p = pressure_field(sigma, v, g)
    ph = g.fft(p)
    r = divergence_of_stress(f, g) - np.stack([g.dx(ph), g.dy(ph)])
    assert divergence_residual(r, g) < 1e-10


def test_taylor_green_decays_exactly_without_stress():
    # Without stress and with v.grad v a gradient, TG decays as exp(-2 t).
    cfg = _zero_stress_config(n=16, dt=1e-2, t_max=0.5)
    art = run(cfg)
    assert art.status == "ok"
    v = art.state.velocity(cfg.grid)
    expected = taylor_green(cfg.grid) * math.exp(-2 * 0.5)
    assert np.max(np.abs(v - expected)) / np.max(np.abs(expected)) < 1e-12


def test_one_step_keeps_divergence_free():
    cfg = SolverConfig(n=32, dt=1e-3, t_max=1e-3, model=builtin_model("pec_larson", {"xi_prime": 0.5}),
                       init="random_solenoidal", seed=3, amplitude=1.0, c_scale=1.5)
    s1 = step(initial_state(cfg), cfg)
    assert divergence_residual(s1.v_hat, cfg.grid) < 1e-13


def test_dealiasing_of_a_product():
    # sin(10x) sin(10x) has energy at k = 0 and 20; on n = 32 the 20-mode is beyond 2/3 cut.
    g = Grid(32)
    x, _ = g.coords
    prod = np.sin(10 * x) ** 2
    masked = g.ifft(g.fft(prod) * g.mask)
    np.testing.assert_allclose(masked, 0.5, atol=1e-14)
    # modes inside the cutoff pass unchanged
    keep = np.cos(5 * x) * np.sin(4 * x)
    np.testing.assert_allclose(g.ifft(g.fft(keep) * g.mask), keep, atol=1e-14)


def test_snapshot_roundtrip(tmp_path):
    g = Grid(8)
    x, y = g.coords
    fields = {"a": np.sin(x) + 2 * y, "b": np.cos(3 * x * y)}
    path = tmp_path / "s.bin"
    write_snapshot(path, g, 0.125, fields)
    raw = path.read_bytes()
    header = raw.split(b"\n", 1)[0].decode()
    assert header == f"{SNAPSHOT_MAGIC} n=8 t=0.125 fields=a,b dtype=<f8"
    # x varies fastest: the second stored value is a(ix=1, iy=0)
    body = np.frombuffer(raw.split(b"\n", 1)[1], dtype="<f8")
    assert body[1] == fields["a"][1, 0]
    n, t, back = read_snapshot(path)
    assert (n, t) == (8, 0.125)
    for k in fields:
        np.testing.assert_array_equal(back[k], fields[k])


def test_snapshot_rejects_garbage(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"hello\n")
    with pytest.raises(ValueError):
        read_snapshot(p)


def test_restart_from_snapshot(tmp_path):
    cfg = SolverConfig(n=16, dt=1e-2, t_max=0.1, model=builtin_model("pec_larson", {"xi_prime": 0.5}),
                       init="random_solenoidal", seed=2, c_scale=1.2)
    art = run(cfg, tmp_path)
    snap = art.files["snapshot"]
    cfg2 = SolverConfig(n=16, dt=1e-2, t_max=0.1, model=cfg.model, init="from_file", init_file=snap,
                        c_init="from_file", c_file=snap)
    s0 = initial_state(cfg2)
    np.testing.assert_allclose(s0.C.xx, art.state.C.xx, atol=1e-15)
    np.testing.assert_allclose(s0.v_hat, art.state.v_hat, atol=1e-12)


def test_run_is_deterministic(tmp_path):
    cfg = SolverConfig(n=16, dt=1e-2, t_max=0.2, model=builtin_model("pec_larson", {"xi_prime": 0.5}),
                       init="random_solenoidal", seed=11, amplitude=1.5, c_scale=1.3, output_every=5)
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    for name in ("timeseries.csv", "final_snapshot.bin"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "timeseries.csv").read_text().splitlines()[0]
    assert header == ",".join(SERIES_COLUMNS)


def test_cfl_warning():
    cfg = _zero_stress_config(n=16, dt=0.1, t_max=0.1)
    with pytest.warns(RuntimeWarning, match="CFL"):
        art = run(cfg)
    assert any("CFL" in m for m in art.log)


def test_non_finite_state_aborts(tmp_path):
    cfg = _zero_stress_config(n=16, dt=1e-2, t_max=0.1)
    cfg.c_scale = float("nan")
    with pytest.raises(ValueError):
        initial_state(cfg)
    # poison the initial conformation through a snapshot
    g = cfg.grid
    nanfield = np.ones((16, 16))
    nanfield[3, 4] = np.nan
    write_snapshot(tmp_path / "c.bin", g, 0.0, {"Cxx": nanfield, "Cxy": 0 * nanfield, "Cyy": np.ones((16, 16))})
    cfg.c_init, cfg.c_file = "from_file", str(tmp_path / "c.bin")
    art = run(cfg, tmp_path / "out")
    assert art.status == "aborted"
    assert art.steps == 1
    assert "abort" in art.files["snapshot"]


def test_wall_budget():
    cfg = _zero_stress_config(n=16, dt=1e-3, t_max=10.0, wall_budget=0.05)
    art = run(cfg)
    assert art.status == "budget_exceeded"
    assert art.state.t < 10.0


def test_oldroyd_b_free_energy_decreases():
    cfg = SolverConfig(n=32, dt=5e-3, t_max=1.0, model=builtin_model("oldroyd_b"), init="random_solenoidal",
                       seed=5, amplitude=1.0, c_scale=1.0, output_every=1)
    g = cfg.grid
    state = initial_state(cfg)
    energies = [oldroyd_free_energy(state, g)]
    for _ in range(200):
        state = step(state, cfg, g)
        energies.append(oldroyd_free_energy(state, g))
    e = np.array(energies)
    assert e[-1] < 0.5 * e[0]
    assert np.all(np.diff(e) <= 1e-12 * e[0])


def test_coupled_stepper_temporal_order():
    model = builtin_model("pec_larson", {"xi_prime": 0.5})

    def final(dt):
        cfg = SolverConfig(n=16, dt=dt, t_max=0.2, model=model, init="random_solenoidal", seed=1,
                           amplitude=1.0, c_scale=1.5)
        s = initial_state(cfg)
        for _ in range(int(round(0.2 / dt))):
            s = step(s, cfg, cfg.grid)
        return np.concatenate([s.C.xx.ravel(), s.C.xy.ravel(), s.C.yy.ravel()])

    ref = final(0.2 / 160)
    dts = [0.2 / 10, 0.2 / 20, 0.2 / 40]
    errs = [np.max(np.abs(final(d) - ref)) for d in dts]
    order = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert order >= 2.0


def test_regularized_pompom_rejected():
    with pytest.raises(ValueError, match="not supported"):
        SolverConfig(n=16, dt=1e-2, t_max=1.0, model=builtin_model("pompom_regularized"))


def test_sample_columns():
    cfg = _zero_stress_config(n=16, dt=1e-2, t_max=0.02, output_every=1)
    art = run(cfg)
    assert len(art.series) == 3
    for col in SERIES_COLUMNS:
        assert np.all(np.isfinite(art.column(col)))
    assert art.column("min_eig_C")[0] == 0.0
    assert art.column("max_tr_sigma").max() == 0.0
    assert isinstance(art.state, SimState)
