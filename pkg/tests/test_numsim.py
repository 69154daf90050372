"""Grid evolution and reconstruction against independent oracles."""

import csv
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from nullflow.expr import parse_flow
from nullflow.hierarchy import seed
from nullflow.numsim import (
    BlowUp,
    SimConfig,
    UnboundParameter,
    compile_flow,
    evolve,
    fd_weights,
    nlie_run,
    reconstruct_curve,
    run_report,
    spatial_derivative,
    standard_initial_frame,
    uniform_grid,
    write_curvature_csv,
    write_path_csv,
    write_report_json,
)

TRANSLATION = parse_flow("b*k1', b*k2'")


def _soliton(amplitude, a=1.0, center=0.0):
    width = math.sqrt(a * amplitude) / 2.0
    return lambda sigma: amplitude / np.cosh(width * (sigma - center)) ** 2


def test_fd_weights_match_classical_tables():
    offsets, weights = fd_weights(1, 4)
    assert offsets == [-2, -1, 0, 1, 2]
    assert weights == [
        Fraction(1, 12),
        Fraction(-2, 3),
        Fraction(0),
        Fraction(2, 3),
        Fraction(-1, 12),
    ]
    _, w2 = fd_weights(2, 4)
    assert w2 == [
        Fraction(-1, 12),
        Fraction(4, 3),
        Fraction(-5, 2),
        Fraction(4, 3),
        Fraction(-1, 12),
    ]
    assert sum(w2) == 0


def test_spatial_derivative_orders_of_accuracy():
    for acc, floor in ((4, 4.0), (6, 6.0)):
        errors = []
        for n in (64, 128):
            sigma = np.arange(n) * (2 * np.pi / n)
            values = np.sin(sigma)
            approx = spatial_derivative(values, 3, 2 * np.pi / n, acc)
            errors.append(np.abs(approx + np.cos(sigma)).max())
        rate = math.log2(errors[0] / errors[1])
        assert rate > floor - 0.3


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(domain_length=2 * np.pi, eps1=-1, eps2=-1)
    with pytest.raises(ValueError):
        SimConfig(domain_length=2 * np.pi, grid_points=8)
    with pytest.raises(ValueError):
        SimConfig(domain_length=2 * np.pi, derivative_stencil="central5")
    with pytest.raises(ValueError):
        SimConfig(domain_length=-1.0)
    with pytest.raises(ValueError):
        SimConfig(domain_length=1.0, a=0.0)


def test_unbound_parameter_is_reported_by_name():
    config = SimConfig(domain_length=2 * np.pi, grid_points=64)
    with pytest.raises(UnboundParameter) as info:
        compile_flow(seed(1).flow, {}, config)
    assert info.value.name == "c"
    with pytest.raises(ValueError):
        compile_flow(seed(1).flow, {"c": 1.0, "a": 2.0}, config)


def test_translation_flow_shifts_the_profile():
    config = SimConfig(
        domain_length=2 * np.pi, grid_points=256, dt=1.0 / 1024, t_end=0.5
    )
    grid = uniform_grid(config, np.sin, lambda s: 0.25 * np.cos(s))
    rhs = compile_flow(TRANSLATION, {"b": 1.0}, config)
    final = evolve(grid, rhs, config)[-1]
    assert np.abs(final.k1 - np.sin(grid.sigma + 0.5)).max() < 1e-6
    assert np.abs(final.k2 - 0.25 * np.cos(grid.sigma + 0.5)).max() < 1e-6


def test_zero_flow_is_a_constant_trajectory():
    config = SimConfig(domain_length=2 * np.pi, grid_points=64, dt=1e-3, t_end=0.05)
    grid = uniform_grid(config, np.sin)
    rhs = compile_flow(parse_flow("0, 0"), {}, config)
    final = evolve(grid, rhs, config)[-1]
    assert np.array_equal(final.k1, grid.k1)
    assert np.array_equal(final.k2, grid.k2)


def test_soliton_travels_at_its_exact_speed():
    amplitude, length = 0.5, 60.0
    config = SimConfig(domain_length=length, dt=1.25e-4, t_end=0.5)
    grid = uniform_grid(config, _soliton(amplitude, center=length / 2))
    rhs = compile_flow(seed(1).flow, {"c": 1.0}, config)
    final = evolve(grid, rhs, config)[-1]
    exact = _soliton(amplitude, center=length / 2 - amplitude * 0.5)(grid.sigma)
    assert np.abs(final.k1 - exact).max() < 1e-6
    assert np.abs(final.k2).max() == 0.0


def test_sixth_order_stencil_sharpens_the_soliton():
    amplitude, length = 0.5, 60.0
    errors = {}
    for stencil in ("central4", "central6"):
        config = SimConfig(
            domain_length=length,
            dt=1.25e-4,
            t_end=0.2,
            derivative_stencil=stencil,
        )
        grid = uniform_grid(config, _soliton(amplitude, center=length / 2))
        rhs = compile_flow(seed(1).flow, {"c": 1.0}, config)
        final = evolve(grid, rhs, config)[-1]
        exact = _soliton(amplitude, center=length / 2 - amplitude * 0.2)(grid.sigma)
        errors[stencil] = np.abs(final.k1 - exact).max()
    assert errors["central6"] < errors["central4"] / 10


def test_k1_mass_is_conserved_and_k2_mass_is_not():
    length = 60.0
    config = SimConfig(domain_length=length, grid_points=256, dt=2.5e-4, t_end=0.2)
    grid = uniform_grid(
        config,
        _soliton(0.5, center=length / 2),
        lambda s: 0.2 * np.sin(2 * np.pi * s / length),
    )
    rhs = compile_flow(seed(1).flow, {"c": 1.0}, config)
    final = evolve(grid, rhs, config)[-1]
    drift1 = abs(final.mass("k1") - grid.mass("k1"))
    drift2 = abs(final.mass("k2") - grid.mass("k2"))
    assert drift1 < 1e-12
    assert drift2 > 1e-6


def test_output_stride_keeps_ordered_snapshots():
    config = SimConfig(
        domain_length=2 * np.pi,
        grid_points=64,
        dt=1e-3,
        t_end=0.1,
        output_stride=20,
    )
    grid = uniform_grid(config, np.sin)
    rhs = compile_flow(TRANSLATION, {"b": 1.0}, config)
    history = evolve(grid, rhs, config)
    times = [g.time for g in history]
    assert times[0] == 0.0
    assert times == sorted(times)
    assert times[-1] == pytest.approx(0.1)
    assert len(history) == 6  # initial plus every 20th of 100 steps


def test_blowup_carries_the_last_finite_state():
    config = SimConfig(domain_length=2 * np.pi, grid_points=64, dt=1e-3, t_end=0.5)
    grid = uniform_grid(config, 10.0)
    rhs = compile_flow(parse_flow("k1^2, 0"), {}, config)
    with pytest.raises(BlowUp) as info:
        evolve(grid, rhs, config)
    err = info.value
    assert err.time < 0.2
    assert err.step > 1
    assert np.isfinite(err.last_good.k1).all()
    assert err.last_good.time < err.time


def test_standard_frames_satisfy_the_pairing_table():
    for eps1, eps2 in ((1, 1), (1, -1), (-1, 1)):
        _, tangent, w1, normal, w2, eta = standard_initial_frame(eps1, eps2)
        inner = lambda x, y: float(x @ eta @ y)
        assert inner(tangent, tangent) == pytest.approx(0.0)
        assert inner(normal, normal) == pytest.approx(0.0)
        assert inner(tangent, normal) == pytest.approx(-1.0)
        assert inner(w1, w1) == pytest.approx(eps1)
        assert inner(w2, w2) == pytest.approx(eps2)
        for w in (w1, w2):
            assert inner(tangent, w) == pytest.approx(0.0)
            assert inner(normal, w) == pytest.approx(0.0)
        assert inner(w1, w2) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        standard_initial_frame(-1, -1)


def test_constant_curvature_path_matches_matrix_exponential():
    from scipy.linalg import expm

    k1v, k2v, a = 0.4, 0.3, 1.0
    for eps1, eps2 in ((1, 1), (1, -1), (-1, 1)):
        config = SimConfig(
            domain_length=2 * np.pi, grid_points=128, a=a, eps1=eps1, eps2=eps2
        )
        grid = uniform_grid(config, k1v, k2v)
        path = reconstruct_curve(grid, config)
        gamma0, t0, w10, n0, w20, _ = standard_initial_frame(eps1, eps2)
        y0 = np.stack([gamma0, t0, w10, n0, w20])
        m = np.array(
            [
                [0, 1, 0, 0, 0],
                [0, 0, a, 0, 0],
                [0, -k1v, 0, a * eps1, 0],
                [0, 0, -eps1 * k1v, 0, eps2 * k2v],
                [0, k2v, 0, 0, 0],
            ],
            dtype=float,
        )
        for node in (37, 128):
            sigma = path.sigma[node]
            expected = expm(sigma * m) @ y0
            got = np.stack(
                [
                    path.gamma[node],
                    path.tangent[node],
                    path.w1[node],
                    path.normal[node],
                    path.w2[node],
                ]
            )
            assert np.abs(got - expected).max() < 1e-8


def test_zero_curvature_gives_the_null_cubic():
    a = 1.0
    for eps1 in (1, -1):
        config = SimConfig(domain_length=4.0, grid_points=64, a=a, eps1=eps1, eps2=1)
        grid = uniform_grid(config, 0.0, 0.0)
        path = reconstruct_curve(grid, config)
        _, t0, w10, n0, _, _ = standard_initial_frame(eps1, 1)
        s = path.sigma[:, None]
        cubic = s * t0 + (a * s**2 / 2) * w10 + (a**2 * eps1 * s**3 / 6) * n0
        assert np.abs(path.gamma - cubic).max() < 1e-10


def test_smooth_compact_reconstruction_stays_null():
    config = SimConfig(domain_length=2 * np.pi, grid_points=512)
    grid = uniform_grid(
        config, lambda s: 0.4 + 0.1 * np.sin(s), lambda s: 0.3 + 0.1 * np.cos(s)
    )
    path = reconstruct_curve(grid, config)
    assert path.gram_drift() < 1e-8
    assert path.null_drift() < 1e-8
    assert path.accel_series().max() < 1e-8


def test_long_domain_drift_is_frame_growth_not_integrator_error():
    length = 60.0
    config = SimConfig(domain_length=length)
    grid = uniform_grid(
        config,
        _soliton(0.5, center=length / 2),
        lambda s: 0.1 * np.sin(2 * np.pi * s / length),
    )
    path = reconstruct_curve(grid, config)
    norms = (path.tangent**2).sum(axis=1)
    relative = (path.gram_drift_series() / (1.0 + norms)).max()
    assert relative < 1e-10
    assert norms.max() > 1e3  # the absolute drift scale comes from here


def test_nlie_run_keeps_constant_curvatures_stationary():
    config = SimConfig(
        domain_length=2 * np.pi, grid_points=64, dt=1e-4, t_end=0.02, output_stride=100
    )
    history, paths = nlie_run(config, 0.4, 0.3, c=1.0)
    assert len(history) == len(paths) >= 2
    for grid in history:
        assert np.abs(grid.k1 - 0.4).max() < 1e-12
        assert np.abs(grid.k2 - 0.3).max() < 1e-12
    assert paths[-1].gram_drift() < 1e-8


def test_run_report_and_writers(tmp_path):
    config = SimConfig(
        domain_length=2 * np.pi, grid_points=32, dt=1e-3, t_end=0.01, output_stride=5
    )
    grid = uniform_grid(config, np.sin)
    rhs = compile_flow(TRANSLATION, {"b": 1.0}, config)
    history = evolve(grid, rhs, config)
    path = reconstruct_curve(history[-1], config)
    report = run_report(config, history, [path], {"linf": 0.0})
    assert report["stability_bound"] == pytest.approx(0.1 * config.dx**3)
    assert len(report["times"]) == len(history)
    assert "gram_drift" in report and "error_norms" in report
    assert report["config"]["grid_points"] == 32

    k1_file = tmp_path / "k1.csv"
    write_curvature_csv(k1_file, history, "k1")
    with open(k1_file) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "sigma"
    assert rows[0][1] == "t=0"
    assert len(rows[0]) == 1 + len(history)
    assert len(rows) == 1 + len(grid.sigma)
    with pytest.raises(ValueError):
        write_curvature_csv(tmp_path / "x.csv", history, "k3")

    path_file = tmp_path / "path.csv"
    write_path_csv(path_file, path)
    with open(path_file) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:5] == ["sigma", "gamma_0", "gamma_1", "gamma_2", "gamma_3"]
    assert len(rows) == 1 + len(path.sigma)

    report_file = tmp_path / "report.json"
    write_report_json(report_file, report)
    with open(report_file) as fh:
        data = json.load(fh)
    assert data["config"]["derivative_stencil"] == "central4"
