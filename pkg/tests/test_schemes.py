import numpy as np
import pytest

from lawsde import (Config, SplitSde, InvariantSpec, KuboParams, RigidBodyParams, WienerGrid,
                    validate_linear_assumptions,
                    StepperConfig, NonConvergenceError, TrapezoidalLawsonStepper,
                    MidpointLawsonStepper, build_kubo, build_rigid_body,
                    kubo_exact_solution, make_stepper, integrate,
                    step_midpoint, step_trapezoidal, step_lawson_trapezoidal,
                    step_lawson_midpoint, step_exp_euler_fwd, step_exp_euler_bwd,
                    path_seed)
from lawsde.experiments import exact_tfsl_drift
from lawsde.utils import VALID_SCHEMES, LAWSON_SCHEMES, scheme_to_rule


def scalar_sde(lam, g=None):
    return SplitSde([[[lam]]], [g], [1.0])


def test_stepper_config():
    cfg = StepperConfig("TFSL", fp_tol=1e-10, fp_max_iters=7, fp_damping=0.5)
    assert cfg.with_scheme("MDSL") == StepperConfig("MDSL", 1e-10, 7, 0.5)
    assert cfg != cfg.with_scheme("MDSL")
    from_config = StepperConfig.from_config(Config(), "Midpoint")
    assert from_config == StepperConfig("Midpoint")
    for kwargs in [dict(scheme="RK4"), dict(fp_tol=0.0), dict(fp_max_iters=0),
                   dict(fp_damping=0.0), dict(fp_damping=1.5)]:
        with pytest.raises(ValueError):
            StepperConfig(**kwargs)


def test_zero_field_is_identity(grid_for):
    p = SplitSde([np.zeros((2, 2)), np.zeros((2, 2))], [None, None], [0.3, -0.4])
    grid = grid_for(p, 3)
    for scheme in VALID_SCHEMES:
        traj = integrate(p, grid, cfg=StepperConfig(scheme))
        assert np.all(traj.states == p.x0), scheme
        assert np.all(traj.solver_stats == 0)


def test_linear_scalar_steps():
    lam, h = -1.5, 0.1
    p = scalar_sde(lam)
    cayley = (1 + lam * h / 2) / (1 - lam * h / 2)
    assert step_trapezoidal(p, [1.0], [h])[0] == pytest.approx(cayley, rel=1e-14)
    assert step_midpoint(p, [1.0], [h])[0] == pytest.approx(cayley, rel=1e-14)
    for step in (step_lawson_trapezoidal, step_lawson_midpoint,
                 step_exp_euler_fwd, step_exp_euler_bwd):
        assert step(p, [1.0], [h])[0] == pytest.approx(np.exp(lam * h), rel=1e-14)


def test_nonlinear_scalar_steps():
    lam, h, y = -1.0, 0.05, 0.8
    p = scalar_sde(lam, lambda x: x**2)
    E = np.exp(lam * h)
    assert step_exp_euler_fwd(p, [y], [h])[0] == pytest.approx(E * (y + h * y**2), rel=1e-14)
    y1 = step_exp_euler_bwd(p, [y], [h])[0]
    assert y1 == pytest.approx(E * y + h * y1**2, rel=1e-12)
    y1 = step_lawson_trapezoidal(p, [y], [h])[0]
    assert y1 == pytest.approx(E * y + 0.5 * h * (E * y**2 + y1**2), rel=1e-12)
    y1 = step_trapezoidal(p, [y], [h])[0]
    def f(x):
        return lam * x + x**2
    assert y1 == pytest.approx(y + 0.5 * h * (f(y) + f(y1)), rel=1e-12)
    y1 = step_midpoint(p, [y], [h])[0]
    assert y1 == pytest.approx(y + h * f(0.5 * (y + y1)), rel=1e-12)


def test_step_rejects_wrong_increments(kubo):
    with pytest.raises(ValueError):
        step_lawson_midpoint(kubo.sde, [1.0, 0.0], [0.1, 0.2])


def test_make_stepper_resplits(rigid_body):
    p = rigid_body.sde
    for scheme in VALID_SCHEMES:
        stepper = make_stepper(p, StepperConfig(scheme))
        if scheme_to_rule[scheme] == "trapezoidal":
            assert isinstance(stepper, TrapezoidalLawsonStepper)
        if scheme_to_rule[scheme] == "midpoint":
            assert isinstance(stepper, MidpointLawsonStepper)
    assert np.any(make_stepper(p, StepperConfig("TDSL")).problem.A[0])
    assert not np.any(make_stepper(p, StepperConfig("TDSL")).problem.A[1])
    assert not np.any(make_stepper(p, StepperConfig("Midpoint")).problem.A)
    assert make_stepper(p, StepperConfig("MFSL")).problem is p


def test_lawson_schemes_restore_underlying_rules(grid_for):
    bench = build_rigid_body(RigidBodyParams(omega=0.0, sigma=0.0))
    p = bench.sde
    grid = grid_for(p, 5, seed=3)
    cfg = StepperConfig(fp_tol=1e-12)
    underlying = {r: integrate(p, grid, cfg=cfg.with_scheme(s))
                  for r, s in [("trapezoidal", "Trapezoidal"), ("midpoint", "Midpoint")]}
    for scheme in LAWSON_SCHEMES:
        traj = integrate(p, grid, cfg=cfg.with_scheme(scheme))
        expected = underlying[scheme_to_rule[scheme]]
        np.testing.assert_array_equal(traj.states, expected.states)
        np.testing.assert_array_equal(traj.solver_stats, expected.solver_stats)


def test_drift_and_full_splitting_agree_without_noise_matrix(grid_for):
    p = build_kubo(KuboParams.example(omega=10.0, sigma=0.0)).sde
    grid = grid_for(p, 5, seed=9)
    np.testing.assert_array_equal(integrate(p, grid, cfg=StepperConfig("MDSL")).states,
                                  integrate(p, grid, cfg=StepperConfig("MFSL")).states)


def random_increments(rng, M, h, count):
    noise = np.clip(rng.standard_normal((count, M)), -2.0, 2.0) * np.sqrt(h)
    return np.column_stack([np.full(count, h), noise])


def test_midpoint_lawson_is_backward_then_forward_half_step(kubo, unit_circle_states):
    p = kubo.sde
    cfg = StepperConfig(fp_tol=1e-12)
    rng = np.random.default_rng(1)
    for y, dW in zip(unit_circle_states, random_increments(rng, p.M, 2.0**-5, 100)):
        full = step_lawson_midpoint(p, y, dW, cfg)
        half = step_exp_euler_fwd(p, step_exp_euler_bwd(p, y, 0.5 * dW, cfg), 0.5 * dW, cfg)
        np.testing.assert_allclose(full, half, rtol=0, atol=10 * cfg.fp_tol)


def test_trapezoidal_lawson_is_forward_then_backward_half_step(kubo, unit_circle_states):
    p = kubo.sde
    cfg = StepperConfig(fp_tol=1e-12)
    rng = np.random.default_rng(2)
    for y, dW in zip(unit_circle_states, random_increments(rng, p.M, 2.0**-5, 100)):
        full = step_lawson_trapezoidal(p, y, dW, cfg)
        half = step_exp_euler_bwd(p, step_exp_euler_fwd(p, y, 0.5 * dW, cfg), 0.5 * dW, cfg)
        np.testing.assert_allclose(full, half, rtol=0, atol=10 * cfg.fp_tol)


@pytest.mark.parametrize("scheme", ["TFSL", "MFSL", "ExpEulerFwd", "ExpEulerBwd"])
def test_full_lawson_is_exact_on_linear_kubo(scheme):
    params = KuboParams.example(omega=10.0, sigma=10.0, linear=True, T=1.0)
    p = build_kubo(params).sde
    for i in range(10):
        grid = WienerGrid.generate(p.t0, p.T, 5, p.M, path_seed(0, i))
        traj = integrate(p, grid, cfg=StepperConfig(scheme))
        exact = kubo_exact_solution(params, grid.path()[:, -1])
        np.testing.assert_allclose(traj.final_state, exact, rtol=0, atol=1e-11)


@pytest.mark.parametrize("scheme", ["MDSL", "MFSL", "Midpoint"])
def test_midpoint_schemes_preserve_quadratic_invariant(scheme, kubo, stiff_rigid_body, grid_for):
    cfg = StepperConfig(scheme, fp_tol=1e-14)
    for bench in (kubo, stiff_rigid_body):
        traj = integrate(bench.sde, grid_for(bench.sde, 6, seed=4), cfg=cfg)
        I = traj.invariant(bench.invariant)
        assert np.max(np.abs(I - I[0])) <= 1e-10


def test_non_convergence_reports_step(kubo, grid_for):
    p = kubo.sde
    grid = grid_for(p, 4)
    cfg = StepperConfig("TFSL", fp_max_iters=1)
    with pytest.raises(NonConvergenceError) as excinfo:
        integrate(p, grid, cfg=cfg)
    assert excinfo.value.step_index == 0
    assert excinfo.value.iterations == 1
    assert "step 0" in str(excinfo.value)

    traj = integrate(p, grid, cfg=cfg, truncate=True)
    assert len(traj) == 1
    np.testing.assert_array_equal(traj.states[0], p.x0)


def test_non_finite_residual_raises():
    p = scalar_sde(0.0, lambda x: 1e200 * x**2)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NonConvergenceError):
            step_exp_euler_bwd(p, [1.0], [1.0])


def test_integrate_checks_and_partial_runs(kubo, rigid_body, grid_for):
    p = kubo.sde
    grid = grid_for(p, 5, seed=8)
    with pytest.raises(ValueError):
        integrate(rigid_body.sde, grid)
    with pytest.raises(ValueError):
        integrate(p.with_changes(T=2.0), grid)
    with pytest.raises(ValueError):
        integrate(p, grid, n_steps=33)

    full = integrate(p, grid, level=5)
    part = integrate(p, grid, level=5, n_steps=5)
    assert len(full) == 33 and len(part) == 6
    np.testing.assert_array_equal(part.states, full.states[:6])
    np.testing.assert_array_equal(part.times, full.times[:6])


def test_trajectory_frame(kubo, grid_for):
    traj = integrate(kubo.sde, grid_for(kubo.sde, 5), cfg=StepperConfig("TDSL"))
    frame = traj.to_frame()
    assert list(frame.columns) == ["t", "TDSL1", "TDSL2"]
    assert len(frame) == 33
    assert frame["t"].iloc[-1] == 1.0
    assert list(traj.to_frame("Y").columns) == ["t", "Y1", "Y2"]


def test_exact_trapezoidal_drift():
    bench = build_rigid_body(RigidBodyParams(omega=10.0, sigma=0.3))
    p = bench.sde
    cfg = StepperConfig("TFSL", fp_tol=1e-14)
    for level in (5, 7):
        grid = WienerGrid.generate(p.t0, p.T, level, p.M, seed=21)
        traj = integrate(p, grid, cfg=cfg)
        I = traj.invariant(bench.invariant)
        predicted = exact_tfsl_drift(p, traj)
        scale = np.max(np.abs(predicted))
        assert scale > 0
        np.testing.assert_allclose(I - I[0], predicted, rtol=0, atol=1e-9 * scale)


@pytest.mark.parametrize("scheme", VALID_SCHEMES)
def test_every_scheme_conserves_linear_invariant(scheme, mass_conserving, grid_for):
    p = mass_conserving
    assert validate_linear_assumptions(p, np.ones(3)).passed
    cfg = StepperConfig(scheme, fp_tol=1e-12)
    traj = integrate(p, grid_for(p, 5, seed=6), cfg=cfg)
    mass = traj.invariant(InvariantSpec.linear(np.ones(3)))
    assert np.max(np.abs(mass - mass[0])) <= 100 * cfg.fp_tol
    assert not np.allclose(traj.states[-1], traj.states[0])


def test_integrate_rejects_slightly_different_interval(kubo):
    p = kubo.sde
    grid = WienerGrid.generate(p.t0, 1.000005, 4, p.M, 0)
    with pytest.raises(ValueError):
        integrate(p, grid)
    grid = WienerGrid.generate(p.t0, p.T, 4, p.M, 0)
    assert len(integrate(p, grid)) == 17
