#!/usr/bin/env python3
"""
Tests for the radial solver: stencil, time stepping, blow-up detection,
the transformed problem and the ODE oracle
"""

import math
import os
import sys

import numpy as np
import pytest
from scipy.integrate import quad

sys.path.append(os.path.dirname(__file__))

from awslabs.damped_wave_lab.core.diagnostics import energy, energy_identity_residual, energy_trace, q_norm
from awslabs.damped_wave_lab.core.errors import ExperimentError, ParameterRangeError, TraceError
from awslabs.damped_wave_lab.core.grid import RadialGrid, State
from awslabs.damped_wave_lab.core.model import (
    DampingFamily,
    DampingSpec,
    InitialDataSpec,
    NonlinearityKind,
    NonlinearitySpec,
    WaveModel,
    sample_initial_data,
    smooth_step,
)
from awslabs.damped_wave_lab.core.solver import (
    BlowUpTrigger,
    SolverConfig,
    Termination,
    TerminationKind,
    flow_map_lipschitz,
    l2_norm,
    ode_blowup_time,
    pullback,
    radial_laplacian,
    solve,
    solve_state,
    solve_transformed,
    step,
    transform_compare,
    transform_to_v,
)


def _model(damping: str = "constant:mu=1", kind: NonlinearityKind = NonlinearityKind.POWER_ABS_PLUS,
           p: float = 3.0) -> WaveModel:
    return WaveModel(damping=DampingSpec.parse(damping), nonlinearity=NonlinearitySpec(kind=kind, p=p))


@pytest.fixture
def overdamped_defocusing():
    """b = (1+t)^2, N = -|u|^2 u"""
    return _model("power:mu=1,beta=-2", NonlinearityKind.POWER_SIGNED_MINUS)


@pytest.fixture
def small_gaussian():
    return InitialDataSpec(d=3, amplitude=0.1, width=1.0)


def _covering(dr: float, t_max: float, d: int = 3) -> RadialGrid:
    return RadialGrid.covering(d, dr, InitialDataSpec(d=d).support_radius(), t_max)


# ---------------------------------------------------------------------------
# Stencil
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_laplacian_exact_on_quadratics(d):
    grid = RadialGrid(d=d, dr=0.05, n_nodes=120)
    laplacian = radial_laplacian(grid, grid.nodes ** 2)
    # the outermost cell sees the boundary ghost
    assert laplacian[:-1] == pytest.approx(np.full(grid.n_nodes - 1, 2.0 * d), abs=1e-9)


def test_laplacian_of_gaussian_converges_at_second_order():
    """d = 2: Δ e^{-r^2} = 4(r^2 - 1) e^{-r^2}; boundary cell excluded"""

    def error(grid: RadialGrid) -> float:
        r = grid.nodes
        diff = radial_laplacian(grid, np.exp(-r * r)) - 4.0 * (r * r - 1.0) * np.exp(-r * r)
        return math.sqrt(float(np.sum(grid.volumes[:-1] * diff[:-1] ** 2)))

    coarse = RadialGrid(d=2, dr=0.05, n_nodes=120)
    ratio = error(coarse) / error(coarse.refined(2))
    assert 4.0 * 0.85 <= ratio <= 4.0 * 1.15


def test_laplacian_of_constant_vanishes_with_neumann_boundary():
    grid = RadialGrid(d=3, dr=0.1, n_nodes=50, boundary="neumann")
    assert radial_laplacian(grid, np.full(50, 3.0)) == pytest.approx(np.zeros(50), abs=1e-12)


def test_laplacian_rejects_wrong_shape():
    grid = RadialGrid(d=3, dr=0.1, n_nodes=50)
    with pytest.raises(ParameterRangeError):
        radial_laplacian(grid, np.zeros(49))


# ---------------------------------------------------------------------------
# Interior ODE fixtures: spatially constant solutions of u_tt + u_t = 0
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("u0, u1", [(1.0, 0.0), (0.0, 1.0)])
def test_constant_profiles_follow_damped_ode(u0, u1):
    grid = RadialGrid(d=3, dr=0.05, n_nodes=40, boundary="neumann")
    model = _model(kind=NonlinearityKind.ZERO, p=1.0)
    initial = State(t=0.0, u=np.full(grid.n_nodes, u0), w=np.full(grid.n_nodes, u1))
    config = SolverConfig(t_max=1.0, sample_stride=0.1, dt_max=1e-3)
    trace = solve_state(model, initial, grid, config)
    exact = u0 + u1 * (1.0 - np.exp(-trace.times))
    assert np.max(np.abs(trace.u - exact[:, None])) <= 1e-6


def test_exact_damping_factor_on_single_cell():
    """With Δ = 0 and N = 0 one step multiplies u_t by exp(-∫b) up to the drift"""
    grid = RadialGrid(d=1, dr=1.0, n_nodes=1, boundary="neumann")
    model = _model("power:mu=1,beta=-2", NonlinearityKind.ZERO, p=1.0)
    state = State(t=0.5, u=np.zeros(1), w=np.ones(1))
    h = 0.2
    new = step(state, model, SolverConfig(), grid, dt=h)
    factor = math.exp(-float(model.damping.increment(0.5, h)))
    assert new.w[0] == pytest.approx(factor, rel=1e-14)
    assert new.u[0] == pytest.approx(0.5 * h * (1.0 + factor), rel=1e-14)
    assert new.t == pytest.approx(0.7)


# ---------------------------------------------------------------------------
# Sampling and termination
# ---------------------------------------------------------------------------

def test_sample_times_land_on_horizon():
    config = SolverConfig(t_max=1.0, sample_stride=0.3)
    assert config.sample_time(3) == pytest.approx(0.9)
    assert config.sample_time(4) == 1.0


def test_zero_data_stay_zero():
    grid = _covering(0.1, 2.0)
    trace = solve(_model(), InitialDataSpec(d=3, amplitude=0.0), grid, SolverConfig(t_max=2.0, sample_stride=0.5))
    assert trace.termination.kind == TerminationKind.REACHED_HORIZON
    assert trace.times.tolist() == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])
    assert np.all(trace.u == 0.0)
    assert q_norm(trace)[-1] == 0.0


def test_initial_state_above_threshold_is_rejected():
    grid = RadialGrid(d=3, dr=0.1, n_nodes=20)
    initial = State(t=0.0, u=np.full(20, 10.0), w=np.zeros(20))
    with pytest.raises(ParameterRangeError):
        solve_state(_model(), initial, grid, SolverConfig(blow_threshold=1.0))


def _plateau_state(grid: RadialGrid, velocity: float) -> State:
    """u = 0, u_t = velocity on r <= 6, smoothly zero beyond r = 8"""
    profile = smooth_step((8.0 - grid.nodes) / 2.0)[0]
    return State(t=0.0, u=np.zeros(grid.n_nodes), w=velocity * profile)


def test_blow_up_matches_ode_oracle_inside_plateau():
    grid = RadialGrid(d=3, dr=0.05, n_nodes=200, boundary="neumann")
    model = _model()
    config = SolverConfig(t_max=5.0, sample_stride=0.05, dt_max=1e-3)
    trace = solve_state(model, _plateau_state(grid, 5.0), grid, config)
    termination = trace.termination
    assert termination.blew_up
    assert termination.trigger == BlowUpTrigger.NORM
    low, high = termination.bracket
    assert low <= high
    expected = ode_blowup_time(5.0, model, threshold=config.blow_threshold)
    assert termination.midpoint == pytest.approx(expected, rel=1e-2)
    # the partial sample at the last stable time is kept
    assert trace.t_end == pytest.approx(low)


def test_dt_floor_trigger():
    grid = RadialGrid(d=3, dr=0.05, n_nodes=200, boundary="neumann")
    config = SolverConfig(t_max=5.0, sample_stride=0.05, dt_floor=1e-3)
    trace = solve_state(_model(), _plateau_state(grid, 5.0), grid, config)
    assert trace.termination.blew_up
    assert trace.termination.trigger == BlowUpTrigger.DT_FLOOR


def test_termination_serialization():
    termination = Termination.blow_up(1.0, 1.5, BlowUpTrigger.NORM)
    assert termination.midpoint == 1.25
    assert termination.to_dict() == {"kind": "blow_up", "t_star": 1.0, "bracket": [1.0, 1.5], "trigger": "norm"}
    assert Termination.horizon().midpoint is None


def test_boundary_condition_does_not_reach_interior(small_gaussian):
    config = SolverConfig(t_max=2.0, sample_stride=0.5)
    traces = [solve(_model(), small_gaussian, RadialGrid(d=3, dr=0.05, n_nodes=800, boundary=kind), config)
              for kind in ("dirichlet", "neumann")]
    inert = 800 - 2 * max(t.steps for t in traces) - 2
    assert inert > 100
    assert np.array_equal(traces[0].final_state.u[:inert], traces[1].final_state.u[:inert])


# ---------------------------------------------------------------------------
# Energy identity
# ---------------------------------------------------------------------------

def _identity_residual(model, data, dr, t_max=2.0):
    grid = _covering(dr, t_max)
    trace = solve(model, data, grid, SolverConfig(t_max=t_max, sample_stride=0.1))
    etrace = energy_trace(trace)
    return energy_identity_residual(etrace), float(etrace.energy[0])


def test_energy_identity_residual_small(overdamped_defocusing, small_gaussian):
    residual, e0 = _identity_residual(overdamped_defocusing, small_gaussian, 0.05)
    assert residual <= 1e-4 * max(1.0, e0)


def test_energy_identity_residual_second_order(overdamped_defocusing, small_gaussian):
    coarse, _ = _identity_residual(overdamped_defocusing, small_gaussian, 0.05)
    fine, _ = _identity_residual(overdamped_defocusing, small_gaussian, 0.025)
    assert 3.0 <= coarse / fine <= 5.0


def test_step_dissipates_energy_without_nonlinearity():
    model = _model("constant:mu=2", NonlinearityKind.ZERO, p=1.0)
    grid = _covering(0.05, 1.0)
    data = InitialDataSpec(d=3, amplitude=0.0, velocity_amplitude=0.5)
    state = sample_initial_data(data, grid)
    config = SolverConfig()
    e0 = energy(state, model, grid)
    for _ in range(10):
        state = step(state, model, config, grid)
    assert energy(state, model, grid) < e0


# ---------------------------------------------------------------------------
# Transformed problem
# ---------------------------------------------------------------------------

def _transform_discrepancy(model, data, dr, t_max=2.0):
    grid = _covering(dr, t_max)
    config = SolverConfig(t_max=t_max, sample_stride=0.1)
    problem = transform_to_v(model, data)
    trace_u = solve(model, data, grid, config)
    trace_v = solve_transformed(problem, grid, config)
    return trace_u, trace_v, problem, transform_compare(trace_u, trace_v, problem.cumulative)


def test_transform_discrepancy_small_and_second_order(overdamped_defocusing, small_gaussian):
    *_, coarse = _transform_discrepancy(overdamped_defocusing, small_gaussian, 0.05)
    *_, fine = _transform_discrepancy(overdamped_defocusing, small_gaussian, 0.025)
    assert coarse <= 1e-2
    assert 3.0 <= coarse / fine <= 5.0


def test_transform_compare_accepts_damping_spec(overdamped_defocusing, small_gaussian):
    trace_u, trace_v, problem, value = _transform_discrepancy(overdamped_defocusing, small_gaussian, 0.1)
    assert transform_compare(trace_u, trace_v, overdamped_defocusing.damping) == pytest.approx(value)


def test_pullback_recovers_u_trace(overdamped_defocusing, small_gaussian):
    trace_u, trace_v, problem, _ = _transform_discrepancy(overdamped_defocusing, small_gaussian, 0.05)
    pulled = pullback(trace_v, problem)
    assert pulled.variable == "u"
    scale = max(l2_norm(trace_u.grid, u) for u in trace_u.u)
    worst = max(l2_norm(trace_u.grid, a - b) for a, b in zip(trace_u.u, pulled.u))
    assert worst / scale <= 1e-2
    with pytest.raises(TraceError):
        pullback(trace_u, problem)


def test_transform_compare_rejects_different_grids(overdamped_defocusing, small_gaussian):
    config = SolverConfig(t_max=1.0, sample_stride=0.5)
    trace_u = solve(overdamped_defocusing, small_gaussian, _covering(0.1, 1.0), config)
    problem = transform_to_v(overdamped_defocusing, small_gaussian)
    trace_v = solve_transformed(problem, _covering(0.05, 1.0), config)
    with pytest.raises(TraceError):
        transform_compare(trace_u, trace_v, problem.cumulative)


def test_transform_refuses_overflowing_horizon(small_gaussian):
    model = _model("exponential:mu=1,a=1")
    problem = transform_to_v(model, small_gaussian)
    with pytest.raises(ExperimentError):
        solve_transformed(problem, _covering(0.1, 10.0), SolverConfig(t_max=10.0))


def test_transform_without_data_needs_initial_state():
    problem = transform_to_v(_model())
    with pytest.raises(ParameterRangeError):
        solve_transformed(problem, _covering(0.1, 1.0), SolverConfig(t_max=1.0))


# ---------------------------------------------------------------------------
# Flow map and ODE oracle
# ---------------------------------------------------------------------------

def test_flow_map_lipschitz_constants_are_stable(overdamped_defocusing, small_gaussian):
    grid = _covering(0.1, 2.0)
    estimates = flow_map_lipschitz(overdamped_defocusing, small_gaussian, grid,
                                   SolverConfig(t_max=2.0, sample_stride=0.1), etas=(1e-4, 1e-3))
    constants = [e.constant for e in estimates]
    assert all(math.isfinite(c) and c > 0 for c in constants)
    assert constants[0] == pytest.approx(constants[1], rel=0.1)


def test_ode_oracle_without_nonlinearity_never_blows_up():
    model = _model(kind=NonlinearityKind.ZERO, p=1.0)
    assert ode_blowup_time(1.0, model, t_max=10.0) == math.inf


def test_ode_oracle_matches_quadrature_when_undamped():
    """u'' = u^2, u(0) = 0, u'(0) = A: t* = ∫ du / sqrt(A^2 + 2u^3/3)"""
    model = WaveModel(damping=DampingSpec(family=DampingFamily.ZERO),
                      nonlinearity=NonlinearitySpec(kind=NonlinearityKind.POWER_ABS_PLUS, p=2.0))
    amplitude, threshold = 2.0, 1e6
    expected, _ = quad(lambda u: 1.0 / math.sqrt(amplitude ** 2 + 2.0 * u ** 3 / 3.0), 0.0, threshold,
                       points=[1.0, 10.0, 100.0], limit=200)
    assert ode_blowup_time(amplitude, model, threshold=threshold) == pytest.approx(expected, rel=1e-5)
