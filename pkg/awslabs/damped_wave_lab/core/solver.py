#!/usr/bin/env python3
# solver.py
"""
Radial method-of-lines solver
Strang splitting with an exact damping factor for the damped problem, Verlet for the
transformed undamped problem v = e^{B/2}u, blow-up detection and the equivalence check
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import cumulative_trapezoid, solve_ivp

from .errors import ExperimentError, ParameterRangeError, TraceError
from .grid import RadialGrid, State
from .model import DampingSpec, InitialDataSpec, WaveModel, sample_initial_data

__all__ = [
    "RadialGrid", "State", "SolverConfig", "Termination", "TerminationKind", "BlowUpTrigger",
    "SolutionTrace", "TransformedProblem", "radial_laplacian", "step", "solve", "solve_state",
    "transform_to_v", "solve_transformed", "transform_compare", "pullback", "l2_norm",
    "flow_map_lipschitz", "ode_blowup_time",
]

# e^{B/2} must stay representable in binary64
MAX_HALF_CUMULATIVE_DAMPING = 700.0


class SolverConfig(BaseModel):
    """Time stepping controls"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cfl: float = Field(0.5, gt=0, le=1)
    blow_threshold: float = Field(1e6, gt=0)
    dt_floor: float = Field(1e-12, gt=0)
    t_max: float = Field(10.0, gt=0)
    sample_stride: float = Field(0.1, gt=0)
    dt_max: float = Field(math.inf, gt=0)
    safety: float = Field(0.5, gt=0)

    def sample_time(self, k: int) -> float:
        """k-th sample time; the last one is T_max itself"""
        s = k * self.sample_stride
        return self.t_max if s > self.t_max - 1e-9 * self.sample_stride else s


class TerminationKind(str, Enum):
    REACHED_HORIZON = "reached_horizon"
    BLOW_UP = "blow_up"


class BlowUpTrigger(str, Enum):
    NORM = "norm"
    DT_FLOOR = "dt_floor"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    t_star: Optional[float] = None
    bracket: Optional[Tuple[float, float]] = None
    trigger: Optional[BlowUpTrigger] = None

    @classmethod
    def horizon(cls) -> "Termination":
        return cls(kind=TerminationKind.REACHED_HORIZON)

    @classmethod
    def blow_up(cls, t_stable: float, t_failed: float, trigger: BlowUpTrigger) -> "Termination":
        return cls(kind=TerminationKind.BLOW_UP, t_star=t_stable,
                   bracket=(t_stable, t_failed), trigger=trigger)

    @property
    def blew_up(self) -> bool:
        return self.kind == TerminationKind.BLOW_UP

    @property
    def midpoint(self) -> Optional[float]:
        """Bracket midpoint, the lifespan estimate used by the sweeps"""
        if self.bracket is None:
            return None
        return 0.5 * (self.bracket[0] + self.bracket[1])

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind.value,
            "t_star": self.t_star,
            "bracket": list(self.bracket) if self.bracket else None,
            "trigger": self.trigger.value if self.trigger else None,
        }


@dataclass(frozen=True, eq=False)
class SolutionTrace:
    """Sampled states of one run; rows of u, w are sample times"""

    grid: RadialGrid
    model: WaveModel
    times: np.ndarray
    u: np.ndarray
    w: np.ndarray
    dissipation: np.ndarray
    termination: Termination
    steps: int = 0
    variable: str = "u"

    def __post_init__(self):
        if self.u.shape != self.w.shape or self.u.shape[0] != self.times.size:
            raise TraceError("trace arrays do not match the sample times")
        if np.any(np.diff(self.times) <= 0):
            raise TraceError("sample times must be strictly increasing")

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    def state(self, i: int) -> State:
        return State(t=float(self.times[i]), u=self.u[i], w=self.w[i])

    @property
    def initial_state(self) -> State:
        return self.state(0)

    @property
    def final_state(self) -> State:
        return self.state(-1)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


def l2_norm(grid: RadialGrid, values: np.ndarray) -> float:
    return float(math.sqrt(np.sum(grid.volumes * values * values)))


def radial_laplacian(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """Finite-volume radial Laplacian with zero flux at the origin and a boundary ghost at R"""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_nodes,):
        raise ParameterRangeError(f"expected {grid.n_nodes} nodal values, got shape {u.shape}")
    padded = np.append(u, grid.ghost(u))
    flux = grid.face_areas * np.diff(padded) / grid.dr
    inner = np.concatenate(([0.0], flux[:-1]))
    return (flux - inner) / grid.volumes


class _DampedStepper:
    """kick(h/2) drift(h/2) damp(h) drift(h/2) kick(h/2)"""

    def __init__(self, model: WaveModel, grid: RadialGrid, config: SolverConfig):
        self.model = model
        self.grid = grid
        self.config = config

    def _accel(self, u: np.ndarray) -> np.ndarray:
        return radial_laplacian(self.grid, u) + self.model.nonlinearity.evaluate(u)

    def stable_step(self, state: State) -> float:
        stiffness = float(np.max(np.abs(self.model.nonlinearity.derivative(state.u)), initial=0.0))
        return min(self.config.cfl * self.grid.dr, self.config.dt_max,
                   self.config.safety / math.sqrt(1.0 + stiffness))

    def advance(self, state: State, h: float, t_next: float) -> Tuple[State, float]:
        half = 0.5 * h
        with np.errstate(over="ignore", invalid="ignore"):
            w = state.w + half * self._accel(state.u)
            u = state.u + half * w
            factor = math.exp(-float(self.model.damping.increment(state.t, h)))
            kinetic = 0.5 * float(np.sum(self.grid.volumes * w * w))
            dissipated = kinetic * (1.0 - factor * factor)
            w = w * factor
            u = u + half * w
            w = w + half * self._accel(u)
        return State(t=t_next, u=u, w=w), dissipated

    def sup(self, state: State) -> float:
        return state.sup()


def step(state: State, model: WaveModel, config: SolverConfig, grid: RadialGrid,
         dt: Optional[float] = None) -> State:
    """One splitting step; dt defaults to the controller's choice"""
    stepper = _DampedStepper(model, grid, config)
    h = stepper.stable_step(state) if dt is None else dt
    return stepper.advance(state, h, state.t + h)[0]


def _integrate(stepper, initial: State, grid: RadialGrid, config: SolverConfig,
               model: WaveModel, variable: str) -> SolutionTrace:
    state = initial
    times: List[float] = [state.t]
    us: List[np.ndarray] = [state.u.copy()]
    ws: List[np.ndarray] = [state.w.copy()]
    dissipation: List[float] = [0.0]
    dissipated = 0.0
    steps = 0
    k = 1
    termination: Optional[Termination] = None

    if not state.is_finite() or stepper.sup(state) > config.blow_threshold:
        raise ParameterRangeError("initial state is not finite or already above the blow-up threshold")

    while termination is None:
        target = config.sample_time(k)
        h_ctrl = stepper.stable_step(state)
        if not h_ctrl >= config.dt_floor:
            termination = Termination.blow_up(state.t, state.t + config.dt_floor, BlowUpTrigger.DT_FLOOR)
            break
        remaining = target - state.t
        n_sub = max(1, math.ceil(remaining / h_ctrl * (1.0 - 1e-12)))
        h = remaining / n_sub
        t_next = target if n_sub == 1 else state.t + h

        new_state, loss = stepper.advance(state, h, t_next)
        steps += 1
        if not new_state.is_finite() or stepper.sup(new_state) > config.blow_threshold:
            termination = Termination.blow_up(state.t, t_next, BlowUpTrigger.NORM)
            break
        state = new_state
        dissipated += loss

        if t_next == target:
            times.append(state.t)
            us.append(state.u.copy())
            ws.append(state.w.copy())
            dissipation.append(dissipated)
            k += 1
            if target >= config.t_max:
                termination = Termination.horizon()

    if termination.blew_up and state.t > times[-1]:
        times.append(state.t)
        us.append(state.u.copy())
        ws.append(state.w.copy())
        dissipation.append(dissipated)

    logger.debug(f"{variable}-solve on {grid.n_nodes} nodes: {steps} steps, "
                 f"{termination.kind.value} at t={state.t:.6g}")
    return SolutionTrace(grid=grid, model=model, times=np.asarray(times), u=np.vstack(us),
                         w=np.vstack(ws), dissipation=np.asarray(dissipation),
                         termination=termination, steps=steps, variable=variable)


def solve_state(model: WaveModel, initial: State, grid: RadialGrid, config: SolverConfig) -> SolutionTrace:
    """Evolve an already sampled state until T_max or blow-up"""
    return _integrate(_DampedStepper(model, grid, config), initial, grid, config, model, "u")


def solve(model: WaveModel, data: InitialDataSpec, grid: RadialGrid, config: SolverConfig) -> SolutionTrace:
    initial = sample_initial_data(data, grid, model.damping)
    return solve_state(model, initial, grid, config)


# ---------------------------------------------------------------------------
# Transformed problem v = e^{B(t)/2} u:  v_tt - Δv = c1(t) v + e^{B/2} N(e^{-B/2} v)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformedProblem:
    model: WaveModel
    data: Optional[InitialDataSpec] = None

    @property
    def damping(self) -> DampingSpec:
        return self.model.damping

    def cumulative(self, t: float) -> float:
        """B(t)"""
        return float(self.damping.cumulative(t))

    def c1(self, t: float) -> float:
        """Coefficient of the linear source F1(v) = c1(t) v"""
        b = float(self.damping.value(t))
        return 0.5 * float(self.damping.derivative(t)) + 0.25 * b * b

    def f2(self, t: float, v: np.ndarray) -> np.ndarray:
        scale = math.exp(0.5 * self.cumulative(t))
        return scale * self.model.nonlinearity.evaluate(v / scale)

    def source(self, t: float, v: np.ndarray) -> np.ndarray:
        return self.c1(t) * v + self.f2(t, v)

    def transform_data(self, state: State) -> State:
        """v0 = u0, v1 = b(0)/2 u0 + u1"""
        b0 = float(self.damping.value(state.t))
        scale = math.exp(0.5 * self.cumulative(state.t))
        return State(t=state.t, u=scale * state.u, w=scale * (0.5 * b0 * state.u + state.w))


def transform_to_v(model: WaveModel, data: Optional[InitialDataSpec] = None) -> TransformedProblem:
    return TransformedProblem(model=model, data=data)


class _TransformedStepper:
    """Velocity Verlet for the undamped transformed equation"""

    def __init__(self, problem: TransformedProblem, grid: RadialGrid, config: SolverConfig):
        self.problem = problem
        self.grid = grid
        self.config = config

    def _accel(self, t: float, v: np.ndarray) -> np.ndarray:
        return radial_laplacian(self.grid, v) + self.problem.source(t, v)

    def stable_step(self, state: State) -> float:
        pulled = state.u * math.exp(-0.5 * self.problem.cumulative(state.t))
        nonlinear = np.max(np.abs(self.problem.model.nonlinearity.derivative(pulled)), initial=0.0)
        stiffness = abs(self.problem.c1(state.t)) + float(nonlinear)
        return min(self.config.cfl * self.grid.dr, self.config.dt_max,
                   self.config.safety / math.sqrt(1.0 + stiffness))

    def advance(self, state: State, h: float, t_next: float) -> Tuple[State, float]:
        with np.errstate(over="ignore", invalid="ignore"):
            w = state.w + 0.5 * h * self._accel(state.t, state.u)
            v = state.u + h * w
            w = w + 0.5 * h * self._accel(t_next, v)
        return State(t=t_next, u=v, w=w), 0.0

    def sup(self, state: State) -> float:
        return state.sup() * math.exp(-0.5 * self.problem.cumulative(state.t))


def solve_transformed(problem: TransformedProblem, grid: RadialGrid, config: SolverConfig,
                      initial: Optional[State] = None) -> SolutionTrace:
    """Solve for v; initial is a u-state (sampled from problem.data when omitted)"""
    half_cumulative = 0.5 * problem.cumulative(config.t_max)
    if half_cumulative > MAX_HALF_CUMULATIVE_DAMPING:
        raise ExperimentError(
            f"B(T_max)/2 = {half_cumulative:.4g} overflows e^(B/2); shorten the horizon")
    if initial is None:
        if problem.data is None:
            raise ParameterRangeError("transformed problem has no data to sample")
        initial = sample_initial_data(problem.data, grid, problem.damping)
    stepper = _TransformedStepper(problem, grid, config)
    return _integrate(stepper, problem.transform_data(initial), grid, config, problem.model, "v")


def pullback(trace_v: SolutionTrace, problem: TransformedProblem) -> SolutionTrace:
    """u = e^{-B/2} v, u_t = e^{-B/2}(v_t - b v / 2), dissipation by trapezoid in time"""
    if trace_v.variable != "v":
        raise TraceError(f"pullback expects a v-trace, got a {trace_v.variable}-trace")
    damping = problem.damping
    scale = np.exp(-0.5 * np.array([problem.cumulative(t) for t in trace_v.times]))[:, None]
    b = np.asarray([float(damping.value(t)) for t in trace_v.times])[:, None]
    u = scale * trace_v.u
    w = scale * (trace_v.w - 0.5 * b * trace_v.u)
    rate = b[:, 0] * np.sum(trace_v.grid.volumes * w * w, axis=1)
    dissipation = cumulative_trapezoid(rate, trace_v.times, initial=0.0)
    return SolutionTrace(grid=trace_v.grid, model=trace_v.model, times=trace_v.times, u=u, w=w,
                         dissipation=dissipation, termination=trace_v.termination,
                         steps=trace_v.steps, variable="u")


def transform_compare(trace_u: SolutionTrace, trace_v: SolutionTrace,
                      B: Union[Callable[[float], float], DampingSpec]) -> float:
    """max_t ||u - e^{-B/2} v||_{L2} / max_t ||u||_{L2}"""
    if trace_u.grid != trace_v.grid:
        raise TraceError("u- and v-traces live on different grids")
    if trace_u.n_samples != trace_v.n_samples or not np.allclose(trace_u.times, trace_v.times,
                                                                  rtol=0.0, atol=1e-12):
        raise TraceError("u- and v-traces have different sample times")
    cumulative = B.cumulative if isinstance(B, DampingSpec) else B
    grid = trace_u.grid
    worst = 0.0
    largest = 0.0
    for t, u, v in zip(trace_u.times, trace_u.u, trace_v.u):
        pulled = math.exp(-0.5 * float(cumulative(float(t)))) * v
        worst = max(worst, l2_norm(grid, u - pulled))
        largest = max(largest, l2_norm(grid, u))
    return worst / largest if largest > 0 else worst


# ---------------------------------------------------------------------------
# Empirical flow-map continuity and the ODE blow-up oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LipschitzEstimate:
    eta: float
    difference: float
    constant: float


def flow_map_lipschitz(model: WaveModel, data: InitialDataSpec, grid: RadialGrid, config: SolverConfig,
                       etas: Sequence[float] = (1e-4, 1e-3, 1e-2)) -> List[LipschitzEstimate]:
    """sup_t ||u_eta - u||_{L2} / eta for u0 perturbed by eta e^{-r^2/w^2}"""
    base_state = sample_initial_data(data, grid, model.damping)
    base = solve_state(model, base_state, grid, config)
    profile = np.exp(-(grid.nodes / data.width) ** 2)
    estimates = []
    for eta in etas:
        perturbed = State(t=base_state.t, u=base_state.u + eta * profile, w=base_state.w)
        other = solve_state(model, perturbed, grid, config)
        n = min(base.n_samples, other.n_samples)
        difference = max(l2_norm(grid, base.u[i] - other.u[i]) for i in range(n))
        estimates.append(LipschitzEstimate(eta=eta, difference=difference, constant=difference / eta))
        logger.debug(f"flow map: eta={eta:g} -> L={difference / eta:.6g}")
    return estimates


def ode_blowup_time(amplitude: float, model: WaveModel, displacement: float = 0.0,
                    threshold: float = 1e6, t_max: float = 100.0) -> float:
    """Time at which u'' + b(t)u' = N(u), u(0)=displacement, u'(0)=amplitude leaves |u| <= threshold"""
    damping, nonlinearity = model.damping, model.nonlinearity

    def rhs(t, y):
        return [y[1], float(nonlinearity.evaluate(y[0])) - float(damping.value(t)) * y[1]]

    def escape(t, y):
        return abs(y[0]) - threshold

    escape.terminal = True
    escape.direction = 1
    result = solve_ivp(rhs, (0.0, t_max), [displacement, amplitude], method="LSODA",
                       events=escape, rtol=1e-10, atol=1e-12)
    if result.t_events[0].size:
        return float(result.t_events[0][0])
    return math.inf
