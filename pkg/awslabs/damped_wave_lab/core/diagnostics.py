#!/usr/bin/env python3
# diagnostics.py
"""
Energy functionals on solution traces
Energy, dissipation, the running H1 x L2 sup Q(t), the Sobolev ratio and the
estimates that bound the L2 norm of small-data solutions under overdamping
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from .errors import ParameterRangeError, TraceError
from .exponents import DampingRegime, classify_damping, energy_critical
from .grid import RadialGrid, State
from .model import WaveModel
from .solver import SolutionTrace, l2_norm

# Discretization slack of the proof-chain inequalities, relative to their right-hand side
CHAIN_SLACK = 1e-3


def gradient_energy(grid: RadialGrid, u: np.ndarray) -> float:
    """||∇u||^2 as the face sum over every cell including the boundary face"""
    padded = np.append(u, grid.ghost(u))
    jumps = np.diff(padded)
    return float(np.sum(grid.face_areas * jumps * jumps) / grid.dr)


def lp_norm(grid: RadialGrid, u: np.ndarray, exponent: float) -> float:
    return float(np.sum(grid.volumes * np.abs(u) ** exponent) ** (1.0 / exponent))


def h1_norm(grid: RadialGrid, u: np.ndarray) -> float:
    return math.sqrt(l2_norm(grid, u) ** 2 + gradient_energy(grid, u))


def energy(state: State, model: WaveModel, grid: RadialGrid) -> float:
    """E = 1/2||u_t||^2 + 1/2||∇u||^2 - ∫Ñ(u)"""
    kinetic = float(np.sum(grid.volumes * state.w * state.w))
    potential = float(np.sum(grid.volumes * model.nonlinearity.primitive(state.u)))
    return 0.5 * kinetic + 0.5 * gradient_energy(grid, state.u) - potential


def _pair_norm_squared(grid: RadialGrid, state: State, homogeneous: bool = False) -> float:
    """||(u, u_t)||^2 in H1 x L2, or in the homogeneous space when asked"""
    value = gradient_energy(grid, state.u) + l2_norm(grid, state.w) ** 2
    return value if homogeneous else value + l2_norm(grid, state.u) ** 2


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    """Per-sample energy diagnostics of one trace"""

    times: np.ndarray
    energy: np.ndarray
    kinetic: np.ndarray
    dissipation: np.ndarray
    q: np.ndarray
    lp1_norm: np.ndarray
    sup_u: np.ndarray
    l2_u: np.ndarray
    l2_w: np.ndarray
    l2_grad_u: np.ndarray
    b: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times, "sup_u": self.sup_u, "l2_u": self.l2_u, "l2_w": self.l2_w,
            "l2_grad_u": self.l2_grad_u, "energy": self.energy, "b": self.b,
            "kinetic": self.kinetic, "dissipation": self.dissipation, "q": self.q,
            "lp1_norm": self.lp1_norm,
        })


def energy_trace(trace: SolutionTrace, model: Optional[WaveModel] = None) -> EnergyTrace:
    model = model or trace.model
    if trace.variable != "u":
        raise TraceError("energy diagnostics need a trace in the u variable")
    grid = trace.grid
    p = model.nonlinearity.p
    rows = [trace.state(i) for i in range(trace.n_samples)]
    l2_u = np.array([l2_norm(grid, s.u) for s in rows])
    l2_w = np.array([l2_norm(grid, s.w) for s in rows])
    grad = np.array([math.sqrt(gradient_energy(grid, s.u)) for s in rows])
    pair = np.sqrt(l2_u ** 2 + grad ** 2 + l2_w ** 2)
    return EnergyTrace(
        times=trace.times.copy(),
        energy=np.array([energy(s, model, grid) for s in rows]),
        kinetic=l2_w ** 2,
        dissipation=trace.dissipation.copy(),
        q=np.maximum.accumulate(pair),
        lp1_norm=np.array([lp_norm(grid, s.u, p + 1.0) for s in rows]),
        sup_u=np.array([s.sup() for s in rows]),
        l2_u=l2_u,
        l2_w=l2_w,
        l2_grad_u=grad,
        b=np.asarray([float(model.damping.value(t)) for t in trace.times]),
    )


def energy_identity_residual(trace: EnergyTrace) -> float:
    """max_t |E(t) - E(0) + D(t)|"""
    return float(np.max(np.abs(trace.energy - trace.energy[0] + trace.dissipation)))


def q_norm(trace: SolutionTrace) -> np.ndarray:
    """Q(t) = sup_{s<=t} ||(u(s), u_t(s))||_{H1 x L2} at every sample"""
    grid = trace.grid
    pair = [math.sqrt(_pair_norm_squared(grid, trace.state(i))) for i in range(trace.n_samples)]
    return np.maximum.accumulate(np.asarray(pair))


def sobolev_ratio(state: State, p: float, grid: RadialGrid) -> float:
    """||u||_{L^{p+1}} / ||u||_{H1}; zero for the zero state"""
    if not 1.0 <= p < energy_critical(grid.d):
        raise ParameterRangeError(
            f"p={p:g} is outside the H1-subcritical range [1, {energy_critical(grid.d):g})")
    denominator = h1_norm(grid, state.u)
    if denominator == 0.0:
        return 0.0
    return lp_norm(grid, state.u, p + 1.0) / denominator


@dataclass(frozen=True)
class ChainEntry:
    time: float
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"time": self.time, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "pass": self.passed}


@dataclass(frozen=True)
class ChainReport:
    name: str
    constant: float
    entries: List[ChainEntry]

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def worst_margin(self) -> float:
        return min(entry.margin for entry in self.entries)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "constant": self.constant, "pass": self.passed,
                "worst_margin": self.worst_margin, "entries": [e.to_dict() for e in self.entries]}


def chain_constants(model: WaveModel) -> Dict[str, float]:
    """C1 = max(1/2, C_N) and C2 = max(2, 2||1/b||_{L1} C1)"""
    c1 = max(0.5, model.nonlinearity.lipschitz_constant)
    inverse = model.damping.inverse_integral(math.inf)
    return {"C1": c1, "C2": max(2.0, 2.0 * inverse * c1)}


def _chain(trace: SolutionTrace, p: float, name: str, constant: float, lhs_of,
           homogeneous: bool) -> ChainReport:
    grid = trace.grid
    initial = trace.initial_state
    data_part = _pair_norm_squared(grid, initial, homogeneous) + lp_norm(grid, initial.u, p + 1.0) ** (p + 1.0)
    entries = []
    for i in range(trace.n_samples):
        state = trace.state(i)
        rhs = constant * (data_part + lp_norm(grid, state.u, p + 1.0) ** (p + 1.0))
        lhs = lhs_of(i, state)
        entries.append(ChainEntry(time=state.t, lhs=lhs, rhs=rhs, margin=rhs - lhs,
                                  passed=lhs <= rhs * (1.0 + CHAIN_SLACK)))
    report = ChainReport(name=name, constant=constant, entries=entries)
    logger.debug(f"{name}: pass={report.passed}, worst margin {report.worst_margin:.6g}")
    return report


def l2_chain_check(trace: SolutionTrace, model: Optional[WaveModel] = None) -> ChainReport:
    """||u(t)||^2 <= C2 {||(u0,u1)||^2_{H1xL2} + ||u0||^{p+1}_{p+1} + ||u(t)||^{p+1}_{p+1}}"""
    model = model or trace.model
    if classify_damping(model.damping) != DampingRegime.OVERDAMPING:
        raise TraceError(f"the L2 chain needs overdamping, got {model.damping.describe()}")
    constant = chain_constants(model)["C2"]
    return _chain(trace, model.nonlinearity.p, "l2_chain", constant,
                  lambda i, s: l2_norm(trace.grid, s.u) ** 2, False)


def dissipation_bound_check(trace: SolutionTrace, model: Optional[WaveModel] = None) -> ChainReport:
    """∫b||u_t||^2 <= C1 {||(u0,u1)||^2_{homogeneous H1 x L2} + ||u0||^{p+1}_{p+1} + ||u(t)||^{p+1}_{p+1}}"""
    model = model or trace.model
    constant = chain_constants(model)["C1"]
    return _chain(trace, model.nonlinearity.p, "dissipation_bound", constant,
                  lambda i, s: float(trace.dissipation[i]), True)


def defocusing_bound_ratio(trace: SolutionTrace, model: Optional[WaveModel] = None) -> float:
    """sup Q / (||(u0,u1)||_{H1xL2} + ||u0||^{(p+1)/2}_{L^{p+1}})"""
    model = model or trace.model
    grid = trace.grid
    p = model.nonlinearity.p
    initial = trace.initial_state
    scale = math.sqrt(_pair_norm_squared(grid, initial)) + lp_norm(grid, initial.u, p + 1.0) ** ((p + 1.0) / 2.0)
    if scale == 0.0:
        return 0.0
    return float(q_norm(trace)[-1] / scale)
