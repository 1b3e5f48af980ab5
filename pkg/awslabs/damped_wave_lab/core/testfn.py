#!/usr/bin/env python3
# testfn.py
"""
Test-function audit of numerical solutions
Bumps eta, phi and psi_tau = eta(t/tau) phi(|x|/tau), the weak-form integrals I, J, K1..K4,
an explicit admissible constant C3*, the singular-data lower bound and the threshold lambda0
"""

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import quad, trapezoid

from .errors import ParameterRangeError, ResolutionError, TraceError
from .grid import RadialGrid, State, sphere_area
from .model import DampingSpec, DataFamily, InitialDataSpec, WaveModel, smooth_step
from .solver import SolutionTrace, radial_laplacian

# Relative slack of the upper estimate on J
UPPER_ESTIMATE_SLACK = 0.05
# Slack of the data lower bound, relative to |J|
LOWER_BOUND_SLACK = 1e-3
# Samples used for the sup-norms of the bump derivatives
SUP_SAMPLES = 20001


def bump_eval(x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """eta = phi = h(2 - 2x) with its first two derivatives; 1 on [0, 1/2], 0 on [1, inf)"""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ParameterRangeError("bump argument must be nonnegative")
    value, first, second = smooth_step(2.0 - 2.0 * x)
    return value, -2.0 * first, 4.0 * second


def smallest_admissible_l(p: float) -> int:
    q = p / (p - 1.0)
    return int(math.ceil(2.0 * q + 1.0))


class TestFunctionSpec(BaseModel):
    """Scale tau, exponent p and power l >= 2q+1 of the test function psi_tau^l"""

    __test__: ClassVar[bool] = False
    model_config = ConfigDict(frozen=True, extra="forbid")

    tau: float = Field(1.0, gt=0)
    p: float = Field(3.0, gt=1)
    l: Optional[int] = None

    @model_validator(mode="after")
    def _fill_power(self) -> "TestFunctionSpec":
        if self.l is None:
            object.__setattr__(self, "l", smallest_admissible_l(self.p))
        elif self.l < 2.0 * self.q + 1.0:
            raise ValueError(f"l={self.l} is below 2q+1={2.0 * self.q + 1.0:g}")
        return self

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def eta_power(self, t: np.ndarray):
        """eta_tau^l and its first two time derivatives"""
        e, e1, e2 = bump_eval(np.asarray(t, dtype=float) / self.tau)
        l, tau = self.l, self.tau
        value = e ** l
        first = l * e ** (l - 1) * e1 / tau
        second = (l * (l - 1) * e ** (l - 2) * (e1 / tau) ** 2) + l * e ** (l - 1) * e2 / tau ** 2
        return value, first, second

    def phi_power(self, r: np.ndarray) -> np.ndarray:
        """phi_tau^l at the radii r"""
        return bump_eval(np.asarray(r, dtype=float) / self.tau)[0] ** self.l


def _check_window(trace: SolutionTrace, spec: TestFunctionSpec) -> int:
    """Index of the first sample at or past tau"""
    if trace.variable != "u":
        raise TraceError("test-function integrals need a trace in the u variable")
    if trace.grid.radius < spec.tau:
        raise ResolutionError(f"grid radius {trace.grid.radius:g} does not cover B(tau={spec.tau:g})")
    if trace.t_end < spec.tau:
        raise TraceError(f"trace ends at t={trace.t_end:g} before tau={spec.tau:g}")
    return int(np.searchsorted(trace.times, spec.tau * (1.0 - 1e-12)))


def _space_time(trace: SolutionTrace, spec: TestFunctionSpec, integrand) -> float:
    """∫_0^tau ∫ integrand(i, state) dx dt, trapezoid in time over the samples"""
    last = _check_window(trace, spec)
    values = [float(np.sum(trace.grid.volumes * integrand(i, trace.state(i)))) for i in range(last + 1)]
    return float(trapezoid(values, trace.times[: last + 1]))


def compute_I(trace: SolutionTrace, spec: TestFunctionSpec) -> float:
    """I = ∫∫ |u|^p psi^l"""
    phi_l = spec.phi_power(trace.grid.nodes)
    eta_l = spec.eta_power(trace.times)[0]
    return _space_time(trace, spec, lambda i, s: np.abs(s.u) ** spec.p * eta_l[i] * phi_l)


def compute_J(state: State, grid: RadialGrid, spec: TestFunctionSpec, damping: DampingSpec) -> float:
    """J = ∫ (b(0)u0 + u1) phi_tau^l"""
    if grid.radius < spec.tau:
        raise ResolutionError(f"grid radius {grid.radius:g} does not cover B(tau={spec.tau:g})")
    phi_l = spec.phi_power(grid.nodes)
    combined = float(damping.value(0.0)) * state.u + state.w
    return float(np.sum(grid.volumes * combined * phi_l))


def compute_K_terms(trace: SolutionTrace, spec: TestFunctionSpec,
                    damping: Optional[DampingSpec] = None) -> Tuple[float, float, float, float]:
    """K1 = ∫u ∂t²(psi^l), K2 = -∫u Δ(psi^l), K3 = -∫u b' psi^l, K4 = -∫u b ∂t(psi^l)

    K2 is taken in the adjoint form -∫(Δ_h u) psi^l with the solver's own finite-volume
    Laplacian, so the identity holds exactly in space on the numerical solution
    """
    damping = damping or trace.model.damping
    grid = trace.grid
    phi_l = spec.phi_power(grid.nodes)
    eta_l, eta_l1, eta_l2 = spec.eta_power(trace.times)
    b = np.asarray([float(damping.value(t)) for t in trace.times])
    b1 = np.asarray([float(damping.derivative(t)) for t in trace.times])
    k1 = _space_time(trace, spec, lambda i, s: s.u * eta_l2[i] * phi_l)
    k2 = _space_time(trace, spec, lambda i, s: -radial_laplacian(grid, s.u) * eta_l[i] * phi_l)
    k3 = _space_time(trace, spec, lambda i, s: -s.u * b1[i] * eta_l[i] * phi_l)
    k4 = _space_time(trace, spec, lambda i, s: -s.u * b[i] * eta_l1[i] * phi_l)
    return k1, k2, k3, k4


def weak_identity_residual(trace: SolutionTrace, spec: TestFunctionSpec,
                           model: Optional[WaveModel] = None) -> float:
    """|∫∫N(u)psi^l + J - (K1+K2+K3+K4)| / max(1, I + |J|)"""
    model = model or trace.model
    phi_l = spec.phi_power(trace.grid.nodes)
    eta_l = spec.eta_power(trace.times)[0]
    source = _space_time(trace, spec, lambda i, s: model.nonlinearity.evaluate(s.u) * eta_l[i] * phi_l)
    i_value = compute_I(trace, spec)
    j_value = compute_J(trace.initial_state, trace.grid, spec, model.damping)
    k_sum = sum(compute_K_terms(trace, spec, model.damping))
    return abs(source + j_value - k_sum) / max(1.0, i_value + abs(j_value))


def _bump_sup_norms(d: int) -> Dict[str, float]:
    x = np.linspace(0.0, 1.0, SUP_SAMPLES)
    _, first, second = bump_eval(x)
    interior = x > 0
    laplacian = second[interior] + (d - 1) * first[interior] / x[interior]
    return {
        "first": float(np.max(np.abs(first))),
        "second": float(np.max(np.abs(second))),
        "laplacian": float(np.max(np.abs(laplacian))),
    }


def reconstruct_C3star(spec: TestFunctionSpec, d: int, p: Optional[float] = None) -> float:
    """Admissible C3* from the bump sup-norms, Hölder on the unit cylinder and Young's inequality"""
    p = spec.p if p is None else p
    q = p / (p - 1.0)
    l = spec.l
    norms = _bump_sup_norms(d)
    cylinder = (sphere_area(d) / d) ** (1.0 / q)
    c1 = (l * (l - 1) * norms["first"] ** 2 + l * norms["second"]) * cylinder
    c2 = (l * norms["laplacian"] + l * (l - 1) * norms["first"] ** 2) * cylinder
    c3 = cylinder
    c4 = l * norms["first"] * cylinder
    return 3.0 ** (q - 1.0) / q * max((c1 + c2) ** q, c3 ** q, c4 ** q)


def upper_estimate_bound(spec: TestFunctionSpec, d: int, damping: DampingSpec, c3star: Optional[float] = None) -> float:
    """C3* tau^{d+1} {tau^{-2q} + ||b'||^q + ||b||^q tau^{-q}} with norms over [0, tau]"""
    c3star = reconstruct_C3star(spec, d) if c3star is None else c3star
    tau, q = spec.tau, spec.q
    bracket = (tau ** (-2.0 * q) + damping.derivative_sup_norm(tau) ** q
               + damping.sup_norm(tau) ** q * tau ** (-q))
    return c3star * tau ** (d + 1) * bracket


def upper_estimate_check(j_value: float, spec: TestFunctionSpec, d: int, damping: DampingSpec,
                  sign: float = 1.0, c3star: Optional[float] = None) -> bool:
    return sign * j_value <= (1.0 + UPPER_ESTIMATE_SLACK) * upper_estimate_bound(spec, d, damping, c3star)


def _capped_radial_integral(d: int, k: float, cap: float, outer: float, l: int) -> float:
    """∫_{|x|<=outer} min(|x|^-k, cap^-k) phi^l dx, exact where phi = 1"""
    inner = min(0.5, outer)
    if cap >= inner:
        exact = cap ** (-k) * inner ** d / d
    else:
        exact = cap ** (d - k) / d + (inner ** (d - k) - cap ** (d - k)) / (d - k)
    total = exact
    if outer > inner:
        def integrand(r):
            return r ** (d - 1) * max(r, cap) ** (-k) * float(bump_eval(r)[0]) ** l
        total += quad(integrand, inner, outer, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
    return sphere_area(d) * total


def data_lower_bound(data: InitialDataSpec, spec: TestFunctionSpec, k: Optional[float] = None) -> float:
    """lam tau^{d-k} ∫_{|x|<=1/tau} min(|x|^-k, (delta/tau)^-k) phi^l dx"""
    k = data.k if k is None else k
    d = data.d
    if k >= d:
        raise ParameterRangeError(f"k={k:g} >= d={d}: the lower bound integral diverges")
    tau = spec.tau
    outer = min(1.0, 1.0 / tau)
    return data.lam * tau ** (d - k) * _capped_radial_integral(d, k, data.delta / tau, outer, spec.l)


def lemma32_check(j_value: float, lower_bound: float, sign: float = 1.0) -> bool:
    return sign * j_value >= lower_bound - LOWER_BOUND_SLACK * abs(j_value)


def lambda_threshold(d: int, p: float, k: float, damping: DampingSpec,
                     spec: Optional[TestFunctionSpec] = None, c3star: Optional[float] = None) -> float:
    """lambda0 = C3* 2^{k+1} {2^{-2q} + ||b'||^q + ||b||^q 2^{-q}} (d-k)/|S| 2^{d-k}, norms over [0, 2]"""
    if not p > 1:
        raise ParameterRangeError(f"lambda0 needs p > 1, got {p}")
    if k >= min(d, (p + 1.0) / (p - 1.0)):
        raise ParameterRangeError(f"k={k:g} must stay below min(d, (p+1)/(p-1))")
    spec = spec or TestFunctionSpec(tau=2.0, p=p)
    c3star = reconstruct_C3star(spec, d, p) if c3star is None else c3star
    q = p / (p - 1.0)
    bracket = (2.0 ** (-2.0 * q) + damping.derivative_sup_norm(2.0) ** q
               + damping.sup_norm(2.0) ** q * 2.0 ** (-q))
    return c3star * 2.0 ** (k + 1.0) * bracket * (d - k) / sphere_area(d) * 2.0 ** (d - k)


@dataclass(frozen=True)
class TestFnReport:
    __test__ = False

    tau: float
    l: int
    q: float
    I: float
    J: float
    K: Tuple[float, float, float, float]
    residual: float
    c3star: float
    upper_estimate_bound: float
    upper_estimate_pass: bool
    lower_bound: Optional[float] = None
    lower_bound_pass: Optional[bool] = None
    lambda0: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "tau": self.tau, "l": self.l, "q": self.q, "I": self.I, "J": self.J,
            "K1": self.K[0], "K2": self.K[1], "K3": self.K[2], "K4": self.K[3],
            "residual": self.residual, "C3star": self.c3star,
            "upper_estimate_bound": self.upper_estimate_bound, "upper_estimate_pass": self.upper_estimate_pass,
            "lower_bound": self.lower_bound, "lower_bound_pass": self.lower_bound_pass,
            "lambda0": self.lambda0,
        }
        payload.update(self.extra)
        return payload


def audit(trace: SolutionTrace, spec: TestFunctionSpec, data: Optional[InitialDataSpec] = None,
          model: Optional[WaveModel] = None) -> TestFnReport:
    """Every test-function quantity of one trace at one tau"""
    model = model or trace.model
    grid = trace.grid
    sign = data.sign if data is not None else 1.0
    i_value = compute_I(trace, spec)
    j_value = compute_J(trace.initial_state, grid, spec, model.damping)
    k_terms = compute_K_terms(trace, spec, model.damping)
    residual = weak_identity_residual(trace, spec, model)
    c3star = reconstruct_C3star(spec, grid.d)
    bound = upper_estimate_bound(spec, grid.d, model.damping, c3star)

    lower = lower_pass = lam0 = None
    if data is not None and data.family == DataFamily.SINGULAR and data.k < data.d:
        lower = data_lower_bound(data, spec)
        lower_pass = lemma32_check(j_value, lower, sign)
        if data.k < (spec.p + 1.0) / (spec.p - 1.0):
            lam0 = lambda_threshold(grid.d, spec.p, data.k, model.damping, c3star=c3star)

    report = TestFnReport(tau=spec.tau, l=spec.l, q=spec.q, I=i_value, J=j_value, K=k_terms,
                          residual=residual, c3star=c3star, upper_estimate_bound=bound,
                          upper_estimate_pass=upper_estimate_check(j_value, spec, grid.d, model.damping, sign, c3star),
                          lower_bound=lower, lower_bound_pass=lower_pass, lambda0=lam0)
    logger.debug(f"test-function audit at tau={spec.tau:g}: residual {residual:.3e}, "
                 f"upper_estimate={report.upper_estimate_pass}, lower_bound={lower_pass}")
    return report
