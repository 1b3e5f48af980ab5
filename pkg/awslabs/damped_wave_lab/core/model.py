#!/usr/bin/env python3
# model.py
"""
Problem data for u_tt - Δu + b(t)u_t = N(u)
Damping coefficient families, power nonlinearities with primitives,
initial-data families and the structural checks they are expected to pass
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import ParameterRangeError, ResolutionError
from .grid import RadialGrid, State

ArrayLike = Union[float, np.ndarray]

# Marker returned by inverse integrals that do not converge
DIVERGENT = math.inf

# e^{-r^2/w^2} < 1e-16 beyond w*sqrt(ln 1e16)
GAUSSIAN_SUPPORT_FACTOR = math.sqrt(math.log(1e16))

# Singular data cutoff: 1 on [0, 1], 0 on [2, inf)
CUTOFF_OUTER_RADIUS = 2.0


def _as_time(t: ArrayLike) -> ArrayLike:
    if np.any(np.asarray(t) < 0):
        raise ParameterRangeError(f"time must be nonnegative, got {t}")
    return t


# ---------------------------------------------------------------------------
# Smooth transition h(x) = g(x) / (g(x) + g(1-x)), g(x) = exp(-1/x) for x > 0
# ---------------------------------------------------------------------------

def _g(x: np.ndarray):
    """g, g', g'' with g(x) = exp(-1/x) on x > 0 and 0 elsewhere"""
    positive = x > 0
    safe = np.where(positive, x, 1.0)
    value = np.where(positive, np.exp(-1.0 / safe), 0.0)
    first = value / safe ** 2
    second = value * (1.0 / safe ** 4 - 2.0 / safe ** 3)
    return value, np.where(positive, first, 0.0), np.where(positive, second, 0.0)


def smooth_step(x: ArrayLike):
    """Return (h, h', h'') of the C-infinity step: 0 for x <= 0, 1 for x >= 1"""
    x = np.asarray(x, dtype=float)
    a, a1, a2 = _g(x)
    c, g1, g2 = _g(1.0 - x)
    c1, c2 = -g1, g2
    s = a + c
    value = a / s
    numerator = a1 * c - a * c1
    first = numerator / s ** 2
    second = ((a2 * c - a * c2) * s - 2.0 * numerator * (a1 + c1)) / s ** 3
    return value, first, second


def cutoff(r: ArrayLike) -> np.ndarray:
    """chi(r) = h(2 - r): 1 on [0, 1], 0 on [2, inf)"""
    return smooth_step(CUTOFF_OUTER_RADIUS - np.asarray(r, dtype=float))[0]


# ---------------------------------------------------------------------------
# Damping
# ---------------------------------------------------------------------------

class DampingFamily(str, Enum):
    CONSTANT = "constant"
    POWER = "power"
    EXPONENTIAL = "exponential"
    ZERO = "zero"


class DampingSpec(BaseModel):
    """b(t): constant mu, power mu(1+t)^(-beta), exponential mu e^(a t), or zero"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: DampingFamily = DampingFamily.CONSTANT
    mu: float = Field(1.0, gt=0)
    beta: float = 0.0
    rate: float = Field(1.0, gt=0)

    @classmethod
    def parse(cls, text: str) -> "DampingSpec":
        """Build from 'family[:key=value,...]', e.g. 'power:mu=1,beta=-2'"""
        family, _, params = text.strip().partition(":")
        fields: Dict[str, Any] = {"family": family.strip()}
        for item in filter(None, (p.strip() for p in params.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise ParameterRangeError(f"damping parameter '{item}' is not key=value")
            key = {"a": "rate"}.get(key.strip(), key.strip())
            fields[key] = float(value)
        return cls(**fields)

    def describe(self) -> str:
        if self.family == DampingFamily.POWER:
            return f"power(mu={self.mu:g}, beta={self.beta:g})"
        if self.family == DampingFamily.EXPONENTIAL:
            return f"exponential(mu={self.mu:g}, a={self.rate:g})"
        if self.family == DampingFamily.CONSTANT:
            return f"constant(mu={self.mu:g})"
        return "zero"

    def value(self, t: ArrayLike) -> ArrayLike:
        """b(t)"""
        t = _as_time(t)
        if self.family == DampingFamily.CONSTANT:
            return self.mu + 0.0 * np.asarray(t) if np.ndim(t) else self.mu
        if self.family == DampingFamily.POWER:
            return self.mu * (1.0 + t) ** (-self.beta)
        if self.family == DampingFamily.EXPONENTIAL:
            return self.mu * np.exp(self.rate * t)
        return 0.0 * np.asarray(t) if np.ndim(t) else 0.0

    def derivative(self, t: ArrayLike) -> ArrayLike:
        """b'(t)"""
        t = _as_time(t)
        if self.family == DampingFamily.POWER:
            return -self.beta * self.mu * (1.0 + t) ** (-self.beta - 1.0)
        if self.family == DampingFamily.EXPONENTIAL:
            return self.rate * self.mu * np.exp(self.rate * t)
        return 0.0 * np.asarray(t) if np.ndim(t) else 0.0

    def cumulative(self, t: ArrayLike) -> ArrayLike:
        """B(t) = integral of b over [0, t]"""
        return self.increment(0.0, t)

    def increment(self, t: ArrayLike, h: ArrayLike) -> ArrayLike:
        """Integral of b over [t, t+h] in a cancellation-free closed form"""
        t = _as_time(t)
        if self.family == DampingFamily.CONSTANT:
            return self.mu * h
        if self.family == DampingFamily.POWER:
            growth = np.log1p(h / (1.0 + t))
            if self.beta == 1.0:
                return self.mu * growth
            e = 1.0 - self.beta
            return self.mu * (1.0 + t) ** e * np.expm1(e * growth) / e
        if self.family == DampingFamily.EXPONENTIAL:
            return self.mu * np.exp(self.rate * t) * np.expm1(self.rate * h) / self.rate
        return 0.0 * np.asarray(h) if np.ndim(h) else 0.0

    def _inverse_antiderivative(self, t: float) -> float:
        if self.family == DampingFamily.CONSTANT:
            return t / self.mu
        if self.family == DampingFamily.POWER:
            e = 1.0 + self.beta
            if e == 0.0:
                return math.log1p(t) / self.mu
            if math.isinf(t):
                return 0.0 if e < 0 else DIVERGENT
            return (1.0 + t) ** e / (self.mu * e)
        if self.family == DampingFamily.EXPONENTIAL:
            if math.isinf(t):
                return 0.0
            return -math.exp(-self.rate * t) / (self.mu * self.rate)
        return DIVERGENT

    def inverse_integral(self, T: float, start: float = 0.0) -> float:
        """Integral of 1/b over [start, T]; DIVERGENT when it does not converge"""
        if not (T > 0 or math.isinf(T)):
            raise ParameterRangeError(f"upper limit must be positive or infinite, got {T}")
        if start < 0 or start > T:
            raise ParameterRangeError(f"lower limit must lie in [0, {T}], got {start}")
        if self.family == DampingFamily.ZERO:
            return DIVERGENT
        upper = self._inverse_antiderivative(T)
        if math.isinf(upper):
            return DIVERGENT
        if self.family == DampingFamily.EXPONENTIAL:
            head = math.exp(-self.rate * start) / (self.mu * self.rate)
            return head if math.isinf(T) else -head * math.expm1(-self.rate * (T - start))
        return upper - self._inverse_antiderivative(start)

    def sup_norm(self, T: float) -> float:
        """||b||_{L^inf(0, T)}; every family is monotone on [0, inf)"""
        return float(max(abs(self.value(0.0)), abs(self.value(T))))

    def derivative_sup_norm(self, T: float) -> float:
        """||b'||_{L^inf(0, T)}"""
        return float(max(abs(self.derivative(0.0)), abs(self.derivative(T))))


def damping_value(spec: DampingSpec, t: float) -> float:
    return float(spec.value(t))


def damping_inverse_integral(spec: DampingSpec, T: float) -> float:
    return spec.inverse_integral(T)


# ---------------------------------------------------------------------------
# Nonlinearity
# ---------------------------------------------------------------------------

class NonlinearityKind(str, Enum):
    POWER_ABS_PLUS = "power_abs_plus"
    POWER_ABS_MINUS = "power_abs_minus"
    POWER_SIGNED_PLUS = "power_signed_plus"
    POWER_SIGNED_MINUS = "power_signed_minus"
    LINEAR_COMBINATION = "linear_combination"
    ZERO = "zero"


_SIGNS = {
    NonlinearityKind.POWER_ABS_PLUS: 1.0,
    NonlinearityKind.POWER_ABS_MINUS: -1.0,
    NonlinearityKind.POWER_SIGNED_PLUS: 1.0,
    NonlinearityKind.POWER_SIGNED_MINUS: -1.0,
}


class NonlinearitySpec(BaseModel):
    """N(z) = ±|z|^p, ±|z|^(p-1)z, coef1|z|^(q1-1)z + coef2|z|^q2, or 0"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: NonlinearityKind = NonlinearityKind.POWER_ABS_PLUS
    p: float = Field(3.0, ge=1.0)
    c_n: Optional[float] = Field(None, ge=0.0)
    q1: float = Field(1.0, ge=1.0)
    q2: float = Field(1.0, ge=1.0)
    coef1: float = 0.0
    coef2: float = 0.0

    @model_validator(mode="before")
    @classmethod
    def _combination_exponent(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("kind") == NonlinearityKind.LINEAR_COMBINATION:
            data = dict(data)
            data["p"] = max(float(data.get("q1", 1.0)), float(data.get("q2", 1.0)))
        return data

    @property
    def lipschitz_constant(self) -> float:
        """C_N; defaults to p (mean-value constant), additive for combinations"""
        if self.c_n is not None:
            return self.c_n
        if self.kind == NonlinearityKind.ZERO:
            return 0.0
        if self.kind == NonlinearityKind.LINEAR_COMBINATION:
            return abs(self.coef1) * self.q1 + abs(self.coef2) * self.q2
        return self.p

    @property
    def sign(self) -> Optional[float]:
        """+1 / -1 for the signed power families, None otherwise"""
        return _SIGNS.get(self.kind)

    @property
    def is_defocusing(self) -> bool:
        """Ñ(z) <= 0 for every real z, decided per family"""
        if self.kind in (NonlinearityKind.POWER_SIGNED_MINUS, NonlinearityKind.ZERO):
            return True
        if self.kind == NonlinearityKind.LINEAR_COMBINATION:
            return self.coef1 <= 0.0 and self.coef2 == 0.0
        return False

    def is_focusing_for(self, data_sign: float) -> bool:
        """N = data_sign * |z|^p (the double sign of the blow-up condition)"""
        if self.kind not in (NonlinearityKind.POWER_ABS_PLUS, NonlinearityKind.POWER_ABS_MINUS):
            return False
        return self.sign == data_sign

    def evaluate(self, z: ArrayLike) -> np.ndarray:
        """N(z)"""
        z = np.asarray(z, dtype=float)
        a = np.abs(z)
        if self.kind in (NonlinearityKind.POWER_ABS_PLUS, NonlinearityKind.POWER_ABS_MINUS):
            return self.sign * a ** self.p
        if self.kind in (NonlinearityKind.POWER_SIGNED_PLUS, NonlinearityKind.POWER_SIGNED_MINUS):
            return self.sign * a ** (self.p - 1.0) * z
        if self.kind == NonlinearityKind.LINEAR_COMBINATION:
            return self.coef1 * a ** (self.q1 - 1.0) * z + self.coef2 * a ** self.q2
        return np.zeros_like(z)

    def primitive(self, z: ArrayLike) -> np.ndarray:
        """Ñ(z) = integral of N over [0, z]"""
        z = np.asarray(z, dtype=float)
        a = np.abs(z)
        if self.kind in (NonlinearityKind.POWER_ABS_PLUS, NonlinearityKind.POWER_ABS_MINUS):
            return self.sign * np.sign(z) * a ** (self.p + 1.0) / (self.p + 1.0)
        if self.kind in (NonlinearityKind.POWER_SIGNED_PLUS, NonlinearityKind.POWER_SIGNED_MINUS):
            return self.sign * a ** (self.p + 1.0) / (self.p + 1.0)
        if self.kind == NonlinearityKind.LINEAR_COMBINATION:
            return (self.coef1 * a ** (self.q1 + 1.0) / (self.q1 + 1.0)
                    + self.coef2 * np.sign(z) * a ** (self.q2 + 1.0) / (self.q2 + 1.0))
        return np.zeros_like(z)

    def derivative(self, z: ArrayLike) -> np.ndarray:
        """N'(z)"""
        z = np.asarray(z, dtype=float)
        a = np.abs(z)
        if self.kind in (NonlinearityKind.POWER_ABS_PLUS, NonlinearityKind.POWER_ABS_MINUS):
            return self.sign * self.p * a ** (self.p - 1.0) * np.sign(z)
        if self.kind in (NonlinearityKind.POWER_SIGNED_PLUS, NonlinearityKind.POWER_SIGNED_MINUS):
            return self.sign * self.p * a ** (self.p - 1.0)
        if self.kind == NonlinearityKind.LINEAR_COMBINATION:
            return (self.coef1 * self.q1 * a ** (self.q1 - 1.0)
                    + self.coef2 * self.q2 * a ** (self.q2 - 1.0) * np.sign(z))
        return np.zeros_like(z)

    def describe(self) -> str:
        if self.kind == NonlinearityKind.LINEAR_COMBINATION:
            return f"{self.coef1:g}|z|^{self.q1 - 1:g}z + {self.coef2:g}|z|^{self.q2:g}"
        return f"{self.kind.value}(p={self.p:g})"


def nonlinearity_eval(spec: NonlinearitySpec, z: ArrayLike) -> np.ndarray:
    return spec.evaluate(z)


def nonlinearity_primitive(spec: NonlinearitySpec, z: ArrayLike) -> np.ndarray:
    return spec.primitive(z)


@dataclass(frozen=True)
class LipschitzReport:
    passed: bool
    worst_ratio: float
    constant: float


def lipschitz_check(spec: NonlinearitySpec, Z: float, n: int) -> LipschitzReport:
    """Check |N(z)-N(w)| <= C_N (1+|z|+|w|)^(p-1) |z-w| on an n x n grid of [-Z, Z]^2"""
    if not Z > 0:
        raise ParameterRangeError(f"range bound must be positive, got {Z}")
    if n < 2:
        raise ParameterRangeError(f"need at least two samples, got {n}")
    samples = np.linspace(-Z, Z, n)
    z, w = np.meshgrid(samples, samples, indexing="ij")
    distinct = z != w
    z, w = z[distinct], w[distinct]
    scale = (1.0 + np.abs(z) + np.abs(w)) ** (spec.p - 1.0) * np.abs(z - w)
    ratios = np.abs(spec.evaluate(z) - spec.evaluate(w)) / scale
    worst = float(np.max(ratios)) if ratios.size else 0.0
    constant = spec.lipschitz_constant
    return LipschitzReport(passed=worst <= constant * (1.0 + 1e-12), worst_ratio=worst, constant=constant)


class WaveModel(BaseModel):
    """Damping coefficient and nonlinearity of one problem"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    damping: DampingSpec = DampingSpec()
    nonlinearity: NonlinearitySpec = NonlinearitySpec()


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

class DataFamily(str, Enum):
    GAUSSIAN = "gaussian"
    SINGULAR = "singular"


class SingularMode(str, Enum):
    IN_U1 = "in_u1"
    SPLIT = "split"


class InitialDataSpec(BaseModel):
    """Gaussian small data scaled by amplitude, or capped singular data lam*|x|^-k"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: DataFamily = DataFamily.GAUSSIAN
    d: int = Field(3, ge=1)
    amplitude: float = 0.0
    width: float = Field(1.0, gt=0)
    velocity_amplitude: float = 0.0
    lam: float = Field(1.0, ge=0)
    k: float = 1.0
    delta: float = Field(0.05, ge=0)
    mode: SingularMode = SingularMode.IN_U1
    sign: float = 1.0

    @model_validator(mode="after")
    def _check_sign(self) -> "InitialDataSpec":
        if self.sign not in (1.0, -1.0):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        return self

    def support_radius(self) -> float:
        if self.family == DataFamily.GAUSSIAN:
            return self.width * GAUSSIAN_SUPPORT_FACTOR
        return CUTOFF_OUTER_RADIUS

    def singular_profile(self, r: ArrayLike) -> np.ndarray:
        """sign * lam * min(r^-k, delta^-k) * chi(r)"""
        r = np.asarray(r, dtype=float)
        return self.sign * self.lam * np.maximum(r, self.delta) ** (-self.k) * cutoff(r)


def sample_initial_data(spec: InitialDataSpec, grid: RadialGrid,
                        damping: Optional[DampingSpec] = None) -> State:
    """Cell-centered samples (u0, u1) of the data family on the grid"""
    if grid.d != spec.d:
        raise ParameterRangeError(f"grid dimension {grid.d} does not match data dimension {spec.d}")
    r = grid.nodes
    if spec.family == DataFamily.GAUSSIAN:
        profile = np.exp(-(r / spec.width) ** 2)
        return State(t=0.0, u=spec.amplitude * profile, w=spec.velocity_amplitude * profile)

    if spec.delta < grid.dr:
        raise ResolutionError(
            f"cap radius delta={spec.delta:g} is below the grid spacing {grid.dr:g}")
    profile = spec.singular_profile(r)
    if spec.mode == SingularMode.IN_U1:
        return State(t=0.0, u=np.zeros_like(profile), w=profile)

    b0 = float(damping.value(0.0)) if damping is not None else 0.0
    if b0 <= 0:
        raise ParameterRangeError("split singular data needs b(0) > 0")
    return State(t=0.0, u=profile / (2.0 * b0), w=profile / 2.0)
