#!/usr/bin/env python3
# config.py
"""
Experiment configuration
INI files with [problem], [numerics] and [experiment] sections, validated by pydantic
models that reject unknown keys and inconsistent combinations before anything runs
"""

import configparser
import math
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.errors import ConfigurationError, ParameterRangeError
from ..core.exponents import DampingRegime, classify_damping, energy_critical
from ..core.grid import BOUNDARY_KINDS, RadialGrid
from ..core.model import (
    DampingSpec,
    DataFamily,
    InitialDataSpec,
    NonlinearityKind,
    NonlinearitySpec,
    SingularMode,
    WaveModel,
)
from ..core.solver import SolverConfig

SECTIONS = ("problem", "numerics", "experiment")

BOUNDEDNESS_HORIZON = 100.0
BLOW_UP_HORIZON = 4.0


class ExperimentKind(str, Enum):
    SINGLE = "single"
    EPS_SWEEP = "eps_sweep"
    LAMBDA_SWEEP = "lambda_sweep"
    DELTA_SWEEP = "delta_sweep"
    CONVERGENCE = "convergence"
    TRANSFORM_CHECK = "transform_check"
    TESTFN_AUDIT = "testfn_audit"


SWEEP_KINDS = (ExperimentKind.EPS_SWEEP, ExperimentKind.LAMBDA_SWEEP, ExperimentKind.DELTA_SWEEP)


def _float_list(value: Any) -> Any:
    if isinstance(value, str):
        return tuple(float(item) for item in value.replace(";", ",").split(",") if item.strip())
    return value


class ProblemSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    d: int = Field(3, ge=1)
    damping: str = "constant:mu=1"
    nonlinearity: NonlinearityKind = NonlinearityKind.POWER_ABS_PLUS
    p: float = Field(3.0, ge=1.0)
    c_n: Optional[float] = None
    q1: float = 1.0
    q2: float = 1.0
    coef1: float = 0.0
    coef2: float = 0.0
    data: DataFamily = DataFamily.GAUSSIAN
    amplitude: float = 0.0
    width: float = 1.0
    velocity_amplitude: float = 0.0
    lam: float = 1.0
    k: float = 1.0
    delta: float = 0.05
    mode: SingularMode = SingularMode.IN_U1
    sign: float = 1.0

    @field_validator("damping")
    @classmethod
    def _parse_damping(cls, value: str) -> str:
        DampingSpec.parse(value)
        return value

    def damping_spec(self) -> DampingSpec:
        return DampingSpec.parse(self.damping)

    def nonlinearity_spec(self) -> NonlinearitySpec:
        fields: Dict[str, Any] = {"kind": self.nonlinearity, "p": self.p, "c_n": self.c_n}
        if self.nonlinearity == NonlinearityKind.LINEAR_COMBINATION:
            fields.update(q1=self.q1, q2=self.q2, coef1=self.coef1, coef2=self.coef2)
        return NonlinearitySpec(**fields)

    def wave_model(self) -> WaveModel:
        return WaveModel(damping=self.damping_spec(), nonlinearity=self.nonlinearity_spec())

    def data_spec(self) -> InitialDataSpec:
        return InitialDataSpec(
            family=self.data, d=self.d, amplitude=self.amplitude, width=self.width,
            velocity_amplitude=self.velocity_amplitude, lam=self.lam, k=self.k,
            delta=self.delta, mode=self.mode, sign=self.sign,
        )


class NumericsSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dr: float = Field(0.05, gt=0)
    cfl: float = Field(0.5, gt=0, le=1)
    t_max: Optional[float] = Field(None, gt=0)
    blow_threshold: float = Field(1e6, gt=0)
    dt_floor: float = Field(1e-12, gt=0)
    sample_stride: float = Field(0.1, gt=0)
    dt_max: Optional[float] = Field(None, gt=0)
    boundary: str = "dirichlet"

    @field_validator("boundary")
    @classmethod
    def _known_boundary(cls, value: str) -> str:
        if value not in BOUNDARY_KINDS:
            raise ValueError(f"boundary must be one of {BOUNDARY_KINDS}")
        return value


class ExperimentSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind = ExperimentKind.SINGLE
    name: str = "experiment"
    values: Tuple[float, ...] = ()
    taus: Tuple[float, ...] = ()
    control_p: Optional[float] = Field(None, gt=1)
    levels: int = Field(3, ge=3)
    check_lambda0: bool = False

    @field_validator("values", "taus", mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        return _float_list(value)


def _strictly_monotone(values: Tuple[float, ...]) -> bool:
    steps = [b - a for a, b in zip(values, values[1:])]
    return all(s > 0 for s in steps) or all(s < 0 for s in steps)


class ExperimentConfig(BaseModel):
    """Fully resolved experiment description"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    problem: ProblemSection = ProblemSection()
    numerics: NumericsSection = NumericsSection()
    experiment: ExperimentSection = ExperimentSection()

    @model_validator(mode="after")
    def _cross_field(self) -> "ExperimentConfig":
        problem, experiment = self.problem, self.experiment
        kind = experiment.kind
        damping = problem.damping_spec()
        problem.wave_model()
        problem.data_spec()
        singular = problem.data == DataFamily.SINGULAR

        if kind in SWEEP_KINDS:
            if len(experiment.values) < 2:
                raise ValueError(f"{kind.value} needs at least two swept values")
            if not _strictly_monotone(experiment.values):
                raise ValueError("experiment.values must be strictly monotone")
        if kind == ExperimentKind.LAMBDA_SWEEP:
            if not singular:
                raise ValueError("lambda_sweep requires problem.data = singular")
            if not problem.nonlinearity_spec().is_focusing_for(problem.sign):
                raise ValueError(f"lambda_sweep requires problem.nonlinearity focusing for "
                                 f"problem.sign={problem.sign:g}, got {problem.nonlinearity.value}")
            if not 1.0 < problem.p <= energy_critical(problem.d):
                raise ValueError(f"lambda_sweep requires 1 < problem.p <= p1={energy_critical(problem.d):g}")
            if problem.k >= problem.d / 2.0:
                raise ValueError(f"lambda_sweep requires problem.k < d/2, got k={problem.k:g}")
        if kind == ExperimentKind.EPS_SWEEP:
            if problem.data != DataFamily.GAUSSIAN:
                raise ValueError("eps_sweep requires problem.data = gaussian")
            if classify_damping(damping) != DampingRegime.OVERDAMPING:
                raise ValueError(f"eps_sweep requires overdamping, problem.damping is {damping.describe()}")
        if kind == ExperimentKind.DELTA_SWEEP:
            if not singular:
                raise ValueError("delta_sweep requires problem.data = singular")
            if problem.d < 3:
                raise ValueError("delta_sweep requires problem.d >= 3")
            if not all(b < a for a, b in zip(experiment.values, experiment.values[1:])):
                raise ValueError("delta_sweep needs strictly decreasing experiment.values")
            if self.numerics.dr > min(experiment.values) / 4.0:
                raise ValueError(f"numerics.dr={self.numerics.dr:g} exceeds min(delta)/4")
            p, k = problem.p, problem.k
            if not (p > energy_critical(problem.d) and (p + 1.0) / (p - 1.0) < k < problem.d / 2.0):
                raise ValueError("delta_sweep requires p > p1 and (p+1)/(p-1) < k < d/2")
        if kind == ExperimentKind.TESTFN_AUDIT:
            if not experiment.taus:
                raise ValueError("testfn_audit requires experiment.taus")
            if self.numerics.sample_stride > min(experiment.taus) / 200.0 * (1.0 + 1e-9):
                raise ValueError("testfn_audit requires numerics.sample_stride <= min(taus)/200")
        if singular and problem.mode == SingularMode.SPLIT and not float(damping.value(0.0)) > 0:
            raise ValueError("split singular data require b(0) > 0")
        return self

    @property
    def horizon(self) -> float:
        if self.numerics.t_max is not None:
            return self.numerics.t_max
        blow_up = self.problem.data == DataFamily.SINGULAR
        return BLOW_UP_HORIZON if blow_up else BOUNDEDNESS_HORIZON

    def solver_config(self) -> SolverConfig:
        n = self.numerics
        return SolverConfig(cfl=n.cfl, blow_threshold=n.blow_threshold, dt_floor=n.dt_floor,
                            t_max=self.horizon, sample_stride=n.sample_stride,
                            dt_max=math.inf if n.dt_max is None else n.dt_max)

    def grid(self, data: Optional[InitialDataSpec] = None) -> RadialGrid:
        """Grid large enough that the boundary stays causally inert until T_max"""
        data = data or self.problem.data_spec()
        grid = RadialGrid.covering(self.problem.d, self.numerics.dr, data.support_radius(),
                                   self.horizon, self.numerics.boundary)
        logger.debug(f"grid for {data.family.value} data: {grid.n_nodes} nodes up to R={grid.radius:g}")
        return grid

    def updated(self, section: str, **changes: Any) -> "ExperimentConfig":
        """Copy with some fields of one section replaced, validated again"""
        payload = self.to_dict()
        payload[section].update(changes)
        return build_config(payload)

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        return self.model_dump(mode="json")


def build_config(sections: Dict[str, Dict[str, Any]]) -> ExperimentConfig:
    unknown = set(sections) - set(SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown configuration sections: {sorted(unknown)}")
    try:
        return ExperimentConfig.model_validate(sections)
    except ValidationError as exc:
        fields = ", ".join(".".join(str(part) for part in error["loc"]) or "config" for error in exc.errors())
        raise ConfigurationError(f"invalid configuration ({fields}): {exc}") from exc
    except ParameterRangeError as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from exc


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"unreadable configuration: {exc}") from exc
    return build_config({name: dict(parser.items(name)) for name in parser.sections()})


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
    config = parse_config_text(text)
    logger.info(f"loaded {config.experiment.kind.value} configuration from {path}")
    return config


def environment_defaults() -> Dict[str, Any]:
    """Log level and worker count from the environment (and an optional .env)"""
    load_dotenv()
    jobs = os.environ.get("DAMPED_WAVE_JOBS", "1")
    try:
        jobs_value = max(1, int(jobs))
    except ValueError:
        raise ConfigurationError(f"DAMPED_WAVE_JOBS must be an integer, got '{jobs}'") from None
    return {
        "log_level": os.environ.get("DAMPED_WAVE_LOG_LEVEL", "WARNING").upper(),
        "jobs": jobs_value,
    }
