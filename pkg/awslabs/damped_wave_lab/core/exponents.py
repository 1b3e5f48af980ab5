#!/usr/bin/env python3
# exponents.py
"""
Critical exponents and damping regimes
Energy-critical, Fujita and Strauss exponents, the regime of a damping coefficient
and the outcome the theory predicts for a configuration
"""

import math
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict

from .errors import ParameterRangeError
from .model import (
    DampingFamily,
    DampingSpec,
    DataFamily,
    InitialDataSpec,
    NonlinearitySpec,
)

# Gaussian data at or below this amplitude count as small
SMALL_DATA_AMPLITUDE = 0.1


class DampingRegime(str, Enum):
    UNDAMPED = "undamped"
    EFFECTIVE = "effective"
    SCALE_INVARIANT = "scale_invariant"
    WEAK_DECAY = "weak_decay"
    OVERDAMPING = "overdamping"


class Prediction(str, Enum):
    SMALL_DATA_GLOBAL = "small_data_global"
    BLOW_UP_EXPECTED = "blow_up_expected"
    NON_EXISTENCE = "non_existence"
    OUTSIDE_THEORY = "outside_theory"


class ExponentTag(str, Enum):
    LITERATURE = "literature"
    CONJECTURE = "conjecture"
    NONE = "none"


def energy_critical(d: int) -> float:
    """p1 = 1 + 4/(d-2) for d >= 3, infinite for d = 1, 2"""
    if d < 1:
        raise ParameterRangeError(f"dimension must be >= 1, got {d}")
    return 1.0 + 4.0 / (d - 2) if d >= 3 else math.inf


def fujita(d: int) -> float:
    if d < 1:
        raise ParameterRangeError(f"dimension must be >= 1, got {d}")
    return 1.0 + 2.0 / d


def strauss_residual(d: int, p: float) -> float:
    return (d - 1) * p * p - (d + 1) * p - 2.0


def strauss(d: int) -> Tuple[float, float]:
    """Positive root of (d-1)p^2 - (d+1)p - 2 = 0 and the quadratic residual at it"""
    if d < 2:
        raise ParameterRangeError(f"Strauss exponent needs d >= 2, got {d}")
    p = (d + 1 + math.sqrt(d * d + 10 * d - 7)) / (2.0 * (d - 1))
    return p, strauss_residual(d, p)


def classify_damping(spec: DampingSpec) -> DampingRegime:
    if spec.family == DampingFamily.ZERO:
        return DampingRegime.UNDAMPED
    if spec.family == DampingFamily.EXPONENTIAL:
        return DampingRegime.OVERDAMPING
    beta = 0.0 if spec.family == DampingFamily.CONSTANT else spec.beta
    if beta < -1.0:
        return DampingRegime.OVERDAMPING
    if beta < 1.0:
        return DampingRegime.EFFECTIVE
    if beta == 1.0:
        return DampingRegime.SCALE_INVARIANT
    return DampingRegime.WEAK_DECAY


def critical_exponent(regime: DampingRegime, d: int) -> Tuple[Optional[float], ExponentTag]:
    """Known or expected small-data critical exponent of a regime, with its provenance tag"""
    if regime == DampingRegime.EFFECTIVE:
        return fujita(d), ExponentTag.LITERATURE
    if regime in (DampingRegime.UNDAMPED, DampingRegime.WEAK_DECAY) and d >= 2:
        tag = ExponentTag.LITERATURE if regime == DampingRegime.UNDAMPED else ExponentTag.CONJECTURE
        return strauss(d)[0], tag
    # scale-invariant thresholds depend on mu; overdamping has no threshold
    return None, ExponentTag.NONE


def lifespan_upper_exponent(p: float, k: float) -> float:
    """Exponent of lambda in the lifespan upper bound T+ <= C lambda^e"""
    if not p > 1:
        raise ParameterRangeError(f"lifespan exponent needs p > 1, got {p}")
    ceiling = (p + 1.0) / (p - 1.0)
    if k >= ceiling:
        raise ParameterRangeError(
            f"k={k:g} >= (p+1)/(p-1)={ceiling:g}: the lifespan bound is void")
    return -1.0 / (ceiling - k)


def _is_small(data: InitialDataSpec, threshold: float) -> bool:
    return abs(data.amplitude) <= threshold and abs(data.velocity_amplitude) <= threshold


def predict_outcome(d: int, p: float, spec: DampingSpec, data: InitialDataSpec,
                    nonlinearity: Optional[NonlinearitySpec] = None,
                    small_amplitude: float = SMALL_DATA_AMPLITUDE) -> Prediction:
    """Outcome predicted by the theory; without a nonlinearity the sign is taken as focusing"""
    p1 = energy_critical(d)
    if nonlinearity is None:
        focusing = True
    else:
        focusing = nonlinearity.is_focusing_for(data.sign)

    if data.family == DataFamily.GAUSSIAN:
        if classify_damping(spec) == DampingRegime.OVERDAMPING and 1.0 <= p < p1 \
                and _is_small(data, small_amplitude):
            return Prediction.SMALL_DATA_GLOBAL
        return Prediction.OUTSIDE_THEORY

    k = data.k
    if k < d / 2.0 and 1.0 < p <= p1 and focusing:
        return Prediction.BLOW_UP_EXPECTED
    if d >= 3 and p > p1 and (p + 1.0) / (p - 1.0) < k < d / 2.0:
        return Prediction.NON_EXISTENCE
    return Prediction.OUTSIDE_THEORY


def _finite_or_label(value: float) -> Any:
    return "inf" if math.isinf(value) else value


class ExponentReport(BaseModel):
    """Exponents, regime and prediction emitted by `classify`"""

    model_config = ConfigDict(frozen=True)

    d: int
    p: Optional[float] = None
    p1: float
    pF: float
    pS: Optional[float] = None
    pS_residual: Optional[float] = None
    regime: DampingRegime
    pc: Optional[float] = None
    pc_tag: ExponentTag = ExponentTag.NONE
    prediction: Optional[Prediction] = None

    def to_dict(self) -> Dict[str, Any]:
        payload = self.model_dump(mode="json")
        payload["p1"] = _finite_or_label(self.p1)
        return payload


def exponent_report(d: int, damping: DampingSpec, p: Optional[float] = None,
                    data: Optional[InitialDataSpec] = None,
                    nonlinearity: Optional[NonlinearitySpec] = None) -> ExponentReport:
    regime = classify_damping(damping)
    ps, residual = strauss(d) if d >= 2 else (None, None)
    pc, tag = critical_exponent(regime, d)
    prediction = None
    if p is not None:
        if data is None:
            data = InitialDataSpec(d=d)
        prediction = predict_outcome(d, p, damping, data, nonlinearity)
    report = ExponentReport(d=d, p=p, p1=energy_critical(d), pF=fujita(d), pS=ps,
                            pS_residual=residual, regime=regime, pc=pc, pc_tag=tag,
                            prediction=prediction)
    logger.debug(f"classified {damping.describe()} in d={d}: {regime.value}, prediction={prediction}")
    return report
