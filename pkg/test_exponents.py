#!/usr/bin/env python3
"""
Tests for critical exponents, damping regimes and predictions
"""

import math
import os
import sys

import pytest

sys.path.append(os.path.dirname(__file__))

from awslabs.damped_wave_lab.core.errors import ParameterRangeError
from awslabs.damped_wave_lab.core.exponents import (
    DampingRegime,
    ExponentTag,
    Prediction,
    classify_damping,
    critical_exponent,
    energy_critical,
    exponent_report,
    fujita,
    lifespan_upper_exponent,
    predict_outcome,
    strauss,
)
from awslabs.damped_wave_lab.core.model import (
    DampingSpec,
    DataFamily,
    InitialDataSpec,
    NonlinearityKind,
    NonlinearitySpec,
)


def test_energy_critical_golden_values():
    assert energy_critical(3) == 5.0
    assert energy_critical(4) == 3.0
    assert math.isinf(energy_critical(1))
    assert math.isinf(energy_critical(2))


@pytest.mark.parametrize("d", range(1, 7))
def test_fujita(d):
    assert fujita(d) == pytest.approx(1.0 + 2.0 / d)


def test_strauss_golden_values():
    p3, residual3 = strauss(3)
    p2, residual2 = strauss(2)
    assert p3 == pytest.approx(1.0 + math.sqrt(2.0), rel=1e-14)
    assert p2 == pytest.approx((3.0 + math.sqrt(17.0)) / 2.0, rel=1e-14)
    assert abs(residual3) <= 1e-12
    assert abs(residual2) <= 1e-12


@pytest.mark.parametrize("d", range(3, 21))
def test_exponent_ordering(d):
    assert fujita(d) < strauss(d)[0] < energy_critical(d)


def test_strauss_rejects_one_dimension():
    with pytest.raises(ParameterRangeError):
        strauss(1)


def test_dimension_must_be_positive():
    with pytest.raises(ParameterRangeError):
        energy_critical(0)
    with pytest.raises(ParameterRangeError):
        fujita(0)


@pytest.mark.parametrize("text, regime", [
    ("zero", DampingRegime.UNDAMPED),
    ("constant:mu=1", DampingRegime.EFFECTIVE),
    ("power:mu=1,beta=0.5", DampingRegime.EFFECTIVE),
    ("power:mu=1,beta=-1", DampingRegime.EFFECTIVE),
    ("power:mu=2,beta=1", DampingRegime.SCALE_INVARIANT),
    ("power:mu=1,beta=2", DampingRegime.WEAK_DECAY),
    ("power:mu=1,beta=-2", DampingRegime.OVERDAMPING),
    ("exponential:mu=1,a=1", DampingRegime.OVERDAMPING),
])
def test_classify_damping(text, regime):
    assert classify_damping(DampingSpec.parse(text)) == regime


def test_critical_exponent_tags():
    assert critical_exponent(DampingRegime.EFFECTIVE, 3) == (pytest.approx(fujita(3)), ExponentTag.LITERATURE)
    assert critical_exponent(DampingRegime.UNDAMPED, 3)[1] == ExponentTag.LITERATURE
    assert critical_exponent(DampingRegime.WEAK_DECAY, 3)[1] == ExponentTag.CONJECTURE
    assert critical_exponent(DampingRegime.SCALE_INVARIANT, 3) == (None, ExponentTag.NONE)
    assert critical_exponent(DampingRegime.OVERDAMPING, 3) == (None, ExponentTag.NONE)


def test_lifespan_upper_exponent():
    # p = 3: (p+1)/(p-1) = 2
    assert lifespan_upper_exponent(3.0, 1.0) == pytest.approx(-1.0)
    assert lifespan_upper_exponent(3.0, 0.0) == pytest.approx(-0.5)
    with pytest.raises(ParameterRangeError):
        lifespan_upper_exponent(3.0, 2.0)
    with pytest.raises(ParameterRangeError):
        lifespan_upper_exponent(1.0, 0.5)


OVERDAMPING = DampingSpec.parse("power:mu=1,beta=-2")
CONSTANT = DampingSpec.parse("constant:mu=1")


def test_small_gaussian_data_under_overdamping():
    data = InitialDataSpec(d=3, amplitude=1e-3)
    assert predict_outcome(3, 3.0, OVERDAMPING, data) == Prediction.SMALL_DATA_GLOBAL
    large = InitialDataSpec(d=3, amplitude=10.0)
    assert predict_outcome(3, 3.0, OVERDAMPING, large) == Prediction.OUTSIDE_THEORY
    assert predict_outcome(3, 5.0, OVERDAMPING, data) == Prediction.OUTSIDE_THEORY
    assert predict_outcome(3, 3.0, CONSTANT, data) == Prediction.OUTSIDE_THEORY


def test_singular_data_blow_up_needs_focusing_sign():
    data = InitialDataSpec(family=DataFamily.SINGULAR, d=3, k=1.0)
    focusing = NonlinearitySpec(kind=NonlinearityKind.POWER_ABS_PLUS, p=3.0)
    defocusing = NonlinearitySpec(kind=NonlinearityKind.POWER_SIGNED_MINUS, p=3.0)
    assert predict_outcome(3, 3.0, CONSTANT, data, focusing) == Prediction.BLOW_UP_EXPECTED
    assert predict_outcome(3, 3.0, CONSTANT, data, defocusing) == Prediction.OUTSIDE_THEORY
    flipped = InitialDataSpec(family=DataFamily.SINGULAR, d=3, k=1.0, sign=-1.0)
    assert predict_outcome(3, 3.0, CONSTANT, flipped, focusing) == Prediction.OUTSIDE_THEORY


def test_non_existence_window():
    data = InitialDataSpec(family=DataFamily.SINGULAR, d=3, k=1.4)
    assert predict_outcome(3, 7.0, CONSTANT, data) == Prediction.NON_EXISTENCE
    outside = InitialDataSpec(family=DataFamily.SINGULAR, d=3, k=1.2)
    assert predict_outcome(3, 7.0, CONSTANT, outside) == Prediction.OUTSIDE_THEORY


def test_exponent_report_serializes_infinite_p1():
    report = exponent_report(2, CONSTANT, p=3.0).to_dict()
    assert report["p1"] == "inf"
    assert report["regime"] == "effective"
    assert report["pc"] == pytest.approx(2.0)
    assert report["prediction"] == Prediction.OUTSIDE_THEORY.value


def test_exponent_report_keys():
    report = exponent_report(3, OVERDAMPING).to_dict()
    for key in ("d", "p1", "pF", "pS", "regime", "prediction"):
        assert key in report
    assert report["prediction"] is None
    assert exponent_report(1, OVERDAMPING).pS is None
