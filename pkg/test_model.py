#!/usr/bin/env python3
"""
Tests for the problem data: damping families, nonlinearities, initial data
"""

import math
import os
import sys

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad

sys.path.append(os.path.dirname(__file__))

from awslabs.damped_wave_lab.core.errors import ParameterRangeError, ResolutionError
from awslabs.damped_wave_lab.core.grid import RadialGrid
from awslabs.damped_wave_lab.core.model import (
    DIVERGENT,
    DampingFamily,
    DampingSpec,
    DataFamily,
    InitialDataSpec,
    NonlinearityKind,
    NonlinearitySpec,
    SingularMode,
    cutoff,
    damping_inverse_integral,
    damping_value,
    lipschitz_check,
    nonlinearity_eval,
    nonlinearity_primitive,
    sample_initial_data,
    smooth_step,
)


DAMPINGS = [
    "constant:mu=2",
    "power:mu=1,beta=-2",
    "power:mu=0.5,beta=0.5",
    "power:mu=1,beta=1",
    "exponential:mu=1,a=0.5",
]


# ---------------------------------------------------------------------------
# Damping
# ---------------------------------------------------------------------------

def test_parse_maps_short_keys():
    spec = DampingSpec.parse("exponential:mu=2,a=3")
    assert spec.family == DampingFamily.EXPONENTIAL
    assert spec.mu == 2.0 and spec.rate == 3.0


def test_parse_rejects_bare_token():
    with pytest.raises(ParameterRangeError):
        DampingSpec.parse("power:mu")


def test_damping_rejects_nonpositive_mu():
    with pytest.raises(ValidationError):
        DampingSpec(family=DampingFamily.POWER, mu=0.0)


def test_damping_value_families():
    assert damping_value(DampingSpec.parse("constant:mu=2"), 5.0) == 2.0
    assert damping_value(DampingSpec.parse("power:mu=1,beta=-2"), 1.0) == pytest.approx(4.0)
    assert damping_value(DampingSpec.parse("exponential:mu=1,a=1"), 1.0) == pytest.approx(math.e)
    assert damping_value(DampingSpec(family=DampingFamily.ZERO), 3.0) == 0.0


def test_damping_rejects_negative_time():
    with pytest.raises(ParameterRangeError):
        DampingSpec().value(-1.0)


@pytest.mark.parametrize("text", DAMPINGS)
def test_cumulative_matches_quadrature(text):
    spec = DampingSpec.parse(text)
    expected, _ = quad(lambda s: float(spec.value(s)), 0.0, 3.0)
    assert float(spec.cumulative(3.0)) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("text", DAMPINGS)
def test_increment_is_additive(text):
    spec = DampingSpec.parse(text)
    whole = float(spec.cumulative(2.5))
    split = float(spec.cumulative(1.0)) + float(spec.increment(1.0, 1.5))
    assert split == pytest.approx(whole, rel=1e-12)


def test_increment_small_step_has_no_cancellation():
    spec = DampingSpec.parse("power:mu=1,beta=-2")
    h = 1e-12
    assert float(spec.increment(3.0, h)) == pytest.approx(16.0 * h, rel=1e-9)


@pytest.mark.parametrize("text", DAMPINGS)
def test_inverse_integral_matches_quadrature_on_finite_horizon(text):
    spec = DampingSpec.parse(text)
    expected, _ = quad(lambda s: 1.0 / float(spec.value(s)), 0.0, 4.0)
    assert damping_inverse_integral(spec, 4.0) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("text, expected", [
    ("power:mu=1,beta=-2", 1.0),          # integral of (1+t)^-2
    ("power:mu=2,beta=-3", 0.25),
    ("exponential:mu=1,a=2", 0.5),
])
def test_inverse_integral_converges_for_overdamping(text, expected):
    assert DampingSpec.parse(text).inverse_integral(math.inf) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["constant:mu=1", "power:mu=1,beta=-1", "power:mu=1,beta=0.5", "zero"])
def test_inverse_integral_diverges_otherwise(text):
    assert DampingSpec.parse(text).inverse_integral(math.inf) == DIVERGENT


def test_inverse_integral_rejects_bad_limits():
    spec = DampingSpec()
    with pytest.raises(ParameterRangeError):
        spec.inverse_integral(0.0)
    with pytest.raises(ParameterRangeError):
        spec.inverse_integral(1.0, start=2.0)


def test_sup_norms_use_endpoints():
    spec = DampingSpec.parse("power:mu=1,beta=-2")
    assert spec.sup_norm(2.0) == pytest.approx(9.0)
    assert spec.derivative_sup_norm(2.0) == pytest.approx(6.0)


# ---------------------------------------------------------------------------
# Smooth cutoff
# ---------------------------------------------------------------------------

def test_smooth_step_limits_and_symmetry():
    x = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    value, _, _ = smooth_step(x)
    assert value.tolist() == pytest.approx([0.0, 0.0, 0.5, 1.0, 1.0])
    y = np.linspace(0.05, 0.95, 19)
    assert smooth_step(y)[0] + smooth_step(1.0 - y)[0] == pytest.approx(np.ones_like(y))


def test_smooth_step_derivatives_match_finite_differences():
    x = np.linspace(0.1, 0.9, 9)
    h = 1e-5
    value, first, second = smooth_step(x)
    plus, minus = smooth_step(x + h)[0], smooth_step(x - h)[0]
    assert first == pytest.approx((plus - minus) / (2 * h), rel=1e-6, abs=1e-8)
    assert second == pytest.approx((plus - 2 * value + minus) / h ** 2, rel=1e-4, abs=1e-5)


def test_cutoff_plateau_and_support():
    assert cutoff(np.array([0.0, 0.5, 1.0])) == pytest.approx([1.0, 1.0, 1.0])
    assert cutoff(np.array([2.0, 3.0])) == pytest.approx([0.0, 0.0])


# ---------------------------------------------------------------------------
# Nonlinearity
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind, z, expected", [
    (NonlinearityKind.POWER_ABS_PLUS, -2.0, 8.0),
    (NonlinearityKind.POWER_ABS_MINUS, -2.0, -8.0),
    (NonlinearityKind.POWER_SIGNED_PLUS, -2.0, -8.0),
    (NonlinearityKind.POWER_SIGNED_MINUS, -2.0, 8.0),
    (NonlinearityKind.ZERO, -2.0, 0.0),
])
def test_power_families(kind, z, expected):
    spec = NonlinearitySpec(kind=kind, p=3.0)
    assert float(nonlinearity_eval(spec, z)) == pytest.approx(expected)


@pytest.mark.parametrize("kind", list(NonlinearityKind))
def test_primitive_differentiates_to_nonlinearity(kind):
    spec = NonlinearitySpec(kind=kind, p=2.5, q1=2.0, q2=1.5, coef1=0.7, coef2=-0.3)
    z = np.linspace(-1.5, 1.5, 13)
    h = 1e-6
    slope = (nonlinearity_primitive(spec, z + h) - nonlinearity_primitive(spec, z - h)) / (2 * h)
    assert slope == pytest.approx(spec.evaluate(z), rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("kind", list(NonlinearityKind))
def test_derivative_matches_finite_differences(kind):
    spec = NonlinearitySpec(kind=kind, p=3.0, q1=2.0, q2=3.0, coef1=1.0, coef2=0.5)
    z = np.array([-1.3, -0.4, 0.6, 1.1])
    h = 1e-6
    slope = (spec.evaluate(z + h) - spec.evaluate(z - h)) / (2 * h)
    assert spec.derivative(z) == pytest.approx(slope, rel=1e-6)


def test_linear_combination_takes_largest_exponent():
    spec = NonlinearitySpec(kind=NonlinearityKind.LINEAR_COMBINATION, q1=2.0, q2=3.5, coef1=1.0, coef2=-2.0)
    assert spec.p == 3.5
    assert spec.lipschitz_constant == pytest.approx(2.0 + 7.0)


def test_defocusing_flags():
    assert NonlinearitySpec(kind=NonlinearityKind.POWER_SIGNED_MINUS).is_defocusing
    assert NonlinearitySpec(kind=NonlinearityKind.ZERO).is_defocusing
    assert not NonlinearitySpec(kind=NonlinearityKind.POWER_ABS_MINUS).is_defocusing
    assert not NonlinearitySpec(kind=NonlinearityKind.POWER_SIGNED_PLUS).is_defocusing


def test_focusing_follows_data_sign():
    plus = NonlinearitySpec(kind=NonlinearityKind.POWER_ABS_PLUS)
    minus = NonlinearitySpec(kind=NonlinearityKind.POWER_ABS_MINUS)
    assert plus.is_focusing_for(1.0) and not plus.is_focusing_for(-1.0)
    assert minus.is_focusing_for(-1.0)


@pytest.mark.parametrize("kind", [NonlinearityKind.POWER_ABS_PLUS, NonlinearityKind.POWER_SIGNED_MINUS])
@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 5.0])
def test_lipschitz_check_passes_with_default_constant(kind, p):
    report = lipschitz_check(NonlinearitySpec(kind=kind, p=p), 10.0, 41)
    assert report.passed
    assert report.worst_ratio <= report.constant


def test_lipschitz_check_fails_with_too_small_constant():
    report = lipschitz_check(NonlinearitySpec(p=3.0, c_n=0.5), 10.0, 41)
    assert not report.passed


def test_lipschitz_check_rejects_bad_grid():
    with pytest.raises(ParameterRangeError):
        lipschitz_check(NonlinearitySpec(), 0.0, 10)
    with pytest.raises(ParameterRangeError):
        lipschitz_check(NonlinearitySpec(), 1.0, 1)


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

@pytest.fixture
def grid():
    return RadialGrid(d=3, dr=0.01, n_nodes=300)


def test_gaussian_data(grid):
    spec = InitialDataSpec(d=3, amplitude=0.5, velocity_amplitude=0.25, width=2.0)
    state = sample_initial_data(spec, grid)
    expected = np.exp(-(grid.nodes / 2.0) ** 2)
    assert state.u == pytest.approx(0.5 * expected)
    assert state.w == pytest.approx(0.25 * expected)


def test_singular_data_capped_and_cut_off(grid):
    spec = InitialDataSpec(family=DataFamily.SINGULAR, d=3, lam=2.0, k=1.0, delta=0.05)
    state = sample_initial_data(spec, grid)
    r = grid.nodes
    assert np.all(state.u == 0.0)
    core = r < 0.05
    assert state.w[core] == pytest.approx(2.0 * 0.05 ** -1.0)
    middle = (r > 0.05) & (r < 1.0)
    assert state.w[middle] == pytest.approx(2.0 / r[middle])
    assert np.all(state.w[r >= 2.0] == 0.0)


def test_singular_split_mode_uses_initial_damping(grid):
    spec = InitialDataSpec(family=DataFamily.SINGULAR, d=3, lam=1.0, k=1.0, delta=0.05,
                           mode=SingularMode.SPLIT)
    damping = DampingSpec.parse("constant:mu=2")
    state = sample_initial_data(spec, grid, damping)
    profile = spec.singular_profile(grid.nodes)
    assert state.w == pytest.approx(profile / 2.0)
    assert state.u == pytest.approx(profile / 4.0)
    with pytest.raises(ParameterRangeError):
        sample_initial_data(spec, grid, DampingSpec(family=DampingFamily.ZERO))


def test_negative_sign_flips_profile(grid):
    spec = InitialDataSpec(family=DataFamily.SINGULAR, d=3, delta=0.05, sign=-1.0)
    assert np.all(sample_initial_data(spec, grid).w <= 0.0)
    with pytest.raises(ValidationError):
        InitialDataSpec(sign=0.5)


def test_cap_below_grid_spacing_is_rejected(grid):
    spec = InitialDataSpec(family=DataFamily.SINGULAR, d=3, delta=0.001)
    with pytest.raises(ResolutionError):
        sample_initial_data(spec, grid)


def test_dimension_mismatch_is_rejected(grid):
    with pytest.raises(ParameterRangeError):
        sample_initial_data(InitialDataSpec(d=2), grid)


def test_support_radius():
    assert InitialDataSpec(family=DataFamily.SINGULAR).support_radius() == 2.0
    gaussian = InitialDataSpec(width=1.0)
    assert math.exp(-gaussian.support_radius() ** 2) == pytest.approx(1e-16)
