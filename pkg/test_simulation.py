#!/usr/bin/env python3
"""
Test runner for the acceptance suite simulation
Runs phases without user interaction
"""

import os
import sys

import pytest

# Add simulation directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), 'simulation'))

from acceptance_suite_simulator import FAST_OVERRIDES, AcceptanceSuiteSimulator, main


@pytest.fixture
def simulator(tmp_path):
    simulator = AcceptanceSuiteSimulator(mode="fast", out_dir=tmp_path)
    # Override wait_for_user to not wait
    simulator.wait_for_user = lambda msg="": print(f"⏭️ Auto-continuing: {msg}")
    return simulator


def test_unknown_mode_is_rejected():
    with pytest.raises(ValueError):
        AcceptanceSuiteSimulator(mode="quick")


def test_exponent_table_phase(simulator):
    assert simulator.verify_exponent_table()
    assert simulator.issues == []


def test_solver_oracle_phase(simulator):
    assert simulator.verify_solver_oracles()
    assert simulator.issues == []


def test_ode_oracle_errors_are_small():
    assert AcceptanceSuiteSimulator.ode_oracle(0.0) <= 1e-6
    assert AcceptanceSuiteSimulator.ode_oracle(1.0) <= 1e-6


@pytest.mark.parametrize("name", sorted(FAST_OVERRIDES))
def test_fast_overrides_produce_valid_configurations(simulator, name):
    config = simulator.load(name)
    for section, changes in FAST_OVERRIDES[name].items():
        values = config.to_dict()[section]
        for key, value in changes.items():
            assert values[key] == value


def test_full_mode_uses_files_as_written(tmp_path):
    full = AcceptanceSuiteSimulator(mode="full", out_dir=tmp_path)
    assert full.load("energy_identity").numerics.t_max == 20.0


@pytest.mark.slow
def test_energy_identity_phase_writes_reports(simulator, tmp_path):
    assert simulator.verify_energy_identity()
    assert (tmp_path / "energy_identity" / "energy_identity_report.json").exists()
    assert simulator.reports["energy_identity"]["passed"]


def test_failing_phase_is_recorded(simulator, monkeypatch):
    def broken():
        raise RuntimeError("phase exploded")

    monkeypatch.setattr(simulator, "phases", lambda: [("Phase X: broken", broken)])
    assert not simulator.run_acceptance_suite()
    assert simulator.phase_results == {"Phase X: broken": False}
    assert "phase exploded" in simulator.issues[0]


@pytest.mark.slow
def test_fast_acceptance_suite(tmp_path):
    """Every phase of the fast suite"""
    assert main(["--mode", "fast", "--out", str(tmp_path)]) == 0
