import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausscool.exceptions import AmplitudeOverflow, InvalidInput, SynthesisInfeasible
from gausscool.gaussian import identity_map
from gausscool.modulation import (
    AmplitudeWarning,
    HardwareSpec,
    cooling_rates,
    effective_coupling_from_amplitudes,
    ghz_plan_closed_form,
    modulation_frequencies,
    plan_correspondence,
    plan_operator_map,
    synthesize_plan,
)
from gausscool.states import GhzSpec, ghz_map, random_gaussian_map


def hw_for(n, g=40.0, kappa=0.0):
    return HardwareSpec.equally_spaced(n, 10000.0, 4500.0, 400.0, g, 1.0, kappa)


def test_frequencies():
    hw = HardwareSpec([4500.0], [10000.0], 40.0, 1.0)
    assert np.allclose(modulation_frequencies(hw), [[5500.0, 14500.0]])
    tones = modulation_frequencies(hw_for(2))
    assert len(np.unique(tones[0])) == 4


def test_hardware_validation_and_diagnostics():
    with pytest.raises(InvalidInput):
        HardwareSpec([1.0, 2.0], [3.0, 4.0], 1.0, [1.0, -1.0])
    with pytest.raises(InvalidInput):
        HardwareSpec([1.0], [3.0], 1.0, 1.0, kappa=-1)
    assert hw_for(3).diagnostics() == []
    bad = HardwareSpec([1000.0, 1000.0], [1100.0, 5000.0], 40.0, 1.0)
    issues = bad.diagnostics()
    assert any("distinct" in s for s in issues)
    assert any("below" in s for s in issues)


def test_identity_target():
    plan = synthesize_plan(identity_map(3), hw_for(3), 0.05)
    n = 3
    assert np.allclose(plan.eta[:, :n], 0.05 * np.eye(n))
    assert np.allclose(plan.eta[:, n:], 0)
    assert np.allclose(plan.gbar, 40 * 0.05)


def test_ghz_largest_amplitude():
    n, eta = 5, 0.02
    plan = synthesize_plan(ghz_map(GhzSpec(n, 0.7, 0.7)), hw_for(n), eta, pivot=0)
    assert plan.eta[0, 1] == pytest.approx(np.sqrt(n - 1) * eta, rel=1e-12)
    assert plan.eta_max == pytest.approx(plan.eta[0, 1])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31), st.sampled_from(["cooling", "lasing"]))
def test_round_trip(n, seed, mode):
    target = random_gaussian_map(n, seed, max_squeezing=0.5)
    rng = np.random.default_rng(seed)
    g = rng.uniform(20, 60, (n, n)) * rng.choice([-1, 1], (n, n))
    hw = HardwareSpec(4500 - 400 * np.arange(n), 10000 - 400 * np.arange(n), g, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmplitudeWarning)
        try:
            plan = synthesize_plan(target, hw, 0.01, mode=mode)
        except (AmplitudeOverflow, SynthesisInfeasible):
            return
    engineered = plan_operator_map(plan)
    assert np.allclose(engineered.A, target.A, atol=1e-12)
    assert np.allclose(engineered.B, target.B, atol=1e-12)
    red, blue = plan_correspondence(plan)
    if mode == "lasing":
        assert np.allclose(red, target.B.conj(), atol=1e-12)
    assert np.allclose(effective_coupling_from_amplitudes(plan), np.abs(plan.gbar), rtol=1e-12)
    assert np.all((plan.phi >= 0) & (plan.phi < 2 * np.pi))


def test_scaling_eta_pivot():
    target = ghz_map(GhzSpec(4, 0.5, 0.2))
    a = synthesize_plan(target, hw_for(4), 0.01)
    b = synthesize_plan(target, hw_for(4), 0.03)
    assert np.allclose(b.eta, 3 * a.eta, rtol=1e-13)
    assert np.allclose(b.gbar, 3 * a.gbar, rtol=1e-13)
    assert np.allclose(b.phi, a.phi, atol=1e-13)


def test_zero_coupling_is_infeasible():
    g = np.full((2, 2), 40.0)
    g[0, 1] = 0.0
    hw = HardwareSpec([4500.0, 4100.0], [10000.0, 9600.0], g, 1.0)
    with pytest.raises(SynthesisInfeasible, match=r"j=0, m=1"):
        synthesize_plan(ghz_map(GhzSpec(2, 0.3, 0.3)), hw, 0.05)


def test_amplitude_limits():
    target = ghz_map(GhzSpec(6, 0.0, 1.0))
    with pytest.warns(AmplitudeWarning):
        synthesize_plan(target, hw_for(6), 0.1, pivot=0)
    with pytest.raises(AmplitudeOverflow) as err:
        synthesize_plan(target, hw_for(6), 0.3, pivot=0)
    assert err.value.value >= 1
    with pytest.raises(InvalidInput):
        synthesize_plan(target, hw_for(6), 0.5)


def test_closed_form_structure():
    n, eta1, r = 5, 0.02, 0.6
    spec = GhzSpec(n, r, 0.3)
    plan = ghz_plan_closed_form(spec, hw_for(n), eta1)
    for j in range(n):
        assert np.all(plan.eta[j, j + 2:n] == 0)
    assert np.allclose(plan.eta[:, n] / plan.eta[:, 0], np.tanh(r))
    assert np.allclose(plan.phi[:, 0], np.pi)
    with pytest.raises(InvalidInput):
        g = np.full((n, n), 40.0)
        g[0, 0] = 41.0
        ghz_plan_closed_form(spec, HardwareSpec(hw_for(n).omega, hw_for(n).epsilon, g, 1.0), eta1)


def test_cooling_rates():
    n = 4
    spec = GhzSpec(n, 0.0, 0.0)
    plan = synthesize_plan(ghz_map(spec), hw_for(n, kappa=0.0), 0.05, pivot=0)
    rates = cooling_rates(plan, hw_for(n))
    assert np.allclose(rates.rates, (np.sqrt(4) * 0.05 * 40) ** 2)
    assert np.all(np.isinf(rates.cooperativities)) and rates.flagged == ()
    hw2 = HardwareSpec(hw_for(n).omega, hw_for(n).epsilon, 40.0, 2.0, kappa=1.0)
    r2 = cooling_rates(plan, hw2, threshold=5)
    assert np.allclose(r2.rates, rates.rates / 2)
    assert np.allclose(r2.cooperativities, 8.0)
    assert r2.flagged == ()
    assert cooling_rates(plan, hw2, threshold=10).flagged == (0, 1, 2, 3)
