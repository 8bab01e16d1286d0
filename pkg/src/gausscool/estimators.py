"""Estimator-style wrappers around synthesis, auditing and cooling.

They follow the scikit-learn conventions (constructor stores parameters,
``fit`` learns trailing-underscore attributes, ``get_params``/``set_params``
come from ``BaseEstimator``) so they compose with parameter grids.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from gausscool.dynamics import cooled_state
from gausscool.exceptions import InvalidInput
from gausscool.gaussian import (
    GaussianMap,
    covariance_from_map,
    fidelity_with_pure,
    validate_gaussian_map,
)
from gausscool.modulation import HardwareSpec, plan_operator_map, synthesize_plan
from gausscool.resonances import audit_plan, corrected_map


def check_gaussian_map(target):
    """Coerce ``target`` to a valid GaussianMap or raise InvalidInput."""
    if isinstance(target, tuple) and len(target) == 2:
        target = GaussianMap(*target)
    if not isinstance(target, GaussianMap):
        raise InvalidInput(f"expected a GaussianMap or an (A, B) pair, got {type(target).__name__}")
    report = validate_gaussian_map(target)
    if not report.passed:
        raise InvalidInput(
            f"target violates the map constraints by {max(report.symmetric_violation, report.normalization_violation):.3g}"
        )
    return target


def check_hardware(hw, n_modes=None):
    if not isinstance(hw, HardwareSpec):
        raise InvalidInput(f"expected a HardwareSpec, got {type(hw).__name__}")
    if n_modes is not None and hw.n_modes != n_modes:
        raise InvalidInput(f"hardware has {hw.n_modes} modes, target has {n_modes}")
    return hw


class ModulationSynthesizer(BaseEstimator):
    """Fit a tone table to a target map on fixed hardware.

    ``predict`` returns the map actually engineered once the unavoidable
    third-order terms are included; ``score`` is the fidelity between the
    corresponding states.
    """

    def __init__(self, hardware=None, eta_pivot=0.05, mode="cooling", pivot=None):
        self.hardware = hardware
        self.eta_pivot = eta_pivot
        self.mode = mode
        self.pivot = pivot

    def fit(self, target, y=None):
        target = check_gaussian_map(target)
        hw = check_hardware(self.hardware, target.n_modes)
        self.plan_ = synthesize_plan(target, hw, self.eta_pivot, self.mode, self.pivot)
        self.gbar_ = self.plan_.gbar
        self.target_ = target
        self.n_modes_ = target.n_modes
        return self

    def transform(self, target=None):
        """First-order engineered map."""
        check_is_fitted(self, "plan_")
        return plan_operator_map(self.plan_)

    def predict(self, target=None):
        check_is_fitted(self, "plan_")
        return corrected_map(self.plan_, self.hardware).map

    def score(self, target=None, y=None):
        check_is_fitted(self, "plan_")
        reference = self.target_ if target is None else check_gaussian_map(target)
        return audit_plan(self.plan_, self.hardware, reference=reference).fidelity


class CoolingSimulator(BaseEstimator):
    """Steady state of engineered cooling with local loss.

    ``fit`` takes the map whose rows act as jump operators, ``predict``
    returns the steady covariance and ``score`` the fidelity with the
    dark state of those jumps.
    """

    def __init__(self, rates=1.0, kappa=0.0):
        self.rates = rates
        self.kappa = kappa

    def fit(self, engineered_map, y=None):
        engineered_map = check_gaussian_map(engineered_map)
        self.report_ = cooled_state(engineered_map, self.rates, self.kappa)
        self.covariance_ = self.report_.covariance
        self.occupations_ = self.report_.occupations
        return self

    def predict(self, X=None):
        check_is_fitted(self, "report_")
        return self.covariance_

    def score(self, X=None, y=None):
        check_is_fitted(self, "report_")
        if X is None:
            return self.report_.fidelity
        V = covariance_from_map(check_gaussian_map(X)) if not isinstance(X, np.ndarray) else X
        return fidelity_with_pure(V, self.covariance_)
