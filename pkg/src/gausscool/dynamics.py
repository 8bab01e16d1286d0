"""Covariance dynamics of bosonic modes under linear jump operators.

With ``D_C[rho] = 2 C rho C^dag - C^dag C rho - rho C^dag C`` and jumps
``L = u.a + v.a_dag``, the quadrature covariance obeys
``dV/dt = M V + V M^T + D``. Writing ``L = c.r`` with
``c = ((u + v)/2, i(u - v)/2)`` and ``K = sum c c^dag`` gives
``M = -4 Omega Im K`` and ``D = 8 Omega Re K Omega^T``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from gausscool.exceptions import InvalidInput, NoUniqueSteadyState
from gausscool.gaussian import (
    GaussianMap,
    check_covariance,
    covariance_from_map,
    fidelity_with_pure,
    inverse_map,
    physicality_margin,
    symplectic_form,
)
from gausscool.modulation import plan_operator_map

HURWITZ_TOL = 1e-12
LYAPUNOV_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LinearDissipator:
    """Jump operators as rows ``(u | v)`` of length ``2N``; rates are folded into the rows."""

    jump_coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.array(self.jump_coeffs, dtype=complex))
        if c.size == 0 or c.shape[0] == 0:
            raise InvalidInput("a dissipator needs at least one jump operator")
        if c.ndim != 2 or c.shape[1] % 2:
            raise InvalidInput(f"jump rows must have even length 2N, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("jump coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "jump_coeffs", c)

    @property
    def n_modes(self):
        return self.jump_coeffs.shape[1] // 2

    @classmethod
    def from_map(cls, gmap, rates=1.0):
        """One jump ``sqrt(rate_j) (A_j. a + B_j. a_dag)`` per row of the map."""
        rates = np.broadcast_to(np.asarray(rates, dtype=float), (gmap.n_modes,))
        if np.any(rates < 0):
            raise InvalidInput("rates must be nonnegative")
        rows = np.sqrt(rates)[:, None] * np.hstack([gmap.A, gmap.B])
        return cls(rows)

    @classmethod
    def local_loss(cls, kappa, n_modes):
        kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (n_modes,))
        if np.any(kappa < 0):
            raise InvalidInput("kappa must be nonnegative")
        rows = np.hstack([np.diag(np.sqrt(kappa)), np.zeros((n_modes, n_modes))])
        return cls(rows)

    def __add__(self, other):
        if other.n_modes != self.n_modes:
            raise InvalidInput("dissipators act on different numbers of modes")
        return LinearDissipator(np.vstack([self.jump_coeffs, other.jump_coeffs]))


def _quadrature_coeffs(d):
    n = d.n_modes
    u, v = d.jump_coeffs[:, :n], d.jump_coeffs[:, n:]
    return np.hstack([(u + v) / 2, 1j * (u - v) / 2])


def moment_generators(d):
    """Drift ``M`` and diffusion ``D`` of the covariance equation."""
    c = _quadrature_coeffs(d)
    K = c.T @ c.conj()
    Om = symplectic_form(d.n_modes)
    M = -4 * Om @ K.imag
    D = 8 * Om @ K.real @ Om.T
    return M, 0.5 * (D + D.T)


def is_hurwitz(M, tol=HURWITZ_TOL):
    return bool(np.max(np.linalg.eigvals(M).real) < -tol)


def lyapunov_residual(V, M, D):
    return float(np.max(np.abs(M @ V + V @ M.T + D)))


def steady_state_covariance(M, D):
    """Solve ``M V + V M^T + D = 0``.

    Raises:
        NoUniqueSteadyState: if ``M`` is not Hurwitz or the residual exceeds ``1e-10``.
    """
    M = np.asarray(M, dtype=float)
    D = np.asarray(D, dtype=float)
    if not is_hurwitz(M):
        lead = float(np.max(np.linalg.eigvals(M).real))
        raise NoUniqueSteadyState(f"drift is not Hurwitz (largest real part {lead:.3g})")
    V = linalg.solve_continuous_lyapunov(M, -D)
    V = 0.5 * (V + V.T)
    resid = lyapunov_residual(V, M, D)
    if resid > LYAPUNOV_TOL * max(1.0, float(np.max(np.abs(V)))):
        raise NoUniqueSteadyState(f"Lyapunov residual {resid:.3g} too large")
    return V


def evolve_covariance(V0, M, D, t, dt, return_trajectory=False):
    """Integrate the covariance equation with fixed-step RK4.

    Returns:
        ``V(t)``, or ``(times, Vs)`` if ``return_trajectory``.

    Raises:
        InvalidInput: if ``dt <= 0``, ``t < 0`` or ``dt * ||M|| >= 0.1``.
    """
    V = np.array(check_covariance(V0), dtype=float)
    M = np.asarray(M, dtype=float)
    D = np.asarray(D, dtype=float)
    if dt <= 0 or t < 0:
        raise InvalidInput("need dt > 0 and t >= 0")
    if dt * np.linalg.norm(M, 2) >= 0.1:
        raise InvalidInput(f"step dt={dt} too large for drift norm {np.linalg.norm(M, 2):.3g}")

    def f(X):
        return M @ X + X @ M.T + D

    steps = int(np.ceil(t / dt - 1e-12))
    h = t / steps if steps else 0.0
    times, traj = [0.0], [V.copy()]
    for i in range(steps):
        k1 = f(V)
        k2 = f(V + 0.5 * h * k1)
        k3 = f(V + 0.5 * h * k2)
        k4 = f(V + h * k3)
        V = V + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        V = 0.5 * (V + V.T)
        if return_trajectory:
            times.append((i + 1) * h)
            traj.append(V.copy())
    if return_trajectory:
        return np.array(times), np.array(traj)
    return V


def dark_state_covariance(gmap):
    """Covariance of the common vacuum of the operators ``A a + B a_dag``."""
    return covariance_from_map(inverse_map(gmap))


def cooling_operators(state_map):
    """Map whose rows, used as jumps, cool into ``covariance_from_map(state_map)``."""
    return inverse_map(state_map)


def cooling_dissipator(engineered_map, rates, kappa=0.0):
    """Engineered jumps at ``rates`` plus local loss ``kappa`` (scalar or per mode)."""
    d = LinearDissipator.from_map(engineered_map, rates)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (engineered_map.n_modes,))
    if np.any(kappa > 0):
        d = d + LinearDissipator.local_loss(kappa, engineered_map.n_modes)
    elif np.any(kappa < 0):
        raise InvalidInput("kappa must be nonnegative")
    return d


def mode_occupations(V, gmap):
    """``<A_j^dag A_j>`` for every row of ``gmap`` in the Gaussian state ``V``."""
    n = gmap.n_modes
    c = _quadrature_coeffs(LinearDissipator(np.hstack([gmap.A, gmap.B])))
    # <r_m r_n> = (V + i Omega)_mn
    S = np.asarray(V) + 1j * symplectic_form(n)
    occ = np.einsum("jm,mn,jn->j", c.conj(), S, c)
    return occ.real


@dataclass(frozen=True, eq=False)
class CoolingReport:
    covariance: np.ndarray
    dark_state: np.ndarray
    fidelity: float
    occupations: np.ndarray
    rates: np.ndarray
    cooperativities: np.ndarray
    residual: float
    physicality_margin: float


def cooled_state(engineered_map, rates, kappa=0.0):
    """Steady state of engineered cooling plus local loss, compared with the dark state."""
    rates = np.broadcast_to(np.asarray(rates, dtype=float), (engineered_map.n_modes,))
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (engineered_map.n_modes,))
    M, D = moment_generators(cooling_dissipator(engineered_map, rates, kappa))
    V = steady_state_covariance(M, D)
    dark = dark_state_covariance(engineered_map)
    with np.errstate(divide="ignore"):
        coop = np.where(kappa > 0, rates / np.where(kappa > 0, kappa, 1.0), np.inf)
    return CoolingReport(
        V, dark, fidelity_with_pure(dark, V),
        mode_occupations(V, engineered_map), rates.copy(), coop,
        lyapunov_residual(V, M, D), physicality_margin(V),
    )


def cooled_state_report(plan, target, hw):
    """Steady state reached by a modulation plan on given hardware.

    The jump rows are ``sqrt(|gbar_j|^2/gamma_j) A_j`` with ``A_j`` the rows of
    the map the plan engineers, plus ``sqrt(kappa_j) a_j``. ``target`` is the
    map whose rows the plan was synthesized from.
    """
    if not isinstance(target, GaussianMap) or target.n_modes != plan.n_modes:
        raise InvalidInput("target must be a GaussianMap matching the plan")
    engineered = plan_operator_map(plan)
    if np.max(np.abs(engineered.A - target.A)) > 1e-9 or np.max(np.abs(engineered.B - target.B)) > 1e-9:
        raise InvalidInput("plan does not engineer the given target")
    rates = np.abs(plan.gbar) ** 2 / hw.gamma
    return cooled_state(target, rates, hw.kappa)
