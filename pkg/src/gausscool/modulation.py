"""Multi-tone qubit modulation plans that engineer a target cooling operator.

Each qubit ``j`` is driven with ``2N`` tones. Tone ``l`` (red sideband,
frequency ``eps_j - omega_l``) addresses ``a_l`` and tone ``N + l`` (blue
sideband, ``eps_j + omega_l``) addresses ``a_l^dag``. To first order in the
amplitudes the qubit couples to ``gbar_j * A_hat_j`` with::

    gbar_j A_jl = g_jl eta_jl exp(-i phi_jl)
    gbar_j B_jl = g_jl eta_{j,N+l} exp(-i phi_{j,N+l})

All frequencies are in units of 2 pi x MHz.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from gausscool.exceptions import AmplitudeOverflow, InvalidInput, SynthesisInfeasible
from gausscool.gaussian import GaussianMap, validate_gaussian_map

ETA_SOFT_LIMIT = 0.3
ETA_HARD_LIMIT = 1.0
MODES = ("cooling", "lasing")


class AmplitudeWarning(UserWarning):
    """Amplitude large enough that the first-order Bessel expansion degrades."""


def _vector(x, n, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = np.full(n, float(x))
    if x.shape != (n,):
        raise InvalidInput(f"{name} must have length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"{name} must be finite")
    return x


@dataclass(frozen=True, eq=False)
class HardwareSpec:
    """Mode/qubit frequencies, couplings and loss rates.

    ``g`` may be given as a scalar (homogeneous all-to-all coupling) and
    ``kappa`` as a scalar or per-mode vector.
    """

    omega: np.ndarray
    epsilon: np.ndarray
    g: np.ndarray
    gamma: np.ndarray
    kappa: np.ndarray = 0.0

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float).reshape(-1)
        n = omega.size
        if n < 1:
            raise InvalidInput("hardware needs at least one mode")
        epsilon = _vector(self.epsilon, n, "epsilon")
        g = np.asarray(self.g, dtype=float)
        if g.ndim == 0:
            g = np.full((n, n), float(g))
        if g.shape != (n, n) or not np.all(np.isfinite(g)):
            raise InvalidInput(f"g must be a finite {n}x{n} matrix or a scalar")
        gamma = _vector(self.gamma, n, "gamma")
        if np.any(gamma <= 0):
            raise InvalidInput("gamma must be positive")
        kappa = _vector(self.kappa, n, "kappa")
        if np.any(kappa < 0):
            raise InvalidInput("kappa must be nonnegative")
        for name, value in (("omega", omega), ("epsilon", epsilon), ("g", g),
                            ("gamma", gamma), ("kappa", kappa)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_modes(self):
        return self.omega.size

    @property
    def is_homogeneous(self):
        g = self.g
        return bool(np.all(g == g.flat[0]))

    def diagnostics(self, dispersive_ratio=10.0):
        """Human-readable list of violated layout assumptions (empty if none)."""
        issues = []
        for name, f in (("omega", self.omega), ("epsilon", self.epsilon)):
            if np.unique(f).size != f.size:
                issues.append(f"{name} frequencies are not distinct")
        if np.intersect1d(self.omega, self.epsilon).size:
            issues.append("a qubit frequency coincides with a mode frequency")
        gmax = np.abs(self.g)
        for sign, label in ((-1, "eps - omega"), (1, "eps + omega")):
            detuning = np.abs(self.epsilon[:, None] + sign * self.omega[None, :])
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(gmax > 0, detuning / gmax, np.inf)
            if np.any(ratio < dispersive_ratio):
                j, l = np.unravel_index(np.argmin(ratio), ratio.shape)
                issues.append(
                    f"|{label}| / |g| = {ratio[j, l]:.3g} below {dispersive_ratio} at (j={j}, l={l})"
                )
        return issues

    @classmethod
    def equally_spaced(cls, n_modes, eps1, omega1, spacing, g, gamma, kappa=0.0):
        """Layout ``eps_j = eps1 - spacing (j-1)``, ``omega_j = omega1 - spacing (j-1)``."""
        steps = spacing * np.arange(n_modes)
        return cls(omega1 - steps, eps1 - steps, g, gamma, kappa)


def modulation_frequencies(hw):
    """Tone frequencies: red ``eps_j - omega_l`` then blue ``eps_j + omega_l``."""
    eps = hw.epsilon[:, None]
    om = hw.omega[None, :]
    return np.hstack([eps - om, eps + om])


@dataclass(frozen=True, eq=False)
class ModulationPlan:
    """Tone table for ``N`` qubits: frequencies, amplitudes, phases, couplings.

    ``red_coupling``/``blue_coupling`` hold the (possibly complex) bare
    couplings the tones were matched against, so the engineered operators
    can be reconstructed from the plan alone.
    """

    Omega: np.ndarray
    eta: np.ndarray
    phi: np.ndarray
    gbar: np.ndarray
    mode: str = "cooling"
    pivot: np.ndarray = None
    red_coupling: np.ndarray = None
    blue_coupling: np.ndarray = None
    notes: tuple = field(default=())

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}, got {self.mode!r}")
        eta = np.asarray(self.eta, dtype=float)
        n = eta.shape[0]
        if eta.shape != (n, 2 * n):
            raise InvalidInput(f"eta must be N x 2N, got {eta.shape}")
        if np.any(eta < 0):
            raise InvalidInput("amplitudes must be nonnegative")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
        object.__setattr__(self, "Omega", np.asarray(self.Omega, dtype=float))
        object.__setattr__(self, "gbar", np.asarray(self.gbar, dtype=complex))
        for name in ("red_coupling", "blue_coupling"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, np.asarray(value, dtype=complex))

    @property
    def n_modes(self):
        return self.eta.shape[0]

    @property
    def eta_max(self):
        return float(self.eta.max())

    def tones(self):
        """Complex tone weights ``eta exp(-i phi)``."""
        return self.eta * np.exp(-1j * self.phi)

    def scaled(self, s):
        """Same plan with every amplitude and effective coupling scaled by ``s``."""
        return ModulationPlan(self.Omega, s * self.eta, self.phi, s * self.gbar, self.mode,
                              self.pivot, self.red_coupling, self.blue_coupling, self.notes)


def _resolve_pivot(A, pivot):
    n = A.shape[0]
    if pivot is None:
        return np.argmax(np.abs(A), axis=1)
    pivot = np.asarray(pivot, dtype=int)
    if pivot.ndim == 0:
        pivot = np.full(n, int(pivot))
    if pivot.shape != (n,) or np.any(pivot < 0) or np.any(pivot >= n):
        raise InvalidInput("pivot must be a column index or one index per row")
    return pivot


def _resolve_eta_pivot(eta_pivot, n):
    eta_pivot = np.asarray(eta_pivot, dtype=float)
    if eta_pivot.ndim == 0:
        eta_pivot = np.full(n, float(eta_pivot))
    if eta_pivot.shape != (n,):
        raise InvalidInput(f"eta_pivot must be a scalar or have length {n}")
    if np.any(eta_pivot <= 0) or np.any(eta_pivot > ETA_SOFT_LIMIT):
        raise InvalidInput(f"eta_pivot entries must lie in (0, {ETA_SOFT_LIMIT}]")
    return eta_pivot


def _solve_tones(targets, couplings, gbar, offset):
    """Amplitudes/phases with ``gbar_j * target = coupling * eta * exp(-i phi)``."""
    need = gbar[:, None] * targets
    tiny = 1e-15 * max(float(np.max(np.abs(need))), 1e-300)
    active = np.abs(need) > tiny
    blocked = active & (couplings == 0)
    if np.any(blocked):
        j, l = np.argwhere(blocked)[0]
        raise SynthesisInfeasible(
            f"tone (j={j}, m={l + offset}) needs a nonzero amplitude but its bare coupling is zero"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(active, need / np.where(couplings == 0, 1, couplings), 0)
    eta = np.abs(z)
    phi = np.where(active, np.mod(-np.angle(z), 2 * np.pi), 0.0)
    # mod can return 2*pi for tiny negative angles
    phi = np.where(phi >= 2 * np.pi, 0.0, phi)
    return eta, phi


def match_tones(A, B, red_coupling, blue_coupling, eta_pivot, pivot=None, mode="cooling"):
    """Core tone matching shared by the all-to-all and chain geometries.

    Args:
        A, B: ``N x N`` complex blocks of the operator map to engineer.
        red_coupling: bare coupling seen by the red tones (``N x N``).
        blue_coupling: bare coupling seen by the blue tones (``N x N``).
        eta_pivot: amplitude of the tone matched to ``A[j, pivot[j]]``.
        pivot: column per row; ``None`` picks ``argmax_l |A_jl|``.
        mode: ``"cooling"`` engineers ``gbar A_hat sigma^dag``;
            ``"lasing"`` engineers ``gbar A_hat^dag sigma^dag``.

    Returns:
        (eta, phi, gbar, pivot)
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    red_coupling = np.asarray(red_coupling, dtype=complex)
    blue_coupling = np.asarray(blue_coupling, dtype=complex)
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {MODES}, got {mode!r}")
    pivot = _resolve_pivot(A, pivot)
    eta_pivot = _resolve_eta_pivot(eta_pivot, n)
    rows = np.arange(n)
    a_piv = np.abs(A[rows, pivot])
    if np.any(a_piv == 0):
        j = int(np.flatnonzero(a_piv == 0)[0])
        raise SynthesisInfeasible(f"row {j} of A vanishes at its pivot column {pivot[j]}")
    if mode == "cooling":
        red_target, blue_target, pivot_coupling = A, B, red_coupling
    else:
        red_target, blue_target, pivot_coupling = B.conj(), A.conj(), blue_coupling
    g_piv = np.abs(pivot_coupling[rows, pivot])
    if np.any(g_piv == 0):
        j = int(np.flatnonzero(g_piv == 0)[0])
        raise SynthesisInfeasible(f"pivot tone of qubit {j} has zero bare coupling")
    gbar = eta_pivot * g_piv / a_piv
    eta_r, phi_r = _solve_tones(red_target, red_coupling, gbar, 0)
    eta_b, phi_b = _solve_tones(blue_target, blue_coupling, gbar, n)
    eta = np.hstack([eta_r, eta_b])
    phi = np.hstack([phi_r, phi_b])
    _check_amplitudes(eta)
    return eta, phi, gbar, pivot


def _check_amplitudes(eta):
    if np.any(eta >= ETA_HARD_LIMIT):
        j, m = np.unravel_index(np.argmax(eta), eta.shape)
        raise AmplitudeOverflow(int(j), int(m), float(eta[j, m]))
    if np.any(eta > ETA_SOFT_LIMIT):
        j, m = np.unravel_index(np.argmax(eta), eta.shape)
        warnings.warn(
            f"eta[{j}, {m}] = {eta[j, m]:.3g} exceeds {ETA_SOFT_LIMIT}; "
            "first-order Bessel matching loses accuracy",
            AmplitudeWarning,
            stacklevel=3,
        )


def synthesize_plan(target, hw, eta_pivot, mode="cooling", pivot=None):
    """Modulation plan engineering the operators of ``target`` on hardware ``hw``.

    Args:
        target: GaussianMap whose rows ``A_hat_j = A_j. a + B_j. a_dag``
            qubit ``j`` should couple to.
        hw: HardwareSpec with matching ``n_modes``.
        eta_pivot: scalar or per-qubit amplitude of the pivot tone, in (0, 0.3].
        mode: ``"cooling"`` or ``"lasing"``.
        pivot: pivot column(s); ``None`` uses ``argmax_l |A_jl|``.
    """
    if target.n_modes != hw.n_modes:
        raise InvalidInput("target and hardware have different numbers of modes")
    report = validate_gaussian_map(target)
    if not report.passed:
        raise InvalidInput("target is not a valid Gaussian map")
    g = hw.g.astype(complex)
    eta, phi, gbar, pivot = match_tones(target.A, target.B, g, g, eta_pivot, pivot, mode)
    return ModulationPlan(modulation_frequencies(hw), eta, phi, gbar, mode, pivot, g, g)


def plan_correspondence(plan):
    """Raw ``coupling * eta * exp(-i phi) / gbar`` for red and blue tones.

    In cooling mode this is ``(A, B)``; in lasing mode ``(B*, A*)``.
    """
    n = plan.n_modes
    w = plan.tones()
    red = plan.red_coupling * w[:, :n] / plan.gbar[:, None]
    blue = plan.blue_coupling * w[:, n:] / plan.gbar[:, None]
    return red, blue


def plan_operator_map(plan):
    """The operator map a plan engineers to first order in the amplitudes."""
    red, blue = plan_correspondence(plan)
    if plan.mode == "cooling":
        return GaussianMap(red, blue)
    return GaussianMap(blue.conj(), red.conj())


def effective_coupling_from_amplitudes(plan):
    """``sqrt(sum_l |g|^2 (eta_red^2 - eta_blue^2))`` (sign flipped for lasing)."""
    n = plan.n_modes
    red = np.abs(plan.red_coupling) ** 2 * plan.eta[:, :n] ** 2
    blue = np.abs(plan.blue_coupling) ** 2 * plan.eta[:, n:] ** 2
    s = np.sum(red - blue, axis=1)
    return np.sqrt(s if plan.mode == "cooling" else -s)


def ghz_plan_closed_form(spec, hw, eta1):
    """Closed-form GHZ tone table for homogeneous positive coupling ``g``.

    The red-tone phases of this table differ from the direct matching of
    ``ghz_map(spec)`` by a uniform pi; it engineers ``(-A, B)``, which
    prepares the same state up to a fixed quadrature rotation.
    """
    N = spec.n_modes
    if hw.n_modes != N:
        raise InvalidInput("hardware and GHZ spec have different numbers of modes")
    if not hw.is_homogeneous or hw.g.flat[0] <= 0:
        raise InvalidInput("closed-form GHZ modulation needs homogeneous positive coupling")
    eta1 = _resolve_eta_pivot(eta1, N)
    g = float(hw.g.flat[0])
    ch = np.cosh(spec.r2) / np.cosh(spec.r1)
    eta = np.zeros((N, 2 * N))
    phi = np.zeros((N, 2 * N))
    for j in range(1, N + 1):
        for l in range(1, N + 1):
            if l == 1:
                f = 1.0
            elif l > j + 1:
                f = 0.0
            elif l == j + 1:
                f = np.sqrt(N * (N - l + 1) / (N - l + 2)) * ch
            else:
                f = np.sqrt(N / ((N - l + 2) * (N - l + 1))) * ch
            eta[j - 1, l - 1] = eta1[j - 1] * f
            eta[j - 1, N + l - 1] = eta[j - 1, l - 1] * np.tanh(spec.r1 if l == 1 else spec.r2)
            if f:
                phi[j - 1, l - 1] = np.pi if (l == 1 or l > j) else 0.0
                if eta[j - 1, N + l - 1] > 0:
                    phi[j - 1, N + l - 1] = np.pi if l == j + 1 else 0.0
    _check_amplitudes(eta)
    gbar = np.sqrt(N) * eta1 * g / np.cosh(spec.r1)
    coupling = hw.g.astype(complex)
    return ModulationPlan(modulation_frequencies(hw), eta, phi, gbar, "cooling",
                          np.zeros(N, dtype=int), coupling, coupling)


@dataclass(frozen=True)
class CoolingRates:
    rates: np.ndarray
    cooperativities: np.ndarray
    flagged: tuple
    threshold: float


def cooling_rates(plan, hw, threshold=10.0):
    """Per-mode cooling rates ``|gbar|^2/gamma`` and cooperativities ``rate/kappa``.

    Modes whose cooperativity falls below ``threshold`` are listed in
    ``flagged``; with ``kappa = 0`` the cooperativity is infinite.
    """
    rates = np.abs(plan.gbar) ** 2 / hw.gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        coop = np.where(hw.kappa > 0, rates / np.where(hw.kappa > 0, hw.kappa, 1), np.inf)
    flagged = tuple(int(j) for j in np.flatnonzero(coop < threshold))
    return CoolingRates(rates, coop, flagged, float(threshold))
