"""Homogeneous bosonic chains with local qubits, mapped to normal modes.

An open chain is diagonalized by the real sine transform ``S`` and a
closed (ring) chain with gauge phase ``phi`` by the discrete Fourier
matrix ``F``. In the normal-mode basis every qubit couples to every mode,
so the all-to-all tone matching applies to the transformed target.
"""

from dataclasses import dataclass

import numpy as np

from gausscool.exceptions import DegenerateDispersion, InvalidInput
from gausscool.gaussian import GaussianMap, validate_gaussian_map
from gausscool.modulation import ModulationPlan, match_tones

TOPOLOGIES = ("open", "closed")


def is_prime(n):
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n**0.5) + 1))


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """Homogeneous chain: on-site frequency ``omega``, hopping ``J``, local couplings ``g_local``.

    ``epsilon`` (qubit frequencies) is only needed to fill in tone frequencies.
    """

    topology: str
    n_modes: int
    omega: float
    J: float
    g_local: np.ndarray
    phase: float = 0.0
    epsilon: np.ndarray = None

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise InvalidInput(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InvalidInput("n_modes must be a positive integer")
        n = int(self.n_modes)
        g = np.asarray(self.g_local, dtype=float)
        if g.ndim == 0:
            g = np.full(n, float(g))
        if g.shape != (n,):
            raise InvalidInput(f"g_local must have length {n}")
        object.__setattr__(self, "g_local", g)
        if self.epsilon is not None:
            eps = np.asarray(self.epsilon, dtype=float)
            if eps.shape != (n,):
                raise InvalidInput(f"epsilon must have length {n}")
            object.__setattr__(self, "epsilon", eps)
        if self.topology == "open" and not is_prime(n + 1):
            raise InvalidInput(
                f"open chain needs N+1 prime (N={n}); otherwise some qubit-mode couplings vanish"
            )

    def hopping_matrix(self):
        """Single-particle matrix ``M`` with ``H = a^dag M a``."""
        n = self.n_modes
        M = np.diag(np.full(n, self.omega)).astype(complex)
        hop = -self.J * np.exp(-1j * self.phase) if self.topology == "closed" else -self.J
        for j in range(n - 1):
            M[j, j + 1] = hop
            M[j + 1, j] = np.conj(hop)
        if self.topology == "closed" and n > 2:
            M[n - 1, 0] = hop
            M[0, n - 1] = np.conj(hop)
        elif self.topology == "closed" and n == 2:
            M[0, 1] = M[1, 0] = -2 * self.J * np.cos(self.phase)
        return M if self.topology == "closed" else M.real


@dataclass(frozen=True, eq=False)
class NormalModeBasis:
    """Frequencies, basis matrix (``a = basis @ c``) and qubit/normal-mode couplings.

    ``red_coupling`` multiplies ``c_k`` and ``blue_coupling`` multiplies ``c_k^dag``.
    """

    topology: str
    frequencies: np.ndarray
    basis: np.ndarray
    wavenumbers: np.ndarray
    red_coupling: np.ndarray
    blue_coupling: np.ndarray


def _check_distinct(freqs, labels, scale):
    order = np.argsort(freqs)
    gaps = np.diff(freqs[order])
    if gaps.size and np.min(gaps) < 1e-9 * scale:
        i = int(np.argmin(gaps))
        raise DegenerateDispersion(int(labels[order[i]]), int(labels[order[i + 1]]))


def open_chain_modes(chain):
    """Sine-transform normal modes of an open chain.

    ``Delta_k = omega - 2 J cos(k pi/(N+1))`` and
    ``S_jk = sqrt(2/(N+1)) sin(j k pi/(N+1))`` with ``j, k = 1..N``.
    """
    if chain.topology != "open":
        raise InvalidInput("open_chain_modes needs an open chain")
    n = chain.n_modes
    k = np.arange(1, n + 1)
    freqs = chain.omega - 2 * chain.J * np.cos(k * np.pi / (n + 1))
    _check_distinct(freqs, k, max(abs(chain.J), abs(chain.omega)) if chain.J == 0 else abs(chain.J))
    S = np.sqrt(2 / (n + 1)) * np.sin(np.outer(k, k) * np.pi / (n + 1))
    M = chain.hopping_matrix()
    resid = np.max(np.abs(S @ M @ S - np.diag(freqs)))
    if resid > 1e-10 * max(1.0, abs(chain.omega) + 2 * abs(chain.J)):
        raise InvalidInput(f"sine transform fails to diagonalize the chain (residual {resid:.3g})")
    g = chain.g_local[:, None] * S
    return NormalModeBasis("open", freqs, S, k, g.astype(complex), g.astype(complex))


def brillouin_zone(n_modes):
    kmin = -(n_modes // 2) if n_modes % 2 == 0 else -((n_modes - 1) // 2)
    return np.arange(kmin, kmin + n_modes)


def closed_chain_modes(chain):
    """Fourier normal modes of a ring with gauge phase.

    ``Delta_k = omega - 2 J cos(2 pi k/N - phase)`` for ``k`` in the first
    Brillouin zone and ``F_jk = exp(2 pi i j k/N)/sqrt(N)``.
    """
    if chain.topology != "closed":
        raise InvalidInput("closed_chain_modes needs a closed chain")
    n = chain.n_modes
    k = brillouin_zone(n)
    j = np.arange(1, n + 1)
    freqs = chain.omega - 2 * chain.J * np.cos(2 * np.pi * k / n - chain.phase)
    scale = abs(chain.J) if chain.J else 1.0
    if chain.J == 0 and n > 1:
        raise DegenerateDispersion(int(k[0]), int(k[1]), "J = 0 collapses the dispersion")
    _check_distinct(freqs, k, scale)
    F = np.exp(2j * np.pi * np.outer(j, k) / n) / np.sqrt(n)
    g = chain.g_local[:, None] * F
    return NormalModeBasis("closed", freqs, F, k, g, g.conj())


def chain_modes(chain):
    return open_chain_modes(chain) if chain.topology == "open" else closed_chain_modes(chain)


def transform_target(target, basis):
    """Express a target's operators in the normal-mode basis.

    Open: ``(S A S, S B S)``. Closed: ``(F^dag A F, F^dag B F*)``.
    """
    U = np.asarray(basis.basis)
    n = target.n_modes
    if U.shape != (n, n):
        raise InvalidInput("basis and target dimensions differ")
    if np.max(np.abs(U.conj().T @ U - np.eye(n))) > 1e-10:
        raise InvalidInput("basis matrix is not unitary")
    Ud = U.conj().T
    return GaussianMap(Ud @ target.A @ U, Ud @ target.B @ U.conj())


def chain_synthesize_plan(chain, target, eta_pivot, pivot=None, basis=None):
    """Modulation plan for a chain, matched in its normal-mode basis.

    Qubit ``j`` engineers row ``j`` of the transformed target. The effective
    couplings follow from the normalization of each row.
    """
    if basis is None:
        basis = chain_modes(chain)
    if not validate_gaussian_map(target).passed:
        raise InvalidInput("target is not a valid Gaussian map")
    tc = transform_target(target, basis)
    eta, phi, gbar, pivot = match_tones(
        tc.A, tc.B, basis.red_coupling, basis.blue_coupling, eta_pivot, pivot, "cooling"
    )
    n = chain.n_modes
    if chain.epsilon is None:
        Omega = np.full((n, 2 * n), np.nan)
    else:
        eps = chain.epsilon[:, None]
        Omega = np.hstack([eps - basis.frequencies[None, :], eps + basis.frequencies[None, :]])
    return ModulationPlan(Omega, eta, phi, gbar, "cooling", pivot,
                          basis.red_coupling, basis.blue_coupling)


# --- frequency planning -------------------------------------------------


def exact_gap(topology, n_modes, J):
    """Smallest neighbouring normal-mode splitting at the crowded band edge."""
    N = n_modes
    if topology == "open":
        return 2 * J * (np.cos(np.pi / (N + 1)) - np.cos(2 * np.pi / (N + 1)))
    return 2 * J * (1 - np.cos(2 * np.pi / N))


def asymptotic_gap(topology, n_modes, J):
    """Large-``N`` form of ``exact_gap``: ``3 pi^2 J/N^2`` (open), ``4 pi^2 J/N^2`` (closed)."""
    c = 3 if topology == "open" else 4
    return c * np.pi**2 * J / n_modes**2


# hopping scaling used by the original layout estimate: J >= g N^2 / (c pi^2)
HOPPING_SCALING = {"open": 3.0, "closed": 8.0}


def required_hopping(topology, n_modes, g, law="scaling"):
    """Smallest hopping keeping the edge splitting at least ``g``.

    ``law="scaling"`` uses ``J = g N^2 / (c pi^2)`` with ``c = 3`` (open)
    or ``8`` (closed); ``law="exact"`` inverts ``exact_gap``.
    """
    if law == "scaling":
        return g * n_modes**2 / (HOPPING_SCALING[topology] * np.pi**2)
    if law == "exact":
        return g / exact_gap(topology, n_modes, 1.0)
    raise InvalidInput(f"unknown hopping law {law!r}")


@dataclass(frozen=True)
class PlannerRow:
    n_modes: int
    J: float
    omega_min: float
    omega_max: float
    eps_min: float
    margin: float
    feasible: bool
    prime_ok: bool


@dataclass(frozen=True)
class FeasibilityReport:
    topology: str
    rows: tuple
    max_n: int
    threshold: float

    def row(self, n_modes):
        for r in self.rows:
            if r.n_modes == n_modes:
                return r
        raise KeyError(n_modes)


def frequency_planner(topology, g, eps1, qubit_spacing, omega_min, margin=None,
                      n_max=200, law="scaling", omega1=None, mode_spacing=None):
    """Largest register that fits below the qubit band.

    Args:
        topology: ``"open"``, ``"closed"`` or ``"all_to_all"``.
        g: coupling scale; margins are reported in units of ``g``.
        eps1: top qubit frequency; qubit ``j`` sits at ``eps1 - (j-1) qubit_spacing``.
        qubit_spacing: qubit frequency step.
        omega_min: lowest allowed mode frequency.
        margin: chains need ``eps_N - omega_max > margin * g``; ignored for
            ``all_to_all``, which only needs its lowest mode above ``omega_min``.
        n_max: largest ``N`` examined.
        law: hopping law for chains (``"scaling"`` or ``"exact"``).
        omega1: top mode frequency (``all_to_all`` only).
        mode_spacing: mode frequency step (``all_to_all``; defaults to ``qubit_spacing``).

    Returns:
        FeasibilityReport whose ``max_n`` is the largest ``N`` such that every
        register size from 1 (2 for chains) up to ``N`` is feasible.
    """
    if min(g, eps1, omega_min) <= 0 or qubit_spacing < 0:
        raise InvalidInput("planner inputs must be positive")
    rows = []
    if topology == "all_to_all":
        if omega1 is None:
            raise InvalidInput("all_to_all planning needs omega1")
        step = qubit_spacing if mode_spacing is None else mode_spacing
        for n in range(1, n_max + 1):
            om_lo = omega1 - step * (n - 1)
            eps_n = eps1 - qubit_spacing * (n - 1)
            rows.append(PlannerRow(n, 0.0, om_lo, omega1, eps_n, (eps_n - omega1) / g,
                                   bool(om_lo > omega_min), True))
        start = 1
    elif topology in TOPOLOGIES:
        if margin is None:
            raise InvalidInput("chain planning needs a margin")
        for n in range(2, n_max + 1):
            J = required_hopping(topology, n, g, law)
            om_hi = omega_min + 4 * J
            eps_n = eps1 - qubit_spacing * (n - 1)
            m = (eps_n - om_hi) / g
            prime_ok = is_prime(n + 1) if topology == "open" else True
            rows.append(PlannerRow(n, float(J), float(omega_min), float(om_hi), float(eps_n), float(m),
                                   bool(m > margin), prime_ok))
        start = 2
    else:
        raise InvalidInput(f"unknown topology {topology!r}")
    max_n = start - 1
    for r in rows:
        if not r.feasible:
            break
        max_n = r.n_modes
    return FeasibilityReport(topology, tuple(rows), max_n,
                             float("nan") if margin is None else float(margin))
