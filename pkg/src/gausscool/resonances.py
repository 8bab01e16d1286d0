"""Multi-tone resonance census and third-order coupling corrections.

In the interaction picture qubit ``j`` couples to ``a_l`` (channel alpha)
and ``a_l^dag`` (channel beta) through sums over Bessel index vectors
``n`` of length ``2N``. A term oscillates at::

    nu_alpha = omega_l - eps_j - sum_m n_m Omega_jm
    nu_beta  = omega_l + eps_j + sum_m n_m Omega_jm

and carries weight ``prod_m J_{n_m}(2 eta_jm)``. Its order is ``sum |n_m|``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

from gausscool.exceptions import ComplexityRefusal, CorrectionBreakdown, InvalidInput
from gausscool.gaussian import (
    GaussianMap,
    covariance_from_map,
    gaussian_overlap,
    raw_covariance,
    validate_gaussian_map,
)
from gausscool.modulation import (
    ghz_plan_closed_form,
    modulation_frequencies,
    plan_operator_map,
    synthesize_plan,
)
from gausscool.states import GhzSpec, ghz_map

CHANNELS = ("alpha", "beta")
MAX_ORDER_SOFT = 5


@dataclass(frozen=True)
class ResonanceEntry:
    j: int
    l: int
    channel: str
    n: tuple
    order: int
    nu: float
    weight: float
    exact: bool
    dangerous: bool

    @property
    def designed(self):
        """True for the first-order resonance the tone table was built for."""
        return self.order == 1 and self.exact and self._designed_index()

    def _designed_index(self):
        N = len(self.n) // 2
        idx = self.l if self.channel == "alpha" else N + self.l
        return self.n[idx] == -1


@dataclass(frozen=True)
class ResonanceReport:
    entries: tuple
    max_order: int
    near_threshold: float
    exact_tol: float

    def select(self, j=None, l=None, channel=None, order=None, exact=None):
        out = []
        for e in self.entries:
            if j is not None and e.j != j:
                continue
            if l is not None and e.l != l:
                continue
            if channel is not None and e.channel != channel:
                continue
            if order is not None and e.order != order:
                continue
            if exact is not None and e.exact != exact:
                continue
            out.append(e)
        return out

    def count(self, **kwargs):
        return len(self.select(**kwargs))


def _check_channel(chi):
    if chi not in CHANNELS:
        raise InvalidInput(f"channel must be one of {CHANNELS}, got {chi!r}")


def term_frequency(j, l, chi, n, hw):
    """Oscillation frequency of the term with Bessel indices ``n``."""
    _check_channel(chi)
    N = hw.n_modes
    n = np.asarray(n, dtype=int)
    if n.shape != (2 * N,):
        raise InvalidInput(f"index vector must have length {2 * N}")
    if not (0 <= j < N and 0 <= l < N):
        raise InvalidInput("qubit/mode index out of range")
    shift = float(np.dot(n, modulation_frequencies(hw)[j]))
    if chi == "alpha":
        return hw.omega[l] - hw.epsilon[j] - shift
    return hw.omega[l] + hw.epsilon[j] + shift


@lru_cache(maxsize=32)
def _index_vectors(dim, max_order):
    """All integer vectors of length ``dim`` with ``sum |n_m| <= max_order``.

    Ordered lexicographically, so the result is deterministic.
    """
    rows = []

    def rec(prefix, budget):
        if len(prefix) == dim:
            rows.append(tuple(prefix))
            return
        for v in range(-budget, budget + 1):
            rec(prefix + [v], budget - abs(v))

    rec([], max_order)
    out = np.array(rows, dtype=np.int16).reshape(-1, dim)
    out.setflags(write=False)
    return out


def bessel_weight(n, eta_row):
    """``prod_m J_{n_m}(2 eta_m)`` for one or many index vectors."""
    n = np.asarray(n)
    return np.prod(jv(n, 2 * np.asarray(eta_row)), axis=-1)


def enumerate_resonances(hw, max_order=3, near_threshold=0.0, plan=None,
                         danger_margin=10.0, force=False):
    """List every exact and near resonance up to a given order.

    Args:
        hw: HardwareSpec; tone frequencies follow ``modulation_frequencies``.
        max_order: largest ``|n|`` enumerated.
        near_threshold: also keep terms with ``|nu| <= near_threshold``.
        plan: optional ModulationPlan; supplies amplitudes for the Bessel
            weights and the rotating-wave danger flag. Without it weights
            are NaN and nothing is flagged dangerous.
        danger_margin: a non-exact term is dangerous when
            ``|nu| < danger_margin * |weight| * max|g|``.
        force: allow ``max_order > 5`` with more than 10 modes.

    Returns:
        ResonanceReport sorted by ``(j, l, channel, n)``.
    """
    if int(max_order) != max_order or max_order < 1:
        raise InvalidInput("max_order must be a positive integer")
    N = hw.n_modes
    if max_order > MAX_ORDER_SOFT and N > 10 and not force:
        raise ComplexityRefusal(
            f"enumerating |n| <= {max_order} over {2 * N} tones is too large; pass force=True"
        )
    Omega = modulation_frequencies(hw)
    exact_tol = 1e-9 * float(np.max(np.abs(hw.epsilon)))
    keep_tol = max(exact_tol, float(near_threshold))
    gmax = float(np.max(np.abs(hw.g)))
    vecs = _index_vectors(2 * N, int(max_order))
    orders = np.abs(vecs).sum(axis=1)
    entries = []
    for j in range(N):
        shift = vecs @ Omega[j]
        eta_row = None if plan is None else plan.eta[j]
        for l in range(N):
            for chi in CHANNELS:
                if chi == "alpha":
                    nu = hw.omega[l] - hw.epsilon[j] - shift
                else:
                    nu = hw.omega[l] + hw.epsilon[j] + shift
                for i in np.flatnonzero(np.abs(nu) <= keep_tol):
                    exact = bool(abs(nu[i]) <= exact_tol)
                    if eta_row is None:
                        weight = float("nan")
                        dangerous = False
                    else:
                        weight = float(bessel_weight(vecs[i], eta_row))
                        dangerous = (not exact) and abs(nu[i]) < danger_margin * abs(weight) * gmax
                    entries.append(ResonanceEntry(
                        j, l, chi, tuple(int(v) for v in vecs[i]), int(orders[i]),
                        float(nu[i]), weight, exact, bool(dangerous),
                    ))
    entries.sort(key=lambda e: (e.j, e.l, CHANNELS.index(e.channel), e.n))
    return ResonanceReport(tuple(entries), int(max_order), float(near_threshold), exact_tol)


def third_order_resonances(N, l, chi):
    """The ``N-1`` index vectors of order 3 that are resonant for any layout."""
    out = []
    for k in range(N):
        if k == l:
            continue
        n = [0] * (2 * N)
        if chi == "alpha":
            n[N + l] = 1
        else:
            n[l] = 1
        n[k] = n[N + k] = -1
        out.append(tuple(n))
    return out


def corrected_couplings(plan):
    """First-order couplings plus the unavoidable ``|n| = 3`` terms.

    Returns:
        (alpha, beta), each ``N x N`` complex, in the small-amplitude
        polynomial form of the Bessel products.
    """
    N = plan.n_modes
    eta, phi = plan.eta, plan.phi
    red_w = eta[:, :N] * np.exp(-1j * phi[:, :N])
    blue_w = eta[:, N:] * np.exp(-1j * phi[:, N:])
    # pair_j = sum_k eta_jk eta_{j,N+k} exp(-i(phi_jk + phi_{j,N+k}))
    pair = red_w * blue_w
    pair_total = pair.sum(axis=1, keepdims=True)
    others = pair_total - pair
    alpha = -red_w + blue_w.conj() * others
    beta = -blue_w + red_w.conj() * others
    return alpha, beta


def correction_relative_error(plan):
    """Size of the third-order terms relative to the first-order couplings.

    ``max |alpha - alpha_1|, |beta - beta_1|`` divided by
    ``max |alpha_1|, |beta_1|``, where ``alpha_1 = -eta exp(-i phi)`` on the
    red tones and ``beta_1`` likewise on the blue tones. Scales as ``N eta^2``.
    """
    N = plan.n_modes
    first = -plan.tones()
    alpha, beta = corrected_couplings(plan)
    diff = max(np.max(np.abs(alpha - first[:, :N])), np.max(np.abs(beta - first[:, N:])))
    return float(diff / np.max(np.abs(first)))


@dataclass(frozen=True)
class CorrectedMap:
    gtilde: np.ndarray
    map: GaussianMap
    symmetric_residual: float
    normalization_residual: float


def corrected_map(plan, hw):
    """Operator map and effective couplings including ``|n| = 3`` terms.

    Only the diagonal of the normalization constraint is restored; the
    remaining constraint residuals are reported, not repaired.

    Raises:
        CorrectionBreakdown: if ``sum_k |g alpha|^2 - |g beta|^2 <= 0`` for some qubit.
    """
    alpha, beta = corrected_couplings(plan)
    ga = hw.g * alpha
    gb = hw.g * beta
    norm = np.sum(np.abs(ga) ** 2 - np.abs(gb) ** 2, axis=1)
    if plan.mode == "lasing":
        norm = -norm
    if np.any(norm <= 0):
        j = int(np.flatnonzero(norm <= 0)[0])
        raise CorrectionBreakdown(f"qubit {j}: corrected normalization {norm[j]:.3g} is not positive")
    gtilde = np.sqrt(norm)
    A = -ga / gtilde[:, None]
    B = -gb / gtilde[:, None]
    if plan.mode == "lasing":
        A, B = B.conj(), A.conj()
    gmap = GaussianMap(A, B)
    report = validate_gaussian_map(gmap, tol=np.inf)
    return CorrectedMap(gtilde, gmap, report.symmetric_violation, report.normalization_violation)


@dataclass(frozen=True)
class AuditResult:
    fidelity: float
    gbar: np.ndarray
    gtilde: np.ndarray
    eta_max: float
    symmetric_residual: float
    normalization_residual: float

    @property
    def gtilde_over_gbar_maxdev(self):
        return float(np.max(np.abs(self.gtilde / np.abs(self.gbar) - 1)))


def audit_plan(plan, hw, reference=None):
    """Fidelity between the first-order target of ``plan`` and its corrected map.

    Args:
        plan: cooling ModulationPlan.
        hw: HardwareSpec the plan was built for.
        reference: operator map to compare against; defaults to the map the
            plan engineers at first order.

    The corrected covariance is taken straight from the ladder-operator
    formula, imaginary residual included, and compared through the
    pure-state overlap.
    """
    if reference is None:
        reference = plan_operator_map(plan)
    V = covariance_from_map(reference)
    cm = corrected_map(plan, hw)
    Vt = raw_covariance(cm.map)
    return AuditResult(
        gaussian_overlap(V, Vt), plan.gbar, cm.gtilde, plan.eta_max,
        cm.symmetric_residual, cm.normalization_residual,
    )


def audit_ghz(spec, hw, eta1, closed_form=False):
    """Audit the GHZ protocol with pivot amplitude ``eta1`` on column 1."""
    if eta1 == 0:
        gbar = np.zeros(spec.n_modes)
        return AuditResult(1.0, gbar, gbar.copy(), 0.0, 0.0, 0.0)
    if closed_form:
        plan = ghz_plan_closed_form(spec, hw, eta1)
        return audit_plan(plan, hw)
    target = ghz_map(spec)
    plan = synthesize_plan(target, hw, eta1, pivot=0)
    return audit_plan(plan, hw, reference=target)


def audit_fidelity(spec, hw, eta1):
    """Fidelity of the corrected GHZ state with the ideal one."""
    return audit_ghz(spec, hw, eta1).fidelity


def ghz_default_eta(n_modes, scale=0.1):
    """Pivot amplitude ``scale / sqrt(N-1)``, keeping the largest tone near ``scale``."""
    return scale / np.sqrt(n_modes - 1)


def squeezing_threshold(n_modes, hw, eta1, level, lo=0.5, hi=0.99, xtol=1e-10):
    """Squeezing fraction at which the audited GHZ fidelity falls to ``level``.

    Both squeezings are set equal. Raises InvalidInput if the fidelity does
    not cross ``level`` inside ``[lo, hi]``. Far above 99% squeezing the
    overlap of the uncorrected complex covariance leaves [0, 1], so the
    default bracket stops there.
    """

    def excess(f):
        spec = GhzSpec.from_squeezing_fraction(n_modes, f)
        return audit_fidelity(spec, hw, eta1) - level

    a, b = excess(lo), excess(hi)
    if not (a > 0 > b):
        raise InvalidInput(f"fidelity does not cross {level} for squeezing in [{lo}, {hi}]")
    return brentq(excess, lo, hi, xtol=xtol)
