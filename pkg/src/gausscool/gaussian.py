"""Gaussian maps and quadrature covariance matrices.

A Gaussian unitary acts linearly on the annihilation operators,
``A_hat = A @ a + B @ a_dag``, with ``A B^T = B A^T`` and
``A A^dag = B B^dag + I``. Covariances use the quadrature vector
``r = (x_1..x_N, p_1..p_N)`` with ``x = a + a_dag`` and
``p = -i (a - a_dag)``, so the vacuum has ``V = I``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from gausscool.exceptions import InvalidInput, NumericalInconsistency

QUADRATURE_ORDERING = "x1..xN,p1..pN"
QUADRATURE_CONVENTION = "x=a+a^dag, p=-i(a-a^dag), vacuum V=I"

IMAG_TOL = 1e-10
PHYSICAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianMap:
    """Bogoliubov pair ``(A, B)`` acting on ``N`` modes.

    The arrays are stored as complex copies and never mutated.
    """

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        B = np.array(self.B, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidInput(f"A must be square, got shape {A.shape}")
        if B.shape != A.shape:
            raise InvalidInput(f"A and B shapes differ: {A.shape} vs {B.shape}")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n_modes(self):
        return self.A.shape[0]

    def block_matrix(self):
        """The ``2N x 2N`` matrix ``[[A, B], [B*, A*]]`` acting on ``(a, a_dag)``."""
        return np.block([[self.A, self.B], [self.B.conj(), self.A.conj()]])

    @classmethod
    def from_block_matrix(cls, G):
        G = np.asarray(G)
        n = G.shape[0] // 2
        return cls(G[:n, :n], G[:n, n:])

    def __repr__(self):
        return f"GaussianMap(n_modes={self.n_modes})"


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    symmetric_violation: float
    normalization_violation: float
    tol: float


def identity_map(n_modes):
    return GaussianMap(np.eye(n_modes), np.zeros((n_modes, n_modes)))


def default_map_tol(n_modes):
    return 1e-12 * n_modes


def validate_gaussian_map(gmap, tol=None):
    """Check both Bogoliubov constraints elementwise.

    Args:
        gmap: the map to check. A ``(A, B)`` tuple is accepted too.
        tol: absolute tolerance; defaults to ``1e-12 * N``.

    Returns:
        ValidationReport with the largest violation of ``A B^T - B A^T``
        and of ``A A^dag - B B^dag - I``.
    """
    if not isinstance(gmap, GaussianMap):
        gmap = GaussianMap(*gmap)
    A, B = gmap.A, gmap.B
    n = gmap.n_modes
    if tol is None:
        tol = default_map_tol(n)
    sym = float(np.max(np.abs(A @ B.T - B @ A.T)))
    norm = float(np.max(np.abs(A @ A.conj().T - B @ B.conj().T - np.eye(n))))
    return ValidationReport(sym <= tol and norm <= tol, sym, norm, float(tol))


def _require_valid(gmap, name):
    report = validate_gaussian_map(gmap)
    if not report.passed:
        raise InvalidInput(
            f"{name} is not a valid Gaussian map "
            f"(violations {report.symmetric_violation:.3g}, "
            f"{report.normalization_violation:.3g})"
        )


def compose_maps(later, earlier):
    """Map of applying ``earlier`` first and ``later`` second.

    Matches the block product ``G_later @ G_earlier``.
    """
    _require_valid(later, "later")
    _require_valid(earlier, "earlier")
    if later.n_modes != earlier.n_modes:
        raise InvalidInput("maps act on different numbers of modes")
    A2, B2, A1, B1 = later.A, later.B, earlier.A, earlier.B
    return GaussianMap(A2 @ A1 + B2 @ B1.conj(), A2 @ B1 + B2 @ A1.conj())


def inverse_map(gmap):
    """Inverse Bogoliubov transformation, ``(A^dag, -B^T)``.

    The vacuum of the operators ``A a + B a_dag`` is the state whose
    covariance is ``covariance_from_map(inverse_map(gmap))``.
    """
    return GaussianMap(gmap.A.conj().T, -gmap.B.T)


def symplectic_form(n_modes):
    I = np.eye(n_modes)
    Z = np.zeros((n_modes, n_modes))
    return np.block([[Z, I], [-I, Z]])


def _ladder_to_quadrature(n_modes):
    I = np.eye(n_modes)
    return np.block([[I, I], [-1j * I, 1j * I]])


def occupation_from_inverse_temperature(kappa):
    """Bose-Einstein occupation for a normalized inverse temperature."""
    return 1.0 / np.expm1(np.asarray(kappa, dtype=float))


def inverse_temperature_from_occupation(nbar):
    nbar = np.asarray(nbar, dtype=float)
    return np.log1p(1.0 / nbar)


def check_thermal(nbar, n_modes):
    if nbar is None:
        return np.zeros(n_modes)
    nbar = np.asarray(nbar, dtype=float).reshape(-1)
    if nbar.shape != (n_modes,):
        raise InvalidInput(f"thermal occupations must have length {n_modes}")
    if np.any(nbar < 0) or not np.all(np.isfinite(nbar)):
        raise InvalidInput("thermal occupations must be finite and nonnegative")
    return nbar


def raw_covariance(gmap, nbar=None):
    """``T C T^T - i Omega`` without any consistency check (complex)."""
    n = gmap.n_modes
    nbar = check_thermal(nbar, n)
    A, B = gmap.A, gmap.B
    Np = np.diag(1.0 + nbar)
    Nb = np.diag(nbar)

    def J(X, Y, Z, W):
        return X @ Np @ Y.T + Z @ Nb @ W.T

    Ac, Bc = A.conj(), B.conj()
    C = np.block([[J(A, B, B, A), J(A, Ac, B, Bc)], [J(Bc, B, Ac, A), J(Bc, Ac, Ac, Bc)]])
    T = _ladder_to_quadrature(n)
    return T @ C @ T.T - 1j * symplectic_form(n)


def covariance_from_map(gmap, nbar=None):
    """Covariance of the Gaussian state ``G rho_th(nbar) G^dag``.

    Raises:
        NumericalInconsistency: if the imaginary part exceeds ``1e-10``,
            which happens when the map violates the Bogoliubov constraints.
    """
    V = raw_covariance(gmap, nbar)
    resid = float(np.max(np.abs(V.imag)))
    if resid > IMAG_TOL:
        raise NumericalInconsistency(f"covariance has imaginary residual {resid:.3g}")
    V = V.real
    return 0.5 * (V + V.T)


def check_covariance(V, n_modes=None):
    V = np.asarray(V)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
        raise InvalidInput(f"covariance must be 2N x 2N, got shape {V.shape}")
    if n_modes is not None and V.shape[0] != 2 * n_modes:
        raise InvalidInput(f"expected a {2 * n_modes} x {2 * n_modes} covariance")
    return V


def physicality_margin(V):
    """Smallest eigenvalue of the Hermitian matrix ``V + i Omega``."""
    V = check_covariance(V)
    Om = symplectic_form(V.shape[0] // 2)
    return float(np.min(np.linalg.eigvalsh(V + 1j * Om)))


def is_physical(V, tol=PHYSICAL_TOL):
    return physicality_margin(V) >= -tol


def symplectic_spectrum(V):
    """Symplectic eigenvalues of ``V`` in ascending order (vacuum: all ones)."""
    V = check_covariance(V)
    n = V.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ V))
    # eigenvalues come in +/- pairs
    return np.sort(ev)[::2].copy()


def _logdet(M):
    if np.iscomplexobj(M):
        # no symmetrization: the raw covariance of an inconsistent map is not symmetric
        sign, ld = np.linalg.slogdet(M)
        return ld + np.log(sign)
    M = 0.5 * (M + M.T)
    try:
        c, lower = linalg.cho_factor(M)
    except linalg.LinAlgError:
        sign, ld = np.linalg.slogdet(M)
        return ld + np.log(complex(sign))
    return 2.0 * np.sum(np.log(np.diag(c)))


def gaussian_overlap(V1, V2):
    """``2^N / sqrt(det(V1^-1 + V2^-1))``, the overlap of two pure zero-mean states.

    No purity check; complex inputs are accepted and the modulus is returned.
    """
    V1 = check_covariance(V1)
    V2 = check_covariance(V2, V1.shape[0] // 2)
    n = V1.shape[0] // 2
    M = np.linalg.inv(V1) + np.linalg.inv(V2)
    ld = _logdet(M)
    return float(abs(np.exp(n * np.log(2.0) - 0.5 * ld)))


def fidelity_pure(V1, V2, purity_tol=1e-6):
    """Fidelity between two pure Gaussian states given their covariances.

    Raises:
        InvalidInput: if either covariance has ``|det V - 1| > purity_tol``.
    """
    V1 = check_covariance(V1)
    V2 = check_covariance(V2, V1.shape[0] // 2)
    for name, V in (("V1", V1), ("V2", V2)):
        sign, ld = np.linalg.slogdet(V)
        if sign <= 0 or abs(np.expm1(ld)) > purity_tol:
            raise InvalidInput(f"{name} is not a pure-state covariance (det != 1)")
    return min(gaussian_overlap(V1, V2), 1.0)


def fidelity_with_pure(V_pure, V):
    """``<psi|rho|psi> = 2^N / sqrt(det(V_pure + V))`` for pure ``psi`` and any ``rho``."""
    V_pure = check_covariance(V_pure)
    V = check_covariance(V, V_pure.shape[0] // 2)
    n = V.shape[0] // 2
    return float(np.exp(n * np.log(2.0) - 0.5 * _logdet(np.asarray(V_pure) + V)).real)


def passive_symplectic(U):
    """Quadrature matrix of the passive transformation ``c = U a``."""
    U = np.asarray(U, dtype=complex)
    return np.block([[U.real, -U.imag], [U.imag, U.real]])
