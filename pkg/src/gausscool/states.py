"""Elementary Gaussian maps and the continuous-variable GHZ target.

Mode indices are zero-based throughout the Python API.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from gausscool.exceptions import InvalidInput
from gausscool.gaussian import GaussianMap, compose_maps, covariance_from_map, identity_map


@dataclass(frozen=True)
class GhzSpec:
    """GHZ target: ``N`` modes, momentum-sum squeezing ``r1``, position-difference squeezing ``r2``."""

    n_modes: int
    r1: float
    r2: float

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise InvalidInput(f"GHZ states need n_modes >= 2, got {self.n_modes}")
        if self.r1 < 0 or self.r2 < 0:
            raise InvalidInput("squeezing parameters must be nonnegative")

    @classmethod
    def from_squeezing_fraction(cls, n_modes, fraction1, fraction2=None):
        """Build from squeezing fractions ``1 - exp(-2 r)`` (0.9 means 90%)."""
        if fraction2 is None:
            fraction2 = fraction1
        for f in (fraction1, fraction2):
            if not 0 <= f < 1:
                raise InvalidInput(f"squeezing fraction must lie in [0, 1), got {f}")
        return cls(n_modes, -0.5 * np.log1p(-fraction1), -0.5 * np.log1p(-fraction2))


def _check_mode(n_modes, j, name="j"):
    if int(j) != j or not 0 <= j < n_modes:
        raise InvalidInput(f"mode index {name}={j} out of range for {n_modes} modes")


def squeezer(n_modes, j, r):
    """Single-mode squeezer on mode ``j``: ``a_j -> a_j cosh r + a_j^dag sinh r``."""
    _check_mode(n_modes, j)
    A = np.eye(n_modes, dtype=complex)
    B = np.zeros((n_modes, n_modes), dtype=complex)
    A[j, j] = np.cosh(r)
    B[j, j] = np.sinh(r)
    return GaussianMap(A, B)


def beam_splitter(n_modes, j, l, theta):
    """Beam splitter between modes ``j`` and ``l``.

    Carries a built-in pi phase on mode ``l``, so ``theta = 0`` is not the
    identity: ``a_l -> -a_l cos(theta) + a_j sin(theta)``.
    """
    _check_mode(n_modes, j, "j")
    _check_mode(n_modes, l, "l")
    if j == l:
        raise InvalidInput("beam splitter needs two distinct modes")
    A = np.eye(n_modes, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    A[j, j] = c
    A[l, l] = -c
    A[j, l] = A[l, j] = s
    return GaussianMap(A, np.zeros((n_modes, n_modes), dtype=complex))


def ghz_angles(n_modes):
    """Beam-splitter angles ``theta_n``, ``n = 1..N-1``, with ``cos = 1/sqrt(N-n+1)``."""
    n = np.arange(1, n_modes)
    return np.arctan2(np.sqrt(n_modes - n), 1.0)


def ghz_map(spec):
    """Squeeze mode 1 in momentum and the rest in position, then mix neighbours."""
    N = spec.n_modes
    gmap = squeezer(N, 0, spec.r1)
    for j in range(1, N):
        gmap = compose_maps(squeezer(N, j, -spec.r2), gmap)
    for n, theta in enumerate(ghz_angles(N)):
        gmap = compose_maps(beam_splitter(N, n, n + 1, theta), gmap)
    return gmap


def ghz_covariance(spec):
    return covariance_from_map(ghz_map(spec))


def ghz_eigenvectors(n_modes):
    """Expected squeezed directions of the GHZ covariance.

    Returns:
        (p_sum, x_diffs): the normalized momentum-sum vector and an
        ``(N-1, 2N)`` array of nearest-neighbour position differences
        (not orthogonal to each other).
    """
    p_sum = np.zeros(2 * n_modes)
    p_sum[n_modes:] = 1 / np.sqrt(n_modes)
    x_diffs = np.zeros((n_modes - 1, 2 * n_modes))
    for j in range(n_modes - 1):
        x_diffs[j, j] = 1 / np.sqrt(2)
        x_diffs[j, j + 1] = -1 / np.sqrt(2)
    return p_sum, x_diffs


def compose_script(n_modes, steps):
    """Build a map from a temporal list of elementary operations.

    Each step is a mapping with ``op`` in ``{"squeezer", "beamsplitter"}``
    and its parameters (``j, r`` or ``j, l, theta``). The first step is
    applied first.
    """
    gmap = identity_map(n_modes)
    for i, step in enumerate(steps):
        op = step.get("op")
        if op == "squeezer":
            factor = squeezer(n_modes, step["j"], step["r"])
        elif op == "beamsplitter":
            factor = beam_splitter(n_modes, step["j"], step["l"], step["theta"])
        else:
            raise InvalidInput(f"step {i}: unknown op {op!r}")
        gmap = compose_maps(factor, gmap)
    return gmap


def random_gaussian_map(n_modes, rng=None, max_squeezing=1.0):
    """Random valid map ``A = U cosh(r) W``, ``B = U sinh(r) W*`` (Bloch-Messiah form)."""
    rng = np.random.default_rng(rng)
    if n_modes == 1:
        U = np.exp(2j * np.pi * rng.random((1, 1)))
        W = np.exp(2j * np.pi * rng.random((1, 1)))
    else:
        U = unitary_group.rvs(n_modes, random_state=rng)
        W = unitary_group.rvs(n_modes, random_state=rng)
    r = rng.uniform(-max_squeezing, max_squeezing, n_modes)
    return GaussianMap(U @ np.diag(np.cosh(r)) @ W, U @ np.diag(np.sinh(r)) @ W.conj())
