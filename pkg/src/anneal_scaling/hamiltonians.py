"""Annealing Hamiltonians, spectra, and gap profiles.

Two models share the linear schedule H(s) = -(1-s)*driver + s*problem with
normalized time s in [0, 1]:

* single qubit with slope parameter mu:
      H(s) = -(1-s) * sigma_x + s * mu * sigma_z
* n qubits with a flat (square) barrier added to the sloped cost, restricted
  to the Hamming-symmetric subspace.  In the weight basis |w> (w = number of
  qubits in |1>) the matrix is real symmetric tridiagonal:
      diagonal    H[w, w]   = s * (mu * (n - 2w) + b(w))
      off-diag    H[w, w+1] = -(1-s) * sqrt((w+1)(n-w))
  with b(w) = barrier_height on barrier_lo <= w <= barrier_hi, else 0.

Conventions: sigma_z|0> = +|0>, sigma_z|1> = -|1>, sigma_x|0> = |1>.  For
mu > 0 and no barrier the final ground state is the all-ones string (w = n).
"""

from dataclasses import dataclass
from math import ceil

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DegenerateGroundStateError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

# gaps below this are treated as degenerate
GAP_FLOOR = 1e-12


@dataclass(frozen=True)
class SlopeProblem:
    """Single-qubit annealing instance with slope parameter mu > 0."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class BarrierProblem:
    """n-qubit Hamming-symmetric instance with a square barrier.

    The barrier support [barrier_lo, barrier_hi] is an inclusive interval in
    Hamming-weight coordinates.  barrier_height = 0 reduces the model exactly
    to n decoupled SlopeProblem qubits.
    """

    n: int
    mu: float
    barrier_height: float = 0.0
    barrier_lo: int = 0
    barrier_hi: int = 0

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.barrier_height < 0:
            raise ValueError(f"barrier_height must be nonnegative, got {self.barrier_height}")
        if not (0 <= self.barrier_lo <= self.barrier_hi <= self.n):
            raise ValueError(
                f"barrier support must satisfy 0 <= lo <= hi <= n, "
                f"got [{self.barrier_lo}, {self.barrier_hi}] with n={self.n}"
            )

    @classmethod
    def with_default_barrier(cls, n: int, mu: float = 1.0) -> "BarrierProblem":
        """Square barrier of height and width ceil(n^(1/4)), centered at w = ceil(n/2)."""
        height = ceil(n ** 0.25)
        width = ceil(n ** 0.25)
        center = ceil(n / 2)
        lo = max(0, center - (width - 1) // 2)
        hi = min(n, lo + width - 1)
        return cls(n=n, mu=mu, barrier_height=float(height), barrier_lo=lo, barrier_hi=hi)

    @property
    def dim(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class Spectrum:
    """Instantaneous eigenvalues (ascending) and phase-fixed ground state."""

    eigenvalues: np.ndarray
    ground_state: np.ndarray

    @property
    def gap(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0])


def _check_s(s: float):
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"schedule parameter s must lie in [0, 1], got {s}")


def slope_hamiltonian(problem: SlopeProblem, s: float) -> np.ndarray:
    """2x2 matrix -(1-s)*sigma_x + s*mu*sigma_z."""
    _check_s(s)
    return -(1.0 - s) * SIGMA_X + s * problem.mu * SIGMA_Z


def subspace_tridiagonal(problem: BarrierProblem, s: float):
    """Diagonal and off-diagonal of the (n+1)-dim symmetric-subspace matrix."""
    _check_s(s)
    n = problem.n
    w = np.arange(n + 1, dtype=float)
    barrier = np.where(
        (w >= problem.barrier_lo) & (w <= problem.barrier_hi),
        problem.barrier_height,
        0.0,
    )
    diag = s * (problem.mu * (n - 2.0 * w) + barrier)
    off = -(1.0 - s) * np.sqrt((w[:-1] + 1.0) * (n - w[:-1]))
    return diag, off


def subspace_hamiltonian(problem: BarrierProblem, s: float) -> np.ndarray:
    """Dense (n+1)x(n+1) real symmetric tridiagonal matrix at schedule point s."""
    diag, off = subspace_tridiagonal(problem, s)
    h = np.diag(diag)
    idx = np.arange(problem.n)
    h[idx, idx + 1] = off
    h[idx + 1, idx] = off
    return h


def hamiltonian(problem, s: float) -> np.ndarray:
    """Dense matrix for either problem type."""
    if isinstance(problem, SlopeProblem):
        return slope_hamiltonian(problem, s)
    if isinstance(problem, BarrierProblem):
        return subspace_hamiltonian(problem, s)
    raise TypeError(f"unsupported problem type: {type(problem).__name__}")


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Make the first non-negligible amplitude real positive (in place safe copy).

    The threshold is relative so that sub-roundoff junk in a leading component
    cannot flip the convention.
    """
    scale = np.linalg.norm(v)
    idx = np.flatnonzero(np.abs(v) > 1e-12 * scale)
    if idx.size == 0:
        return v
    lead = v[idx[0]]
    if np.iscomplexobj(v):
        return v * (lead.conjugate() / abs(lead))
    return -v if lead < 0 else v


def spectrum_at(problem, s: float) -> Spectrum:
    """Ascending eigenvalues and the phase-fixed normalized ground state.

    Raises DegenerateGroundStateError if the gap falls below resolution
    (cannot happen for mu > 0, barrier_height >= 0 at s < 1; this guards
    pathological barrier placements at s = 1).
    """
    _check_s(s)
    if isinstance(problem, SlopeProblem):
        vals, vecs = np.linalg.eigh(slope_hamiltonian(problem, s))
    else:
        diag, off = subspace_tridiagonal(problem, s)
        vals, vecs = eigh_tridiagonal(diag, off)
    gap = vals[1] - vals[0]
    if gap < GAP_FLOOR:
        raise DegenerateGroundStateError(
            f"gap {gap:.3e} below {GAP_FLOOR:.0e} at s={s} for {problem}"
        )
    ground = fix_phase(np.ascontiguousarray(vecs[:, 0]))
    ground = ground / np.linalg.norm(ground)
    return Spectrum(eigenvalues=vals, ground_state=ground)


def gap(problem, s: float) -> float:
    """Spectral gap E1 - E0 at schedule point s."""
    return spectrum_at(problem, s).gap


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f, a: float, b: float, tol: float) -> float:
    """Golden-section search for the minimum of a unimodal f on [a, b].

    Returns the midpoint of the final bracket (width <= tol).
    """
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def min_gap(problem, scan_points: int = 2001, s_accuracy: float = 1e-8):
    """Location and value of the minimum spectral gap over s in [0, 1].

    Coarse scan followed by golden-section refinement of the best bracket;
    the returned s_star is accurate to s_accuracy.
    """
    s_grid = np.linspace(0.0, 1.0, scan_points)
    gaps = np.array([gap(problem, s) for s in s_grid])
    i = int(np.argmin(gaps))
    if i == 0 or i == scan_points - 1:
        return float(s_grid[i]), float(gaps[i])
    s_star = golden_section_minimize(
        lambda s: gap(problem, s), s_grid[i - 1], s_grid[i + 1], s_accuracy
    )
    return float(s_star), gap(problem, s_star)
