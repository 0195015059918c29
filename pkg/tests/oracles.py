"""Independent brute-force oracles used only by the tests.

Nothing here shares code with the production integrators: evolution is
re-done with plain explicit RK4 stepping, and the n-qubit model is built in
the full 2^n Hilbert space from single-qubit operators.
"""

import math

import numpy as np

from anneal_scaling.hamiltonians import BarrierProblem, hamiltonian


def rk4_final_state(problem, tau, n_steps):
    """Plain 4th-order explicit integration of i dpsi/ds = tau H(s) psi."""
    from anneal_scaling.hamiltonians import spectrum_at

    psi = spectrum_at(problem, 0.0).ground_state.astype(np.complex128)
    ds = 1.0 / n_steps

    def rhs(s, v):
        return -1j * tau * (hamiltonian(problem, s) @ v)

    for i in range(n_steps):
        s = i / n_steps  # exact grid, no accumulation drift past 1.0
        k1 = rhs(s, psi)
        k2 = rhs(s + ds / 2, psi + ds / 2 * k1)
        k3 = rhs(s + ds / 2, psi + ds / 2 * k2)
        k4 = rhs((i + 1) / n_steps, psi + ds * k3)
        psi = psi + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def rk4_success_probability(problem, tau, n_steps):
    from anneal_scaling.hamiltonians import spectrum_at

    psi = rk4_final_state(problem, tau, n_steps)
    gs1 = spectrum_at(problem, 1.0).ground_state
    return float(abs(np.vdot(gs1, psi)) ** 2)


def _weights(n):
    """Hamming weight of every computational basis state of n qubits."""
    return np.array([bin(x).count("1") for x in range(2 ** n)])


def full_space_hamiltonian(problem: BarrierProblem, s: float) -> np.ndarray:
    """2^n-dimensional matrix -(1-s)*sum sigma_x + s*(mu*sum sigma_z + b)."""
    n = problem.n
    dim = 2 ** n
    w = _weights(n)
    barrier = np.where(
        (w >= problem.barrier_lo) & (w <= problem.barrier_hi),
        problem.barrier_height, 0.0,
    )
    h = np.diag(s * (problem.mu * (n - 2.0 * w) + barrier))
    for x in range(dim):
        for bit in range(n):
            h[x, x ^ (1 << bit)] += -(1.0 - s)
    return h


def symmetric_subspace_isometry(n: int) -> np.ndarray:
    """Columns are the normalized uniform superpositions of fixed Hamming weight."""
    w = _weights(n)
    iso = np.zeros((2 ** n, n + 1))
    for weight in range(n + 1):
        mask = w == weight
        iso[mask, weight] = 1.0 / math.sqrt(mask.sum())
    return iso


def full_space_success_probability(problem: BarrierProblem, tau, n_steps):
    """RK4 in the full 2^n space; success read off the diagonal H(1) minimum."""
    n = problem.n
    dim = 2 ** n
    psi = np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)
    ds = 1.0 / n_steps

    w = _weights(n)
    barrier = np.where(
        (w >= problem.barrier_lo) & (w <= problem.barrier_hi),
        problem.barrier_height, 0.0,
    )
    diag_problem = problem.mu * (n - 2.0 * w) + barrier
    flip = np.array([[x ^ (1 << b) for b in range(n)] for x in range(dim)])

    # sum over single-bit flips, vectorized via fancy indexing
    def rhs(s, v):
        flipped = v[flip].sum(axis=1)
        return -1j * tau * (s * diag_problem * v - (1.0 - s) * flipped)

    for i in range(n_steps):
        s = i / n_steps
        k1 = rhs(s, psi)
        k2 = rhs(s + ds / 2, psi + ds / 2 * k1)
        k3 = rhs(s + ds / 2, psi + ds / 2 * k2)
        k4 = rhs((i + 1) / n_steps, psi + ds * k3)
        psi = psi + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    ground_index = int(np.argmin(diag_problem))
    return float(abs(psi[ground_index]) ** 2)
