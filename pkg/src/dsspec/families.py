"""Builders for the standard test systems and random valid systems."""

import numpy as np
from scipy.linalg import expm

from .core import SymplecticSystem, symplectic_unit
from .errors import DomainError


def sl_scalar(v):
    """Scalar system with S_k = I_2 and Psi_k = diag(0, v_{k+1} - v_k).

    ``v`` holds v_0..v_{N+1}; it must start at 0 and be nondecreasing.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DomainError("v needs at least two entries (v_0, v_1)")
    if v[0] != 0:
        raise DomainError("v_0 must be 0")
    dv = np.diff(v)
    if np.any(dv < 0):
        raise DomainError("v must be nondecreasing")
    N = v.size - 2
    S = np.tile(np.eye(2), (N + 1, 1, 1))
    Psi = np.zeros((N + 1, 2, 2))
    Psi[:, 1, 1] = dv
    return SymplecticSystem(S, Psi)


def block_ab(a, b, N):
    """n = 2 system with S_k = I_4 and Psi_k = [[a I, sqrt(ab) I], [sqrt(ab) I, b I]]."""
    if not (a > 0 and b > 0):
        raise DomainError("a and b must be positive")
    if N < 0 or int(N) != N:
        raise DomainError("N must be a nonnegative integer")
    c = np.sqrt(a * b)
    eye = np.eye(2)
    P = np.block([[a * eye, c * eye], [c * eye, b * eye]])
    S = np.tile(np.eye(4), (int(N) + 1, 1, 1))
    return SymplecticSystem(S, np.tile(P, (int(N) + 1, 1, 1)))


def _hermitian(rng, m, complex_):
    A = rng.standard_normal((m, m))
    if complex_:
        A = A + 1j * rng.standard_normal((m, m))
    return (A + A.conj().T) / 2


def random_symplectic(rng, n, scale=0.5, complex_=True):
    """exp(J H) with H Hermitian satisfies S^* J S = J."""
    J = symplectic_unit(n)
    return expm(scale * J @ _hermitian(rng, 2 * n, complex_))


def random_lagrangian_frame(rng, n, complex_=True):
    """2n x n matrix Q with orthonormal columns and Q^* J Q = 0."""
    U = random_symplectic(rng, n, scale=1.0, complex_=complex_)
    Q, _ = np.linalg.qr(U[:, :n])
    return Q


def random_boundary(rng, n, complex_=True):
    return random_lagrangian_frame(rng, n, complex_).conj().T


def random_system(rng, n, N, scale=0.5, complex_=True, min_rank=0, frame_spread=None):
    """Random system passing validation.

    S_k = exp(scale J H_k).  Psi_k = W_k P_k W_k^* where W_k spans a
    Lagrangian subspace and P_k is PSD of random rank in [min_rank, n] with
    nonzero eigenvalues in [0.5, 2].  With ``frame_spread`` the frames W_k
    are perturbations of one common frame by exp(frame_spread J H); the
    shears I - lam J Psi_k then nearly commute, which keeps the growth of
    the fundamental matrix moderate.
    """
    U0 = random_symplectic(rng, n, 1.0, complex_)
    S = np.empty((N + 1, 2 * n, 2 * n), dtype=complex)
    Psi = np.empty_like(S)
    for k in range(N + 1):
        S[k] = random_symplectic(rng, n, scale, complex_)
        if frame_spread is None:
            W = random_symplectic(rng, n, scale, complex_)[:, :n]
        else:
            W = (U0 @ random_symplectic(rng, n, frame_spread, complex_))[:, :n]
        r = int(rng.integers(min_rank, n + 1))
        G = rng.standard_normal((n, n))
        if complex_:
            G = G + 1j * rng.standard_normal((n, n))
        Q, _ = np.linalg.qr(G)
        d = np.zeros(n)
        d[:r] = rng.uniform(0.5, 2.0, r)
        Psi[k] = W @ (Q * d) @ Q.conj().T @ W.conj().T
        Psi[k] = (Psi[k] + Psi[k].conj().T) / 2
    return SymplecticSystem(S, Psi)


def shooting_growth(sys, alpha, lam):
    """max_k ||Phi_k(lam)||_2, the amplification of forward propagation."""
    from .propagation import fundamental_solutions

    Phi = fundamental_solutions(sys, alpha, lam).Phi
    return float(max(np.linalg.norm(P, 2) for P in Phi))


def conditioned_problem(rng, n, N, max_growth=1e3, tries=50, **kwargs):
    """Draw (system, alpha, beta) with the definiteness condition and bounded growth.

    Growth is measured at the largest eigenvalue, estimated independently
    by QZ on the stacked linear pencil.  Shooting loses about
    2 log10(growth) digits, so this keeps the draws inside double precision.
    """
    from .bvp import pencil_eigenvalues
    from .spectrum import check_atkinson

    for _ in range(tries):
        sys = random_system(rng, n, N, **kwargs)
        alpha = random_boundary(rng, n)
        beta = random_boundary(rng, n)
        if not check_atkinson(sys, alpha).holds:
            continue
        w = pencil_eigenvalues(sys, alpha, beta)
        w = w[np.abs(w) < 1e12]
        top = float(np.abs(w).max()) if w.size else 0.0
        if shooting_growth(sys, alpha, top) <= max_growth:
            return sys, alpha, beta
    raise RuntimeError("no admissible draw found")
