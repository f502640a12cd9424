"""Spectral step function, Riemann-Stieltjes sums and the integral form of M."""

import bisect
from dataclasses import dataclass

import numpy as np

from .core import as_boundary
from .eigenbasis import orthonormal_eigen_set
from .errors import DomainError, IntegrandSingularityError, NumericalConsistencyError
from .bvp import stacked_matrices
from .weyl import m_function

M1_SAMPLES = (1e6, 1e7)
M1_FLOOR = 1e-8


@dataclass(frozen=True)
class SpectralStepFunction:
    """Right-continuous step function with tau(0) = 0 and jumps D_j at t_j.

    For t > 0 it sums D_j over 0 < t_j <= t; for t < 0 it is minus the sum
    over t < t_j <= 0.
    """

    points: tuple
    jumps: tuple
    dim: int = None

    def __post_init__(self):
        order = np.argsort(self.points, kind="stable")
        object.__setattr__(self, "points", tuple(float(self.points[i]) for i in order))
        object.__setattr__(self, "jumps", tuple(np.asarray(self.jumps[i]) for i in order))

    @property
    def size(self):
        if self.dim is not None:
            return self.dim
        return self.jumps[0].shape[0] if self.jumps else 0

    def _sum(self, lo, hi):
        # sum of jumps with lo < t_j <= hi
        i = bisect.bisect_right(self.points, lo)
        j = bisect.bisect_right(self.points, hi)
        total = np.zeros((self.size, self.size), dtype=complex)
        for D in self.jumps[i:j]:
            total = total + D
        return total

    def tau_at(self, t):
        if t > 0:
            return self._sum(0.0, t)
        if t < 0:
            return -self._sum(t, 0.0)
        return np.zeros((self.size, self.size), dtype=complex)

    def jump_at(self, t):
        """tau(t+) - tau(t-)."""
        return self._sum(np.nextafter(t, -np.inf), t)


def spectral_function(sys, alpha, beta, eigset=None):
    """tau with jump sum eta eta^* at each eigenvalue."""
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    if eigset is None:
        eigset = orthonormal_eigen_set(sys, alpha, beta)
    groups = {}
    for e in eigset.entries:
        groups.setdefault(e.lam, np.zeros((sys.n, sys.n), dtype=complex))
        groups[e.lam] = groups[e.lam] + np.outer(e.eta, e.eta.conj())
    pts = list(groups)
    return SpectralStepFunction(tuple(pts), tuple(groups[p] for p in pts), sys.n)


def rs_step_integral(tau, f, a=-np.inf, b=np.inf):
    """Riemann-Stieltjes integral of f against tau over [a, b] as a finite sum.

    With tau(a-) := tau(a) and tau(b+) := tau(b) only jumps in (a, b]
    contribute.  ``f`` may return a scalar or an n x n matrix.
    """
    if a > b:
        raise ValueError("need a <= b")
    total = np.zeros((tau.size, tau.size), dtype=complex)
    for t, D in zip(tau.points, tau.jumps):
        if not (a < t <= b):
            continue
        try:
            with np.errstate(divide="raise", invalid="raise"):
                val = f(t)
        except (ZeroDivisionError, FloatingPointError) as exc:
            raise IntegrandSingularityError(f"integrand singular at jump t={t}") from exc
        val = np.asarray(val)
        if not np.all(np.isfinite(val)):
            raise IntegrandSingularityError(f"integrand not finite at jump t={t}")
        total = total + (val * D if val.ndim == 0 else val @ D)
    return total


@dataclass(frozen=True)
class IntegralRepresentation:
    M_rebuilt: np.ndarray
    M_direct: np.ndarray
    gap: float
    M0: np.ndarray
    M1: np.ndarray
    im_gap: float

    def __iter__(self):
        return iter((self.M_rebuilt, self.M_direct, self.gap))


def _herm(A):
    return (A + A.conj().T) / 2


def m_stacked(sys, alpha, beta, lam):
    """M(lam) = alpha J X_0 from one dense solve for the Weyl solution X.

    Unlike shooting this stays accurate for large |lam|, where the leading
    powers of lam cancel in the fundamental matrix.
    """
    A0, A1 = stacked_matrices(sys, alpha, beta)
    n, n2 = sys.n, 2 * sys.n
    rhs = np.zeros((A0.shape[0], n), dtype=complex)
    rhs[n2 * (sys.N + 1) : n2 * (sys.N + 1) + n] = np.eye(n)
    X0 = np.linalg.solve(A0 + lam * A1, rhs)[:n2]
    return alpha @ sys.J @ X0


def linear_term(sys, alpha, beta, samples=M1_SAMPLES, floor=M1_FLOOR):
    """lim M(i mu)/(i mu) from two large mu with one Richardson step in 1/mu."""
    mu1, mu2 = samples
    g1 = m_stacked(sys, alpha, beta, 1j * mu1) / (1j * mu1)
    g2 = m_stacked(sys, alpha, beta, 1j * mu2) / (1j * mu2)
    M1 = _herm((mu2 * g2 - mu1 * g1) / (mu2 - mu1))
    if np.linalg.norm(M1, 2) < floor:
        return np.zeros_like(M1)
    w = np.linalg.eigvalsh(M1)
    if w[0] < -floor * max(1.0, abs(w[-1])):
        raise NumericalConsistencyError(
            f"linear coefficient is not positive semidefinite (min eigenvalue {w[0]:.3g})",
            {"min_eig": float(w[0])},
        )
    return M1


def m_integral_representation(sys, alpha, beta, lam, eigset=None, tau=None):
    """Rebuild M(lam) = M0 + lam M1 + int (1/(t - lam) - t/(1 + t^2)) dtau."""
    lam = complex(lam)
    if lam.imag == 0:
        raise DomainError("the integral representation needs a non-real lambda")
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    if tau is None:
        tau = spectral_function(sys, alpha, beta, eigset)
    M0 = _herm(m_function(sys, alpha, beta, 1j).M)
    M1 = linear_term(sys, alpha, beta)
    integral = rs_step_integral(tau, lambda t: 1 / (t - lam) - t / (1 + t * t))
    rebuilt = M0 + lam * M1 + integral
    direct = m_function(sys, alpha, beta, lam).M
    gap = float(np.linalg.norm(rebuilt - direct, 2))
    im_direct = (direct - direct.conj().T) / 2j
    im_rebuilt = lam.imag * M1 + rs_step_integral(tau, lambda t: (1 / (t - lam)).imag)
    im_gap = float(np.linalg.norm(im_direct - im_rebuilt, 2))
    return IntegralRepresentation(rebuilt, direct, gap, M0, M1, im_gap)


def imaginary_excess(sys, alpha, beta, lam, tau=None):
    """im M(lam)/im lam minus the integral of im (t - lam)^{-1}/im lam dtau (PSD)."""
    lam = complex(lam)
    if lam.imag == 0:
        raise DomainError("needs a non-real lambda")
    if tau is None:
        tau = spectral_function(sys, alpha, beta)
    M = m_function(sys, alpha, beta, lam).M
    im_M = (M - M.conj().T) / 2j
    integral = rs_step_integral(tau, lambda t: (1 / (t - lam)).imag)
    return _herm((im_M - integral) / lam.imag)
