"""M(lam)-function, Weyl solution, Green kernel and residues of M."""

from dataclasses import dataclass

import numpy as np

from .core import as_boundary
from .errors import EigenvalueProximityError, NumericalConsistencyError
from .propagation import fundamental_solutions
from .spectrum import EIG_TOL


@dataclass(frozen=True)
class MFunctionValue:
    lam: complex
    M: np.ndarray
    cond: float


def _m_raw(sys, alpha, beta, lam, eig_tol=None):
    fp = fundamental_solutions(sys, alpha, lam)
    B = beta @ fp.Ztilde[-1]
    C = beta @ fp.Zhat[-1]
    sv = np.linalg.svd(B, compute_uv=False)
    if eig_tol is not None:
        scale = np.linalg.norm(fp.Ztilde[-1], 2)
        if sv[-1] <= eig_tol * scale:
            raise EigenvalueProximityError(
                f"lambda={lam} is numerically an eigenvalue", lam=lam, sigma_ratio=sv[-1] / scale
            )
    M = -np.linalg.solve(B, C)
    return M, fp, sv[0] / sv[-1]


def m_function(sys, alpha, beta, lam, eig_tol=EIG_TOL):
    """M(lam) = -[beta Ztilde_{N+1}]^{-1} beta Zhat_{N+1} by a linear solve."""
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    M, _, cond = _m_raw(sys, alpha, beta, complex(lam), eig_tol)
    return MFunctionValue(complex(lam), M, float(cond))


def weyl_solution(sys, alpha, beta, lam, eig_tol=EIG_TOL):
    """X = Zhat + Ztilde M, shape (N+2, 2n, n): alpha X_0 = I, beta X_{N+1} = 0."""
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    M, fp, _ = _m_raw(sys, alpha, beta, complex(lam), eig_tol)
    return fp.Zhat + fp.Ztilde @ M


class GreenKernel:
    """G_{k,j}(lam) for k, j in [0, N+1].

    G_{k,j} = X_k(lam) Ztilde_j(conj lam)^*  for j < k,
    G_{k,j} = Ztilde_k(lam) X_j(conj lam)^*  for j >= k.
    """

    def __init__(self, sys, alpha, beta, lam, eig_tol=EIG_TOL):
        alpha = as_boundary(alpha, sys.n)
        beta = as_boundary(beta, sys.n)
        lam = complex(lam)
        self.lam = lam
        self.sys = sys
        M, fp, _ = _m_raw(sys, alpha, beta, lam, eig_tol)
        Mc, fpc, _ = _m_raw(sys, alpha, beta, lam.conjugate(), eig_tol)
        self.X = fp.Zhat + fp.Ztilde @ M
        self.Zt = fp.Ztilde
        self.Xc = fpc.Zhat + fpc.Ztilde @ Mc
        self.Ztc = fpc.Ztilde

    def __call__(self, k, j):
        last = self.sys.N + 1
        if not (0 <= k <= last and 0 <= j <= last):
            raise IndexError(f"kernel index ({k}, {j}) outside [0, {last}]")
        if j < k:
            return self.X[k] @ self.Ztc[j].conj().T
        return self.Zt[k] @ self.Xc[j].conj().T

    def row(self, k):
        """G_{k,j} for all j, shape (N+2, 2n, 2n)."""
        return np.array([self(k, j) for j in range(self.sys.N + 2)])

    def dense(self):
        lower = np.einsum("kai,jbi->kjab", self.X, self.Ztc.conj())
        upper = np.einsum("kai,jbi->kjab", self.Zt, self.Xc.conj())
        K = self.sys.N + 2
        mask = np.tril(np.ones((K, K), dtype=bool), -1)
        return np.where(mask[:, :, None, None], lower, upper)

    def apply(self, f):
        """sum_{j=0}^{N} G_{k,j} Psi_j f_j for every k in [0, N+1]."""
        N = self.sys.N
        h = np.einsum("jab,jb->ja", self.sys.Psi, np.asarray(f)[: N + 1])
        out = np.empty((N + 2, 2 * self.sys.n), dtype=complex)
        for k in range(N + 2):
            out[k] = sum(self(k, j) @ h[j] for j in range(N + 1))
        return out


def green_kernel(sys, alpha, beta, lam, eig_tol=EIG_TOL):
    return GreenKernel(sys, alpha, beta, lam, eig_tol)


@dataclass(frozen=True)
class ResidueMatrix:
    lam: float
    L_minus1: np.ndarray
    numeric: np.ndarray
    rel_error: float


def _circle_residue(sys, alpha, beta, center, r, points=16):
    th = 2 * np.pi * (np.arange(points) + 0.5) / points
    acc = 0
    for t in th:
        d = r * np.exp(1j * t)
        M, _, _ = _m_raw(sys, alpha, beta, center + d)
        acc = acc + d * M
    return acc / points


def m_residue(sys, alpha, beta, ev, eta, others=(), tol=1e-6):
    """Residue -sum eta eta^* of M at an eigenvalue, checked against a contour limit.

    ``eta`` is the n x g matrix of orthonormalizing vectors and ``others``
    the remaining eigenvalues (used to keep the sampling circle isolated).
    """
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    lam = float(np.real(ev.lam if hasattr(ev, "lam") else ev))
    eta = np.asarray(eta).reshape(sys.n, -1)
    L = -eta @ eta.conj().T
    gaps = [abs(lam - float(np.real(o))) for o in others if abs(lam - float(np.real(o))) > 0]
    r1 = min(1e-3, min(gaps) / 4) if gaps else 1e-3
    r2 = min(1e-4, r1 / 10)
    v1 = _circle_residue(sys, alpha, beta, lam, r1)
    v2 = _circle_residue(sys, alpha, beta, lam, r2)
    numeric = (r1 * v2 - r2 * v1) / (r1 - r2)
    numeric = (numeric + numeric.conj().T) / 2
    rel = float(np.linalg.norm(numeric - L, 2) / max(1.0, np.linalg.norm(L, 2)))
    if rel > tol:
        raise NumericalConsistencyError(
            f"residue at {lam} disagrees with its contour estimate ({rel:.3g})",
            {"relative_error": rel},
        )
    return ResidueMatrix(lam, L, numeric, rel)


def green_bessel_gap(sys, alpha, beta, lam, k, eigset):
    """sum_s G_{k,s} Psi_s G_{k,s}^* minus sum_j |lam - lam_j|^{-2} z_k z_k^*.

    The result is positive semidefinite for lam off the spectrum.
    """
    G = GreenKernel(sys, alpha, beta, lam)
    row = G.row(k)[: sys.N + 1]
    total = np.einsum("sab,sbc,sdc->ad", row, sys.Psi, row.conj())
    for e in eigset.entries:
        zk = e.z[k]
        total = total - np.outer(zk, zk.conj()) / abs(lam - e.lam) ** 2
    return (total + total.conj().T) / 2
