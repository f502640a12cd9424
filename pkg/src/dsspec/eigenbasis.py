"""Omega-based orthonormalization of eigenfunctions."""

from dataclasses import dataclass

import numpy as np

from .core import as_boundary
from .errors import AtkinsonError, DegenerateSpectrumError, RankError
from .propagation import fundamental_solutions
from .spectrum import ATK_TOL, eigenvalues

OMEGA_COND_MAX = 1e8


def omega_matrix(sys, alpha, lam):
    """sum_{k=0}^{N} Ztilde_k(lam)^* Psi_k Ztilde_k(lam)."""
    Zt = fundamental_solutions(sys, alpha, lam).Ztilde[: sys.N + 1]
    Y = np.einsum("kba,kbi->kai", sys.psi_factor.conj(), Zt).reshape(-1, sys.n)
    return Y.conj().T @ Y


def _hermitian_roots(Om, atk_tol):
    w, Q = np.linalg.eigh(Om)
    if w[0] <= atk_tol * max(1.0, abs(w[-1])):
        raise AtkinsonError(f"Omega is not positive definite (min eigenvalue {w[0]:.3g})")
    sq = np.sqrt(w)
    return (Q * sq) @ Q.conj().T, (Q / sq) @ Q.conj().T


def _mgs(cols, breakdown=1e-10):
    # modified Gram-Schmidt with one reorthogonalization pass
    out = []
    for v in cols.T:
        v = v.astype(complex).copy()
        norm0 = np.linalg.norm(v)
        for _ in range(2):
            for q in out:
                v -= (q.conj() @ v) * q
        nv = np.linalg.norm(v)
        if nv <= breakdown * max(norm0, 1e-300):
            raise RankError("kernel vectors are numerically dependent")
        out.append(v / nv)
    return np.array(out).T


def orthonormalize(sys, alpha, beta, ev, atk_tol=ATK_TOL):
    """eta = Omega^{-1/2} rho with rho an orthonormal basis of Omega^{1/2} ker.

    Returns an n x g matrix whose columns satisfy eta_i^* Omega eta_l = delta_il.
    """
    alpha = as_boundary(alpha, sys.n)
    if ev.kernel_basis.shape[1] == 0:
        raise RankError("empty kernel basis")
    Om = omega_matrix(sys, alpha, ev.lam)
    w = np.linalg.eigvalsh(Om)
    if w[0] > OMEGA_COND_MAX ** -1 * w[-1]:
        half, inv_half = _hermitian_roots(Om, atk_tol)
        rho = _mgs(half @ ev.kernel_basis)
        return inv_half @ rho
    # Omega too ill-conditioned for its square root: apply the same
    # construction to the compressed Gram matrix on the kernel
    xi = _mgs(ev.kernel_basis)
    Y = np.einsum("kba,kbi->kai", sys.psi_factor.conj(), fundamental_solutions(sys, alpha, ev.lam).Ztilde[: sys.N + 1] @ xi)
    Y = Y.reshape(-1, xi.shape[1])
    _, inv_half = _hermitian_roots(Y.conj().T @ Y, atk_tol)
    return xi @ inv_half


@dataclass(frozen=True)
class EigenEntry:
    lam: float
    eta: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class OrthonormalEigenSet:
    entries: tuple
    omegas: tuple
    spectrum: object = None

    def __len__(self):
        return len(self.entries)

    @property
    def lams(self):
        return np.array([e.lam for e in self.entries], dtype=float)

    @property
    def functions(self):
        """Array (r, N+2, 2n) of the orthonormal eigenfunctions."""
        if not self.entries:
            return np.zeros((0, 0, 0), dtype=complex)
        return np.array([e.z for e in self.entries])

    def projector(self, lam, tol=1e-12):
        """sum of eta eta^* over the entries at eigenvalue lam."""
        etas = [e.eta for e in self.entries if abs(e.lam - lam) <= tol * (1 + abs(lam))]
        if not etas:
            return None
        E = np.array(etas).T
        return E @ E.conj().T


def orthonormal_eigen_set(sys, alpha, beta, spectrum=None, atk_tol=ATK_TOL):
    """Orthonormal eigenfunctions Ztilde(lam_j) eta_j for every eigenvalue."""
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    if spectrum is None:
        spectrum = eigenvalues(sys, alpha, beta)
    if spectrum.degenerate:
        raise DegenerateSpectrumError("every complex number is an eigenvalue")
    if not spectrum.atkinson_holds:
        raise AtkinsonError("the definiteness condition fails for this boundary matrix")
    entries, omegas = [], []
    for ev in spectrum.eigenvalues:
        lam = float(ev.lam.real)
        etas = orthonormalize(sys, alpha, beta, ev, atk_tol)
        Zt = fundamental_solutions(sys, alpha, lam).Ztilde
        omegas.append((lam, omega_matrix(sys, alpha, lam)))
        for eta in etas.T:
            entries.append(EigenEntry(lam, eta, Zt @ eta))
    return OrthonormalEigenSet(tuple(entries), tuple(omegas), spectrum)
