"""Nonhomogeneous boundary value problems and eigenfunction expansions."""

from dataclasses import dataclass

import numpy as np

from .core import as_boundary, semi_inner_product, semi_norm
from .eigenbasis import orthonormal_eigen_set
from .errors import PreconditionError, StructuralError
from .propagation import fundamental_solutions, step_residual
from .spectrum import EIG_TOL
from .weyl import GreenKernel, _m_raw

QUALIFY_TOL = 1e-8
PRECONDITION_TOL = 1e-9


@dataclass(frozen=True)
class BvpSolution:
    lam: complex
    z: np.ndarray
    method: str
    boundary_residual: float
    step_residual: float
    consistency_residual: float = 0.0
    nullspace: np.ndarray = None


@dataclass(frozen=True)
class ExpansionResult:
    coefficients: np.ndarray
    reconstruction: np.ndarray
    residual_seminorm: float
    parseval_gap: float
    norm_sq: float


def _vector_sequence(sys, f, name):
    if f is None:
        return sys.zeros()
    f = np.asarray(f, dtype=complex)
    if f.shape != (sys.N + 2, 2 * sys.n):
        raise StructuralError(f"{name} must have shape {(sys.N + 2, 2 * sys.n)}, got {f.shape}")
    return f


def _xi(sys, xi):
    if xi is None:
        return np.zeros(sys.n, dtype=complex)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.shape != (sys.n,):
        raise StructuralError(f"boundary datum must have length {sys.n}")
    return xi


def _finish(sys, alpha, beta, lam, z, f, xi, method, **extra):
    bres = max(np.abs(alpha @ z[0] - xi).max(), np.abs(beta @ z[-1]).max())
    return BvpSolution(complex(lam), z, method, float(bres), step_residual(sys, lam, z, f), **extra)


def solve_bvp(sys, alpha, beta, lam, f=None, xi=None, method="closed_form", eig_tol=EIG_TOL):
    """Unique solution of z_k = T_k(lam) z_{k+1} - J Psi_k f_k, alpha z_0 = xi, beta z_{N+1} = 0.

    ``method`` is "closed_form" (prefix sums over the fundamental matrix,
    O(N)) or "kernel" (explicit Green kernel summation, O(N^2)).
    """
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    lam = complex(lam)
    f = _vector_sequence(sys, f, "f")
    xi = _xi(sys, xi)
    N = sys.N
    if method == "kernel":
        G = GreenKernel(sys, alpha, beta, lam, eig_tol)
        z = G.apply(f) + G.X @ xi
    elif method == "closed_form":
        M, fp, _ = _m_raw(sys, alpha, beta, lam, eig_tol)
        fpc = fundamental_solutions(sys, alpha, lam.conjugate())
        h = np.einsum("jab,jb->ja", sys.Psi, f[: N + 1])
        Zhc, Ztc = fpc.Zhat[: N + 1], fpc.Ztilde[: N + 1]
        # sum over all j of [M Ztilde_j(conj)^* + Zhat_j(conj)^*] Psi_j f_j
        a = M @ np.einsum("jbi,jb->i", Ztc.conj(), h) + np.einsum("jbi,jb->i", Zhc.conj(), h)
        # running sum over j < k of J Phi_j(conj)^* Psi_j f_j
        terms = np.einsum("ab,jcb,jc->ja", sys.J, fpc.Phi[: N + 1].conj(), h)
        prefix = np.concatenate([np.zeros((1, 2 * sys.n)), np.cumsum(terms, axis=0)])
        z = fp.Ztilde @ a + np.einsum("kab,kb->ka", fp.Phi, prefix)
        z = z + (fp.Zhat + fp.Ztilde @ M) @ xi
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(sys, alpha, beta, lam, z, f, xi, method)


def stacked_matrices(sys, alpha, beta):
    """A0, A1 with (A0 + lam A1) vec(z) = rhs encoding the whole boundary value problem.

    Rows: 2n(N+1) step equations z_k - T_k(lam) z_{k+1}, then alpha z_0 and
    beta z_{N+1}.  Unknowns: z_0..z_{N+1} stacked.
    """
    n2 = 2 * sys.n
    N = sys.N
    m = n2 * (N + 2)
    A0 = np.zeros((m, m), dtype=complex)
    A1 = np.zeros_like(A0)
    for k in range(N + 1):
        r = slice(n2 * k, n2 * (k + 1))
        A0[r, n2 * k : n2 * (k + 1)] = np.eye(n2)
        A0[r, n2 * (k + 1) : n2 * (k + 2)] = -sys.S[k]
        A1[r, n2 * (k + 1) : n2 * (k + 2)] = -sys.V[k]
    A0[n2 * (N + 1) : n2 * (N + 1) + sys.n, :n2] = alpha
    A0[n2 * (N + 1) + sys.n :, n2 * (N + 1) :] = beta
    return A0, A1


def pencil_eigenvalues(sys, alpha, beta):
    """Finite generalized eigenvalues of the stacked pencil (QZ)."""
    from scipy.linalg import eigvals

    A0, A1 = stacked_matrices(sys, alpha, beta)
    w = eigvals(A0, -A1)
    return w[np.isfinite(w)]


def solve_bvp_dense_oracle(sys, alpha, beta, lam, f=None, xi=None, null_tol=1e-10):
    """Least-squares solve of the stacked linear system; works at eigenvalues too."""
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    lam = complex(lam)
    f = _vector_sequence(sys, f, "f")
    xi = _xi(sys, xi)
    N, n2 = sys.N, 2 * sys.n
    A0, A1 = stacked_matrices(sys, alpha, beta)
    A = A0 + lam * A1
    rhs = np.concatenate([
        (-np.einsum("ab,kbc,kc->ka", sys.J, sys.Psi, f[: N + 1])).reshape(-1),
        xi,
        np.zeros(sys.n),
    ])
    x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    consistency = float(np.linalg.norm(A @ x - rhs) / max(1.0, np.linalg.norm(rhs)))
    _, sv, Vh = np.linalg.svd(A)
    null = Vh[sv <= null_tol * sv[0]].conj().T
    null = null.reshape(N + 2, n2, -1)
    z = x.reshape(N + 2, n2)
    return _finish(
        sys, alpha, beta, lam, z, f, xi, "dense_oracle",
        consistency_residual=consistency, nullspace=null,
    )


def fourier_coefficients(sys, eigset, zhat):
    """c_a = <z^[a], zhat>_Psi for every orthonormal eigenfunction."""
    return np.array([semi_inner_product(sys, e.z, zhat) for e in eigset.entries], dtype=complex)


def _check_solution(sys, alpha, beta, zhat, f):
    zhat = _vector_sequence(sys, zhat, "zhat")
    f = _vector_sequence(sys, f, "f")
    scale = 1.0 + np.abs(zhat).max() + np.abs(f).max()
    res = max(
        step_residual(sys, 0.0, zhat, f),
        np.abs(alpha @ zhat[0]).max(),
        np.abs(beta @ zhat[-1]).max(),
    ) / scale
    if res > PRECONDITION_TOL:
        raise PreconditionError(
            f"zhat does not solve the boundary value problem at lambda = 0 (residual {res:.3g})",
            residual=res,
        )
    return zhat, f


def _eigset(sys, alpha, beta, eigset):
    return orthonormal_eigen_set(sys, alpha, beta) if eigset is None else eigset


def expand(sys, alpha, beta, zhat, f, eigset=None):
    """Eigenfunction expansion of a solution of the lambda = 0 problem with Parseval check."""
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    zhat, f = _check_solution(sys, alpha, beta, zhat, f)
    eigset = _eigset(sys, alpha, beta, eigset)
    c = fourier_coefficients(sys, eigset, zhat)
    recon = sys.zeros()
    for ck, e in zip(c, eigset.entries):
        recon = recon + ck * e.z
    norm_sq = semi_norm(sys, zhat) ** 2
    return ExpansionResult(
        coefficients=c,
        reconstruction=recon,
        residual_seminorm=semi_norm(sys, zhat - recon),
        parseval_gap=float(abs(norm_sq - np.sum(np.abs(c) ** 2))),
        norm_sq=norm_sq,
    )


def truncation_bound(sys, alpha, beta, zhat, f, a, eigset=None):
    """(||zhat^a||^2, a^-2 ||f||^2) where zhat^a drops eigenvalues with |lam_j| <= a."""
    if not a > 0:
        raise ValueError("a must be positive")
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    zhat, f = _check_solution(sys, alpha, beta, zhat, f)
    eigset = _eigset(sys, alpha, beta, eigset)
    c = fourier_coefficients(sys, eigset, zhat)
    za = zhat.copy()
    for ck, e in zip(c, eigset.entries):
        if abs(e.lam) <= a:
            za = za - ck * e.z
    return semi_norm(sys, za) ** 2, semi_norm(sys, f) ** 2 / a**2


def pointwise_expansion(sys, alpha, beta, lam, g, eigset=None, qualify_tol=QUALIFY_TOL):
    """sum_j (lam_j - lam)^{-1} d_j z^[j] with d_j = <z^[j], g>_Psi.

    Only classes [g] spanned by eigenfunctions qualify; the result then
    coincides pointwise with the boundary value problem solution for g.
    """
    alpha = as_boundary(alpha, sys.n)
    beta = as_boundary(beta, sys.n)
    lam = complex(lam)
    g = _vector_sequence(sys, g, "g")
    eigset = _eigset(sys, alpha, beta, eigset)
    d = fourier_coefficients(sys, eigset, g)
    rest = g.copy()
    z = sys.zeros()
    for dk, e in zip(d, eigset.entries):
        if abs(e.lam - lam) <= EIG_TOL * (1 + abs(lam)):
            raise PreconditionError(f"lambda={lam} is an eigenvalue")
        rest = rest - dk * e.z
        z = z + dk / (e.lam - lam) * e.z
    res = semi_norm(sys, rest)
    if res > qualify_tol * (1 + semi_norm(sys, g)):
        raise PreconditionError(
            f"[g] is not in the span of the eigenfunctions (residual {res:.3g})", residual=res
        )
    xi = np.zeros(sys.n)
    return _finish(sys, alpha, beta, lam, z, g, xi, "eigen_expansion")
