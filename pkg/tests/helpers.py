"""Shared builders and property measurements for the test suite."""

import numpy as np

from dsspec import (
    block_ab,
    conditioned_problem,
    eigenvalues,
    expand,
    fundamental_solutions,
    green_bessel_gap,
    imaginary_excess,
    m_function,
    m_integral_representation,
    m_residue,
    orthonormal_eigen_set,
    orthonormalize,
    semi_inner_product,
    sl_scalar,
    solve_bvp,
    solve_bvp_dense_oracle,
    spectral_function,
    transition,
    truncation_bound,
)

E1 = np.array([[1.0, 0.0]])
E2 = np.array([[0.0, 1.0]])
TOP2 = np.hstack([np.eye(2), np.zeros((2, 2))])
BOTTOM2 = np.hstack([np.zeros((2, 2)), np.eye(2)])
MIXED2 = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])


def closing_example():
    """Scalar system with v = (0, 1, 2) and Dirichlet-type ends alpha = beta = (1, 0)."""
    return sl_scalar([0, 1, 2]), E1, E1


def block_example(beta, a=2.0, b=3.0, N=4):
    return block_ab(a, b, N), TOP2, beta


def draw_conditioned(rng, max_n=3, max_N=8):
    """Random (system, alpha, beta) with the definiteness condition and bounded growth.

    (n, N) is redrawn jointly when no admissible system is found quickly.
    """
    while True:
        n = int(rng.integers(1, max_n + 1))
        N = int(rng.integers(0, max_N + 1))
        try:
            return conditioned_problem(rng, n, N, tries=5)
        except RuntimeError:
            continue


def complex_normal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def measure_properties(sys, alpha, beta, rng):
    """Worst-case defects for every structural property on one system.

    Every value is a defect that should be small; PSD checks report the
    negated smallest eigenvalue.
    """
    n, N = sys.n, sys.N
    J = sys.J
    out = {}
    lam = complex(rng.normal(), abs(rng.normal()) + 0.2)

    out["symplectic"] = max(
        np.abs(transition(sys, k, lam.conjugate()).conj().T @ J @ transition(sys, k, lam) - J).max()
        for k in range(N + 1)
    )
    P, Pc = fundamental_solutions(sys, alpha, lam).Phi, fundamental_solutions(sys, alpha, lam.conjugate()).Phi
    W = np.einsum("kai,ab,kbj->kij", Pc.conj(), J, P)
    # rounding in W_k scales with the operands, not with W_0
    size = max(np.linalg.norm(x, 2) * np.linalg.norm(y, 2) for x, y in zip(Pc, P))
    out["wronskian"] = float(np.abs(W - W[0]).max() / size)

    M = m_function(sys, alpha, beta, lam).M
    Mc = m_function(sys, alpha, beta, lam.conjugate()).M
    out["reflection"] = float(np.abs(Mc - M.conj().T).max() / max(1.0, np.abs(M).max()))
    out["nevanlinna"] = float(-np.linalg.eigvalsh((M - M.conj().T) / 2j).min())

    f = complex_normal(rng, (N + 2, 2 * n))
    a = solve_bvp(sys, alpha, beta, lam, f)
    b = solve_bvp(sys, alpha, beta, lam, f, method="kernel")
    c = solve_bvp_dense_oracle(sys, alpha, beta, lam, f)
    scale = 1 + np.abs(c.z).max()
    out["bvp"] = float(max(np.abs(a.z - c.z).max(), np.abs(b.z - c.z).max()) / scale)

    spec = eigenvalues(sys, alpha, beta)
    eigset = orthonormal_eigen_set(sys, alpha, beta, spec)
    if len(eigset):
        F = eigset.functions.transpose(1, 2, 0)
        out["orthonormality"] = float(np.abs(semi_inner_product(sys, F, F) - np.eye(len(eigset))).max())

    if not any(abs(e.lam) < 1e-6 for e in spec.eigenvalues):
        zhat = solve_bvp(sys, alpha, beta, 0.0, f).z
        ex = expand(sys, alpha, beta, zhat, f, eigset)
        out["expansion_residual"] = ex.residual_seminorm / (1 + np.sqrt(ex.norm_sq))
        out["parseval"] = ex.parseval_gap / (1 + ex.norm_sq)
        out["truncation"] = max(
            lhs - rhs for lhs, rhs in (truncation_bound(sys, alpha, beta, zhat, f, t, eigset) for t in (0.5, 1.0, 3.0))
        )

    tau = spectral_function(sys, alpha, beta, eigset)
    lams = [e.lam for e in spec.eigenvalues]
    res_err, jump_err = 0.0, 0.0
    for ev in spec.eigenvalues:
        r = m_residue(sys, alpha, beta, ev, orthonormalize(sys, alpha, beta, ev), lams, tol=np.inf)
        res_err = max(res_err, r.rel_error)
        jump_err = max(jump_err, float(np.abs(tau.jump_at(r.lam) + r.L_minus1).max()))
    out["residue"] = res_err
    out["tau_jump"] = jump_err

    rep = m_integral_representation(sys, alpha, beta, lam, tau=tau)
    out["representation"] = rep.gap / max(1.0, np.abs(rep.M_direct).max())
    out["imaginary_excess"] = float(-np.linalg.eigvalsh(imaginary_excess(sys, alpha, beta, 2j, tau)).min())
    out["green_bessel"] = max(
        float(-np.linalg.eigvalsh(green_bessel_gap(sys, alpha, beta, lam, k, eigset)).min()) for k in range(N + 2)
    )
    return out


PROPERTY_LIMITS = {
    "symplectic": 1e-12,
    "wronskian": 1e-10,
    "reflection": 1e-10,
    "nevanlinna": 1e-10,
    "bvp": 1e-9,
    "orthonormality": 1e-9,
    "expansion_residual": 1e-8,
    "parseval": 1e-8,
    "residue": 1e-6,
    "tau_jump": 1e-9,
    "truncation": 1e-9,
    "representation": 1e-8,
    "green_bessel": 1e-9,
    "imaginary_excess": 1e-9,
}
