"""Transition matrices and fundamental solutions on [0, N+1]."""

from dataclasses import dataclass

import numpy as np

from .core import as_boundary
from .errors import PropagationOverflowError, StructuralError


def transition(sys, k, lam):
    """S_k + lam V_k."""
    sys.check_index(k)
    return sys.S[k] + lam * sys.V[k]


def transition_inverse(sys, k, lam):
    """Inverse of the transition matrix via -J T(conj(lam))^* J (no numeric inversion)."""
    sys.check_index(k)
    J = sys.J
    T = sys.S[k] + np.conj(lam) * sys.V[k]
    return -J @ T.conj().T @ J


def _inverses(sys, lam):
    # all inverse transition matrices at once, shape (N+1, 2n, 2n)
    T = sys.S + np.conj(lam) * sys.V
    return -np.einsum("ab,kcb,cd->kad", sys.J, T.conj(), sys.J)


@dataclass(frozen=True)
class FundamentalPair:
    """Zhat, Ztilde with shape (N+2, 2n, n) for one value of lambda."""

    lam: complex
    Zhat: np.ndarray
    Ztilde: np.ndarray

    @property
    def Phi(self):
        return np.concatenate([self.Zhat, self.Ztilde], axis=2)


def _propagate(sys, lam, z0, f=None):
    N = sys.N
    inv = _inverses(sys, lam)
    z = np.empty((N + 2,) + z0.shape, dtype=complex)
    z[0] = z0
    if f is not None:
        forcing = np.einsum("ab,kbc,kc...->ka...", sys.J, sys.Psi, f[: N + 1])
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(N + 1):
            rhs = z[k] if f is None else z[k] + forcing[k]
            z[k + 1] = inv[k] @ rhs
    if not np.all(np.isfinite(z)):
        bad = int(np.argmax(~np.isfinite(z.reshape(N + 2, -1)).any(axis=1)))
        raise PropagationOverflowError(f"non-finite values at index {bad} for lambda={lam}")
    return z


def fundamental_solutions(sys, alpha, lam):
    """Zhat_0 = alpha^*, Ztilde_0 = -J alpha^*, propagated forward."""
    a = as_boundary(alpha, sys.n)
    z0 = np.concatenate([a.conj().T, -sys.J @ a.conj().T], axis=1)
    Z = _propagate(sys, complex(lam), z0)
    n = sys.n
    Zhat, Ztilde = Z[:, :, :n], Z[:, :, n:]
    Zhat.setflags(write=False)
    Ztilde.setflags(write=False)
    return FundamentalPair(complex(lam), Zhat, Ztilde)


def solve_ivp(sys, lam, z0, f=None):
    """Solve z_k = T_k(lam) z_{k+1} - J Psi_k f_k forward from z_0.

    ``z0`` is a 2n-vector or a 2n x m matrix; ``f`` a matching sequence.
    """
    z0 = np.asarray(z0, dtype=complex)
    if z0.shape[0] != 2 * sys.n or z0.ndim > 2:
        raise StructuralError(f"initial value must have leading dimension {2 * sys.n}")
    if f is not None:
        f = np.asarray(f, dtype=complex)
        if f.shape != (sys.N + 2,) + z0.shape:
            raise StructuralError(f"forcing must have shape {(sys.N + 2,) + z0.shape}")
    return _propagate(sys, complex(lam), z0, f)


def step_residual(sys, lam, z, f=None):
    """Largest |z_k - T_k(lam) z_{k+1} + J Psi_k f_k| over k in [0, N]."""
    z = np.asarray(z, dtype=complex)
    N = sys.N
    T = sys.S + lam * sys.V
    r = z[: N + 1] - np.einsum("kab,kb...->ka...", T, z[1:])
    if f is not None:
        r = r + np.einsum("ab,kbc,kc...->ka...", sys.J, sys.Psi, np.asarray(f)[: N + 1])
    return float(np.abs(r).max()) if r.size else 0.0
