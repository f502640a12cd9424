"""Domain types, structural validation and the semi-inner product.

Sequences are plain numpy arrays indexed by k along the first axis:
``(N + 2, 2n)`` for vector sequences and ``(N + 2, 2n, m)`` when each
entry holds m columns.  The symplectic unit is ``J = [[0, I], [-I, 0]]``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BoundaryMatrixError, StructuralError

DEFAULT_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10
_PROBES = (0.7 + 0.3j, -1.3 + 2.1j)


def symplectic_unit(n):
    """Return the 2n x 2n matrix J = [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]]).astype(complex)


def _rel(residual, scale):
    return float(residual) / max(1.0, float(scale))


def _norm1(a):
    return np.linalg.norm(a, 1) if a.ndim == 2 else np.abs(a).sum()


@dataclass(frozen=True)
class SymplecticSystem:
    """Coefficients (S_k, Psi_k), k = 0..N, of z_k = (S_k + lam V_k) z_{k+1}.

    ``V_k = -J Psi_k S_k`` is derived on demand.  Psi is symmetrized on
    construction when its skew part is below ``tol``; larger asymmetry is
    kept so that :func:`validate_system` reports it.
    """

    S: np.ndarray
    Psi: np.ndarray
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        S = np.array(self.S, dtype=complex)
        Psi = np.array(self.Psi, dtype=complex)
        if S.ndim != 3 or Psi.ndim != 3:
            raise StructuralError("S and Psi must be sequences of square matrices")
        if S.shape != Psi.shape:
            raise StructuralError(f"S has shape {S.shape} but Psi has shape {Psi.shape}")
        m = S.shape[1]
        if S.shape[2] != m or m == 0 or m % 2:
            raise StructuralError(f"blocks must be 2n x 2n, got {S.shape[1:]}")
        if S.shape[0] == 0:
            raise StructuralError("need at least one coefficient pair (N >= 0)")
        skew = Psi - Psi.conj().transpose(0, 2, 1)
        for k in range(Psi.shape[0]):
            if _rel(_norm1(skew[k]) / 2, _norm1(Psi[k])) <= self.tol:
                Psi[k] = (Psi[k] + Psi[k].conj().T) / 2
        S.setflags(write=False)
        Psi.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "Psi", Psi)

    @property
    def n(self):
        return self.S.shape[1] // 2

    @property
    def N(self):
        return self.S.shape[0] - 1

    @cached_property
    def J(self):
        J = symplectic_unit(self.n)
        J.setflags(write=False)
        return J

    @cached_property
    def V(self):
        V = -np.einsum("ab,kbc,kcd->kad", self.J, self.Psi, self.S)
        V.setflags(write=False)
        return V

    @cached_property
    def psi_factor(self):
        """W_k with Psi_k = W_k W_k^*, from the clipped eigendecomposition.

        Sums of the form z^* Psi z evaluated through W stay positive
        semidefinite even when z is large.
        """
        w, Q = np.linalg.eigh(self.Psi)
        # rounding leaves ~eps-sized eigenvalues on the null space; their
        # square roots (~1e-8) would leak null components into W^* z
        floor = 64 * np.finfo(float).eps * np.abs(w).max(axis=1, keepdims=True)
        w = np.where(w > floor, w, 0.0)
        W = Q * np.sqrt(w)[:, None, :]
        W.setflags(write=False)
        return W

    def check_index(self, k):
        if not 0 <= k <= self.N:
            raise IndexError(f"index {k} outside [0, {self.N}]")

    def zeros(self, m=None):
        """A zero sequence on [0, N+1] (vector or m-column)."""
        shape = (self.N + 2, 2 * self.n) if m is None else (self.N + 2, 2 * self.n, m)
        return np.zeros(shape, dtype=complex)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    residuals: dict
    failing: dict
    tol: float

    def to_dict(self):
        return {
            "passed": self.passed,
            "tol": self.tol,
            "residuals": dict(self.residuals),
            "failing": {k: list(v) for k, v in self.failing.items()},
        }


def validate_system(sys, tol_struct=DEFAULT_TOL):
    """Check every structural hypothesis on (S, Psi) and report residuals.

    Numeric failures are reported, never raised.  Residuals are relative to
    ``max(1, ||operand||_1)``.
    """
    J = sys.J
    n = sys.n
    checks = {
        "symplectic_S": [],
        "psi_hermitian": [],
        "psi_isotropic": [],
        "psi_psd": [],
        "psi_rank": [],
        "vjs_hermitian": [],
        "sbb_identity": [],
    }
    for k in range(sys.N + 1):
        S, Psi, V = sys.S[k], sys.Psi[k], sys.V[k]
        checks["symplectic_S"].append(_rel(_norm1(S.conj().T @ J @ S - J), _norm1(S) ** 2))
        checks["psi_hermitian"].append(_rel(_norm1(Psi - Psi.conj().T), _norm1(Psi)))
        checks["psi_isotropic"].append(_rel(_norm1(Psi @ J @ Psi), _norm1(Psi) ** 2))
        herm = (Psi + Psi.conj().T) / 2
        w = np.linalg.eigvalsh(herm)
        checks["psi_psd"].append(_rel(max(0.0, -w[0]), np.abs(w).max()))
        sv = np.linalg.svd(Psi, compute_uv=False)
        checks["psi_rank"].append(_rel(sv[n], sv[0]))
        VJS = V.conj().T @ J @ S
        checks["vjs_hermitian"].append(_rel(_norm1(VJS - VJS.conj().T), _norm1(VJS)))
        worst = 0.0
        for lam in _PROBES:
            A = S + lam * V
            B = S + np.conj(lam) * V
            worst = max(worst, _rel(_norm1(B.conj().T @ J @ A - J), _norm1(A) * _norm1(B)))
        checks["sbb_identity"].append(worst)
    residuals = {name: float(max(vals)) for name, vals in checks.items()}
    failing = {
        name: [k for k, r in enumerate(vals) if not r <= tol_struct]
        for name, vals in checks.items()
    }
    failing = {name: idx for name, idx in failing.items() if idx}
    return ValidationReport(not failing, residuals, failing, tol_struct)


def as_boundary(mat, n, tol=DEFAULT_TOL):
    """Validate a boundary matrix (n x 2n, aa* = I, aJa* = 0) and return it."""
    a = np.atleast_2d(np.asarray(mat, dtype=complex))
    if a.shape != (n, 2 * n):
        raise BoundaryMatrixError(f"boundary matrix must be {n}x{2 * n}, got {a.shape}")
    J = symplectic_unit(n)
    r1 = np.abs(a @ a.conj().T - np.eye(n)).max()
    r2 = np.abs(a @ J @ a.conj().T).max()
    if r1 > tol or r2 > tol:
        raise BoundaryMatrixError(
            f"boundary matrix not admissible: |aa*-I| = {r1:.3g}, |aJa*| = {r2:.3g}"
        )
    return a


def v_from_psi(sys, k):
    """V_k = -J Psi_k S_k."""
    sys.check_index(k)
    return sys.V[k].copy()


def psi_from_v(sys, k):
    """Recover Psi_k = J S_k J V_k* J from the derived V_k (round-trip check)."""
    sys.check_index(k)
    J = sys.J
    return J @ sys.S[k] @ J @ sys.V[k].conj().T @ J


def _check_sequence(sys, z, name):
    z = np.asarray(z, dtype=complex)
    if z.ndim not in (2, 3) or z.shape[0] != sys.N + 2 or z.shape[1] != 2 * sys.n:
        raise StructuralError(
            f"{name} must have shape ({sys.N + 2}, {2 * sys.n}[, m]), got {z.shape}"
        )
    return z


def semi_inner_product(sys, z, u):
    """<z, u>_Psi = sum_{k=0}^{N} z_k^* Psi_k u_k.

    Returns a scalar for vector sequences and a matrix for column sequences.
    The value at index N+1 never contributes.
    """
    z = _check_sequence(sys, z, "z")
    u = _check_sequence(sys, u, "u")
    zz = z[: sys.N + 1]
    uu = u[: sys.N + 1]
    if zz.ndim == 2 and uu.ndim == 2:
        return complex(np.einsum("ka,kab,kb->", zz.conj(), sys.Psi, uu))
    if zz.ndim == 2:
        zz = zz[:, :, None]
    if uu.ndim == 2:
        uu = uu[:, :, None]
    return np.einsum("kam,kab,kbp->mp", zz.conj(), sys.Psi, uu)


def semi_norm(sys, z):
    """||z||_Psi as the Euclidean norm of W_k^* z_k (Psi_k = W_k W_k^*).

    Going through the factor avoids the square root of a cancelled sum,
    which would lose half the digits for z close to the null class.
    """
    z = _check_sequence(sys, z, "z")
    if z.ndim != 2:
        raise StructuralError("semi_norm needs a vector sequence")
    y = np.einsum("kba,kb->ka", sys.psi_factor.conj(), z[: sys.N + 1])
    return float(np.linalg.norm(y))


def space_dimensions(sys, rank_tol=DEFAULT_RANK_TOL):
    """(dim of the sequence space, dim of the quotient Hilbert space)."""
    dim_quotient = 0
    for Psi in sys.Psi:
        sv = np.linalg.svd(Psi, compute_uv=False)
        if sv[0] > 0:
            dim_quotient += int(np.sum(sv > rank_tol * sv[0]))
    return 2 * sys.n * (sys.N + 2), dim_quotient


def psi_ranks(sys, rank_tol=DEFAULT_RANK_TOL):
    ranks = []
    for Psi in sys.Psi:
        sv = np.linalg.svd(Psi, compute_uv=False)
        ranks.append(int(np.sum(sv > rank_tol * sv[0])) if sv[0] > 0 else 0)
    return ranks


def lagrange_residual(sys, lam, nu, z, u, f=None, g=None):
    """Largest defect of the extended Lagrange formula over all 0 <= s <= t <= N.

    For z solving the lam-system with forcing f and u solving the nu-system
    with forcing g, the quantity z_k^* J u_k |_s^{t+1} equals the sum over
    k = s..t of (conj(lam) - nu) z_k^* Psi_k u_k + f_k^* Psi_k u_k - z_k^* Psi_k g_k.
    """
    z = _check_sequence(sys, z, "z")
    u = _check_sequence(sys, u, "u")
    vec = z.ndim == 2
    if vec:
        z = z[:, :, None]
    if u.ndim == 2:
        u = u[:, :, None]
    f = np.zeros_like(z) if f is None else _check_sequence(sys, f, "f").reshape(z.shape)
    g = np.zeros_like(u) if g is None else _check_sequence(sys, g, "g").reshape(u.shape)
    N = sys.N
    wr = np.einsum("kam,ab,kbp->kmp", z.conj(), sys.J, u)
    P = sys.Psi
    zk, uk = z[: N + 1], u[: N + 1]
    terms = (
        (np.conj(lam) - nu) * np.einsum("kam,kab,kbp->kmp", zk.conj(), P, uk)
        + np.einsum("kam,kab,kbp->kmp", f[: N + 1].conj(), P, uk)
        - np.einsum("kam,kab,kbp->kmp", zk.conj(), P, g[: N + 1])
    )
    defect = np.diff(wr, axis=0) - terms
    prefix = np.concatenate([np.zeros_like(defect[:1]), np.cumsum(defect, axis=0)])
    worst = 0.0
    for s in range(N + 1):
        diffs = prefix[s + 1 :] - prefix[s]
        worst = max(worst, float(np.abs(diffs).max()))
    return worst
