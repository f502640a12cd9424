"""Characteristic polynomial, eigenvalues with multiplicities, definiteness check."""

from dataclasses import dataclass

import numpy as np

from .core import as_boundary
from .errors import NumericalConsistencyError
from .propagation import _inverses, fundamental_solutions

EIG_TOL = 1e-8
CLUSTER_TOL = 1e-7
WIDE_CLUSTER_TOL = 1e-4
ZERO_POLY_TOL = 1e-10
ATK_TOL = 1e-10


@dataclass(frozen=True)
class CharPoly:
    """p(lam) = sum c_j lam^j, coefficients in increasing degree."""

    coeffs: np.ndarray
    is_identically_zero: bool
    radius: float = 1.0
    node_scale: float = 1.0

    @property
    def degree(self):
        return len(self.coeffs) - 1 if not self.is_identically_zero else -1

    def __call__(self, lam):
        return np.polynomial.polynomial.polyval(lam, self.coeffs)


@dataclass(frozen=True)
class Eigenvalue:
    lam: complex
    alg_mult: int
    geom_mult: int
    kernel_basis: np.ndarray
    residual: float = 0.0


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple
    degenerate: bool
    atkinson_holds: bool
    char_poly: CharPoly = None

    @property
    def lams(self):
        return np.array([e.lam for e in self.eigenvalues])

    @property
    def has_nonreal(self):
        return any(abs(np.imag(e.lam)) > 0 for e in self.eigenvalues)


@dataclass(frozen=True)
class AtkinsonResult:
    holds: bool
    min_eigs: tuple
    probes: tuple
    consistent: bool = True
    tol: float = ATK_TOL

    def __iter__(self):
        return iter((self.holds, self.min_eigs))


def _end_block(sys, alpha, beta, lam):
    """beta Ztilde_{N+1}(lam) and the scale ||Ztilde_{N+1}(lam)||_2 (never zero)."""
    Zt = fundamental_solutions(sys, alpha, lam).Ztilde[-1]
    return beta @ Zt, np.linalg.norm(Zt, 2)


def _propagate_with_derivative(sys, alpha, lam):
    # Ztilde_{N+1} and its lambda-derivative
    J = sys.J
    inv = _inverses(sys, lam)
    dinv = -np.einsum("ab,kcb,cd->kad", J, sys.V.conj(), J)
    z = -J @ alpha.conj().T
    dz = np.zeros_like(z)
    for k in range(sys.N + 1):
        z, dz = inv[k] @ z, dinv[k] @ z + inv[k] @ dz
    return z, dz


def _end_block_and_derivative(sys, alpha, beta, lam):
    z, dz = _propagate_with_derivative(sys, alpha, lam)
    return beta @ z, beta @ dz


def char_poly(sys, alpha, beta, zero_poly_tol=ZERO_POLY_TOL):
    """Interpolate det(beta Ztilde_{N+1}(lam)) on scaled roots of unity."""
    n = sys.n
    alpha = as_boundary(alpha, n)
    beta = as_boundary(beta, n)
    d = n * (sys.N + 1)

    def interpolate(R):
        nodes = R * np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
        vals = np.empty(d + 1, dtype=complex)
        scale = 0.0
        for m, lam in enumerate(nodes):
            B, zs = _end_block(sys, alpha, beta, lam)
            vals[m] = np.linalg.det(B)
            scale = max(scale, zs**n)
        scaled = np.fft.fft(vals) / (d + 1)
        return vals, scaled, max(scale, 1.0)

    R = 1.0
    vals, scaled, scale = interpolate(R)
    if np.abs(vals).max() <= zero_poly_tol * scale:
        return CharPoly(np.zeros(1, dtype=complex), True, R, scale)
    coeffs = _trim(scaled, zero_poly_tol)
    if len(coeffs) > 1:
        # one re-pass on a circle matched to the geometric mean root modulus,
        # which balances the coefficient magnitudes in the scaled basis
        mod = np.abs(np.roots(coeffs[::-1]))
        mod = mod[mod > 0]
        est = float(np.exp(np.log(mod).mean())) if mod.size else 1.0
        if not 0.5 <= est <= 2.0:
            R = est
            vals, scaled, scale = interpolate(R)
            t = _trim(scaled, zero_poly_tol)
            coeffs = t / R ** np.arange(len(t))
    return CharPoly(coeffs, False, R, scale)


def _trim(scaled, tol):
    c = scaled.copy()
    top = np.abs(c).max()
    c[np.abs(c) <= 64 * np.finfo(float).eps * top] = 0
    keep = np.nonzero(np.abs(c) > tol * top)[0]
    return c[: keep[-1] + 1]


def _cluster(roots, tol):
    # single-linkage grouping of roots closer than tol * (1 + |root|)
    groups = []
    for r in sorted(roots, key=lambda x: (x.real, x.imag)):
        for g in groups:
            if any(abs(r - s) <= tol * (1 + abs(s)) for s in g):
                g.append(r)
                break
        else:
            groups.append([r])
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if any(abs(a - b) <= tol * (1 + abs(b)) for a in groups[i] for b in groups[j]):
                    groups[i] += groups.pop(j)
                    merged = True
                    break
            if merged:
                break
    return groups


def _polish(sys, alpha, beta, lam, mult, iters=8):
    # Newton for a root of multiplicity mult: step = mult / (p'/p)
    x = lam
    for _ in range(iters):
        B, dB = _end_block_and_derivative(sys, alpha, beta, x)
        sv = np.linalg.svd(B, compute_uv=False)
        if sv[-1] <= 1e-15 * max(sv[0], np.abs(dB).max(), 1e-300):
            break
        logd = np.trace(np.linalg.solve(B, dB))
        if logd == 0:
            break
        step = mult / logd
        if not np.isfinite(step) or abs(step) > 1e-3 * (1 + abs(x)):
            break
        x = x - step
        if abs(step) <= 1e-15 * (1 + abs(x)):
            break
    return x


def _kernel(sys, alpha, beta, lam, eig_tol):
    # singular values are measured against ||Ztilde_{N+1}||, which stays
    # away from zero even where beta Ztilde_{N+1} vanishes entirely, or
    # against the change a relative perturbation of lam can cause
    z, dz = _propagate_with_derivative(sys, alpha, lam)
    B = beta @ z
    zs = max(np.linalg.norm(z, 2), (1 + abs(lam)) * np.linalg.norm(dz, 2))
    _, sv, Vh = np.linalg.svd(B)
    g = int(np.sum(sv <= eig_tol * zs))
    basis = Vh[sys.n - g :].conj().T
    res = float(np.linalg.norm(B @ basis, 2) / zs) if g else float(sv[-1] / zs)
    return g, basis, res


def check_atkinson(sys, alpha, probes=(0, 1j, 1 + 1j), atk_tol=ATK_TOL):
    """Positive definiteness of sum Ztilde^* Psi Ztilde at each probe.

    The verdict must not depend on the probe; disagreement is flagged in
    ``consistent``.  The eigenvalue floor is relative to max(1, ||Omega||).
    """
    from .eigenbasis import omega_matrix

    verdicts, mins = [], []
    for lam in probes:
        Om = omega_matrix(sys, alpha, lam)
        w = np.linalg.eigvalsh((Om + Om.conj().T) / 2)
        mins.append(float(w[0]))
        verdicts.append(bool(w[0] > atk_tol * max(1.0, abs(w[-1]))))
    return AtkinsonResult(all(verdicts), tuple(mins), tuple(probes), len(set(verdicts)) == 1, atk_tol)


def eigenvalues(sys, alpha, beta, eig_tol=EIG_TOL, cluster_tol=CLUSTER_TOL, atkinson=None):
    """Roots of the characteristic polynomial with algebraic and geometric multiplicities."""
    n = sys.n
    alpha = as_boundary(alpha, n)
    beta = as_boundary(beta, n)
    if atkinson is None:
        atkinson = check_atkinson(sys, alpha).holds
    cp = char_poly(sys, alpha, beta)
    if cp.is_identically_zero:
        return Spectrum((), True, atkinson, cp)
    if cp.degree <= 0:
        return Spectrum((), False, atkinson, cp)
    roots = np.roots(cp.coeffs[::-1])

    # perturbed multiple roots spread like eps**(1/m); accept a wide cluster
    # when the kernel at its centre has the full dimension, else split tightly
    out = []
    for group in _cluster(list(roots), WIDE_CLUSTER_TOL):
        if len(group) > 1:
            lam = _polish(sys, alpha, beta, np.mean(group), len(group))
            if _kernel(sys, alpha, beta, lam, eig_tol)[0] == len(group):
                out.append((lam, len(group)))
                continue
        for tight in _cluster(group, cluster_tol):
            out.append((_polish(sys, alpha, beta, np.mean(tight), len(tight)), len(tight)))

    eigs = []
    for lam, size in out:
        g, basis, res = _kernel(sys, alpha, beta, lam, eig_tol)
        if atkinson:
            if abs(lam.imag) > eig_tol * (1 + abs(lam)):
                raise NumericalConsistencyError(
                    f"non-real eigenvalue {lam} although the definiteness condition holds",
                    {"imag": abs(lam.imag)},
                )
            lam = complex(lam.real, 0.0)
            g, basis, res = _kernel(sys, alpha, beta, lam, eig_tol)
            if g > size:
                # geom <= alg always; extra small singular values are rounding noise
                basis = basis[:, g - size :]
                g = size
                B, zs = _end_block(sys, alpha, beta, lam)
                res = float(np.linalg.norm(B @ basis, 2) / zs)
            if g != size:
                raise NumericalConsistencyError(
                    f"algebraic multiplicity {size} differs from geometric {g} at {lam}",
                    {"alg": size, "geom": g, "kernel_residual": res},
                )
        if g == 0:
            # an exact root always has a kernel; a defective root spreads too
            # far for eig_tol, so keep the best singular direction
            B, zs = _end_block(sys, alpha, beta, lam)
            _, sv, Vh = np.linalg.svd(B)
            g, basis, res = 1, Vh[-1:].conj().T, float(sv[-1] / zs)
        eigs.append(Eigenvalue(complex(lam), int(size), int(g), basis, res))
    eigs.sort(key=lambda e: (e.lam.real, e.lam.imag))
    return Spectrum(tuple(eigs), False, atkinson, cp)
