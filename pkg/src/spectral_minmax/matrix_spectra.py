"""Hermitian matrices under the normalized trace, their spectra and spectral projections."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .measures import CompactMeasure, cdf_of, partial_quantile_integral, quantile_of

HERMITIAN_TOL = 1e-12
PROJECTION_TOL = 1e-10
MAX_SWEEPS = 100
JACOBI_TOL = 1e-13
MERGE_TOL = 1e-9
DEGENERACY_EPS = 1e-7


class MatrixValidationError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


class DegenerateSpectrumError(ValueError):
    """Raised by routines that require distinct eigenvalues."""


class Eigh(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def jacobi_eigh(a: np.ndarray, max_sweeps: int = MAX_SWEEPS, tol: float = JACOBI_TOL) -> Eigh:
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Each rotation first removes the phase of ``a[p, q]`` and then applies a
    real plane rotation that annihilates it.  Sweeps stop once the
    off-diagonal Frobenius mass falls below ``tol * ||a||_F``.
    """
    A = np.array(a, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        return Eigh(np.real(np.diag(A)).copy(), V)

    off = ~np.eye(n, dtype=bool)

    def off_mass():
        # summed directly; ||A||^2 - ||diag A||^2 cancels down to sqrt(eps) ||A||
        return float(np.linalg.norm(A[off]))

    for _ in range(max_sweeps):
        if off_mass() < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                theta = 0.5 * math.atan2(2.0 * mag, A[q, q].real - A[p, p].real)
                c, s = math.cos(theta), math.sin(theta)
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ G
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
    else:
        residual = off_mass()
        if residual >= tol * scale:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps; "
                f"off-diagonal residual {residual:.3e} (scale {scale:.3e})")

    values = np.real(np.diag(A))
    order = np.argsort(values, kind="stable")
    return Eigh(values[order], V[:, order])


@dataclass(frozen=True, eq=False)
class Hermitian:
    """Self-adjoint complex matrix; the normalized trace is ``Tr / n``."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise MatrixValidationError(f"expected a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise MatrixValidationError("matrix has non-finite entries")
        asym = np.max(np.abs(m - m.conj().T))
        if asym > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
            raise MatrixValidationError(f"matrix is not Hermitian (max |a - a*| = {asym:.3e})")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def max_norm(self) -> float:
        return float(np.max(np.abs(self.entries)))

    @cached_property
    def eig(self) -> Eigh:
        return jacobi_eigh(self.entries)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig.values

    def __add__(self, other: "Hermitian") -> "Hermitian":
        return Hermitian(self.entries + as_hermitian(other).entries)

    def __sub__(self, other: "Hermitian") -> "Hermitian":
        return Hermitian(self.entries - as_hermitian(other).entries)

    def conjugate_by(self, u: np.ndarray) -> "Hermitian":
        return Hermitian(u @ self.entries @ u.conj().T)

    def to_json(self) -> dict:
        return {"dim": self.dim, "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()}


def as_hermitian(a) -> Hermitian:
    return a if isinstance(a, Hermitian) else Hermitian(a)


def hermitian_from_json(obj: dict | str) -> Hermitian:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        n = int(obj["dim"])
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj.get("im", np.zeros((n, n)).tolist()), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixValidationError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (n, n) or im.shape != (n, n):
        raise MatrixValidationError(f"matrix JSON: 're'/'im' must be {n}x{n}")
    return Hermitian(re + 1j * im)


def load_hermitian(path: str | Path) -> Hermitian:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixValidationError(f"{path}: invalid JSON ({exc})") from exc
    return hermitian_from_json(obj)


def random_hermitian(n: int, seed) -> Hermitian:
    """Gaussian Hermitian matrix with off-diagonal entry variance ``1/n``."""
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)
    return Hermitian((g + g.conj().T) / math.sqrt(2))


def normalized_trace(x) -> float | complex:
    m = x.entries if isinstance(x, Hermitian) else np.asarray(x)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MatrixValidationError("normalized trace needs a square matrix")
    tr = np.trace(m) / m.shape[0]
    if abs(np.imag(tr)) <= 1e-12:
        return float(np.real(tr))
    return complex(tr)


def eigh(a) -> Eigh:
    """Ascending eigenvalues and a unitary matrix of eigenvectors (columns)."""
    return as_hermitian(a).eig


# -- projections ------------------------------------------------------------

def orthonormal_range(m: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the column space of ``m`` (singular values above ``tol``)."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    if tol is None:
        tol = 1e-8 * n
    u, sv, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, sv > tol]


class Projection:
    """Orthogonal projection ``B B*`` onto the range of an orthonormal basis ``B``.

    The basis is the primary data; the matrix is derived on demand.
    """

    __slots__ = ("basis", "_matrix")

    def __init__(self, basis: np.ndarray):
        b = np.asarray(basis, dtype=complex)
        if b.ndim != 2:
            raise MatrixValidationError("projection basis must be a 2-d array")
        self.basis = b
        self._matrix = None

    @classmethod
    def zero(cls, n: int) -> "Projection":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def identity(cls, n: int) -> "Projection":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def from_matrix(cls, m, tol: float = PROJECTION_TOL) -> "Projection":
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise MatrixValidationError("projection must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise MatrixValidationError("matrix is not self-adjoint")
        if np.max(np.abs(m @ m - m), initial=0.0) > tol:
            raise MatrixValidationError("matrix is not idempotent")
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        return cls(v[:, w > 0.5])

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def trace(self) -> float:
        """Normalized trace ``rank / n``."""
        return self.rank / self.dim

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = self.basis @ self.basis.conj().T
        return self._matrix

    def complement(self) -> "Projection":
        n = self.dim
        if self.rank == 0:
            return Projection.identity(n)
        u, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Projection(u[:, self.rank:])

    def check(self, tol: float = PROJECTION_TOL) -> None:
        """Raise unless the projection invariants hold within ``tol``."""
        p = self.matrix
        if np.max(np.abs(p - p.conj().T), initial=0.0) > tol:
            raise MatrixValidationError("projection is not self-adjoint")
        if np.max(np.abs(p @ p - p), initial=0.0) > tol:
            raise MatrixValidationError("projection is not idempotent")
        if abs(normalized_trace(p) - self.trace) > tol:
            raise MatrixValidationError("normalized trace differs from rank / n")

    def __repr__(self) -> str:
        return f"Projection(dim={self.dim}, rank={self.rank})"


def trace_with(a, p: Projection) -> float:
    """``tau(a p) = Tr(B* a B) / n``."""
    m = as_hermitian(a).entries
    b = p.basis
    return float(np.real(np.sum(b.conj() * (m @ b)))) / p.dim


# -- spectral data ----------------------------------------------------------

def merge_tolerance(a: Hermitian) -> float:
    return MERGE_TOL * (1.0 + a.max_norm)


def eigenvalue_clusters(a) -> list[tuple[int, int]]:
    """Index ranges ``[lo, hi)`` of eigenvalues that merge into one atom."""
    a = as_hermitian(a)
    lam = a.eigenvalues
    tol = merge_tolerance(a)
    clusters = []
    lo = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[i - 1] >= tol:
            clusters.append((lo, i))
            lo = i
    return clusters


def has_distinct_eigenvalues(a) -> bool:
    a = as_hermitian(a)
    return len(eigenvalue_clusters(a)) == a.dim


def spectral_distribution(a) -> CompactMeasure:
    """Atomic measure ``mu_a(E) = tau(1_E(a))``; repeated eigenvalues merge."""
    a = as_hermitian(a)
    lam = a.eigenvalues
    n = a.dim
    atoms = tuple((float(np.mean(lam[lo:hi])), (hi - lo) / n) for lo, hi in eigenvalue_clusters(a))
    return CompactMeasure(atoms=atoms, support=(atoms[0][0], atoms[-1][0]))


def spectral_projection_by_index(a, lo: int, hi: int) -> Projection:
    """Projection onto the eigenvectors with ascending indices ``lo <= i < hi``."""
    a = as_hermitian(a)
    if not 0 <= lo <= hi <= a.dim:
        raise IndexError(f"eigenvalue index range [{lo}, {hi}) outside [0, {a.dim}]")
    return Projection(a.eig.vectors[:, lo:hi])


def spectral_projection(a, t0: float = -math.inf, t1: float = math.inf) -> Projection:
    """``1_[t0, t1)(a)``."""
    a = as_hermitian(a)
    lam = a.eigenvalues
    lo = int(np.searchsorted(lam, t0, side="left"))
    hi = int(np.searchsorted(lam, t1, side="left"))
    return spectral_projection_by_index(a, lo, max(lo, hi))


def spectral_quantile(a):
    return quantile_of(cdf_of(spectral_distribution(a)))


def kyfan_value(a, s: float) -> float:
    """``int_0^s X_a``; for ``s = j/n`` this is the mean of the ``j`` smallest eigenvalues times ``j/n``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    return partial_quantile_integral(spectral_quantile(a), 0.0, s)


class BVResult(NamedTuple):
    value: float
    witness: Projection


def bv_max_trace(a, t: float) -> BVResult:
    """Largest trace of a projection ``p`` with ``pap >= t p``, and the spectral witness ``1_[t, inf)(a)``."""
    a = as_hermitian(a)
    witness = spectral_projection(a, t, math.inf)
    return BVResult(1.0 - float(cdf_of(spectral_distribution(a))(t)), witness)


def compression_min_eigenvalue(a, basis: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of ``B* a B`` for one basis ``(n, k)`` or a stack ``(m, n, k)``.

    This is the smallest value of the quadratic form of ``a`` on range(B);
    ``+inf`` when the range is trivial.
    """
    m = as_hermitian(a).entries
    b = np.asarray(basis)
    k = b.shape[-1]
    if k == 0:
        return np.full(b.shape[:-2], np.inf) if b.ndim == 3 else np.inf
    comp = np.swapaxes(b.conj(), -1, -2) @ m @ b
    w = np.linalg.eigvalsh(comp)
    return w[..., 0]


def perturb_distinct(a, eps: float = DEGENERACY_EPS) -> Hermitian:
    """Add ``diag(eps, 2 eps, ..., n eps)`` in the eigenbasis of ``a``.

    Splits every repeated eigenvalue while moving each by at most ``n eps``.
    """
    a = as_hermitian(a)
    v = a.eig.vectors
    shift = eps * np.arange(1, a.dim + 1)
    return Hermitian(a.entries + (v * shift) @ v.conj().T)


def require_distinct(a, perturb: float | None = None) -> Hermitian:
    """Return ``a`` (or its perturbation) after checking its eigenvalues are distinct."""
    a = as_hermitian(a)
    if has_distinct_eigenvalues(a):
        return a
    if perturb is None:
        raise DegenerateSpectrumError(
            "spectrum has repeated eigenvalues; pass perturb=eps to split them")
    b = perturb_distinct(a, perturb)
    if not has_distinct_eigenvalues(b):
        raise DegenerateSpectrumError(f"perturbation eps={perturb} too small to split the spectrum")
    return b
