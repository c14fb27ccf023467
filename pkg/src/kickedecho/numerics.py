"""Shared numerical kernels: unitary DFT, eigensolvers, least squares.

Everything downstream (propagators, spectra, decay fits) goes through this
module so tolerances and conventions are fixed in one place.  Eigenvalues of
Hermitian matrices are returned ascending; eigenvalues of unitary matrices are
returned sorted by eigenphase in (-pi, pi].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Validation tolerances for matrix structure checks, relative to max(1, |A|_max).
HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10


class EigenConvergenceError(RuntimeError):
    """Raised when an iterative eigensolver fails to converge."""


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition with a certified residual.

    Attributes:
        values: eigenvalues, shape (n,).
        vectors: eigenvectors as columns, orthonormal, shape (n, n);
            vectors[:, j] belongs to values[j].
        residual_norm: max over j of ||A v_j - lambda_j v_j||_2.
    """

    values: np.ndarray
    vectors: np.ndarray
    residual_norm: float


@dataclass(frozen=True)
class RegressionResult:
    """Ordinary least-squares line fit y ~ slope*x + intercept."""

    slope: float
    intercept: float
    r_squared: float


def dft(x, inverse: bool = False) -> np.ndarray:
    """Unitary discrete Fourier transform along the last axis.

    Forward kernel exp(-2*pi*i*j*k/N)/sqrt(N); `inverse=True` applies the
    conjugate transform.  Any length is supported, including large primes.
    """
    x = np.asarray(x)
    if x.shape[-1] == 0:
        raise ValueError("dft input must be non-empty")
    if inverse:
        return np.fft.ifft(x, norm="ortho")
    return np.fft.fft(x, norm="ortho")


def _check_square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def _max_residual(a: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> float:
    resid = a @ vectors - vectors * values[None, :]
    return float(np.linalg.norm(resid, axis=0).max())


def eig_hermitian(a, tol: float = HERMITICITY_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Args:
        a: square matrix, Hermitian to within `tol` (relative to its largest
            entry).
        tol: Hermiticity validation tolerance.

    Raises:
        ValueError: if `a` is not square or not Hermitian to `tol`.
    """
    a = _check_square(a, "eig_hermitian input")
    scale = max(1.0, float(np.abs(a).max()))
    defect = float(np.abs(a - a.conj().T).max())
    if defect > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: |A - A^dag|_max = {defect:.3e} "
            f"exceeds {tol:.1e} * {scale:.3e}"
        )
    values, vectors = np.linalg.eigh((a + a.conj().T) / 2.0)
    return EigenSystem(values, vectors, _max_residual(a, values, vectors))


def eig_unitary(u, tol: float = UNITARITY_TOL) -> EigenSystem:
    """Eigendecomposition of a unitary matrix via the complex Schur form.

    A unitary matrix is normal, so its Schur form is diagonal and the Schur
    vectors are an orthonormal eigenbasis; no balancing or reorthogonalization
    step is needed.  Eigenvalues come back sorted by phase angle in (-pi, pi].

    Raises:
        ValueError: if `u` is not square or not unitary to `tol`.
        EigenConvergenceError: if the QR iteration fails to converge.
    """
    u = _check_square(u, "eig_unitary input")
    n = u.shape[0]
    defect = float(np.abs(u.conj().T @ u - np.eye(n)).max())
    if defect > tol:
        raise ValueError(
            f"matrix is not unitary: |U^dag U - I|_max = {defect:.3e} exceeds {tol:.1e}"
        )
    try:
        t, z = scipy.linalg.schur(u, output="complex")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - pathological input
        raise EigenConvergenceError(
            f"Schur QR iteration failed to converge for a {n}x{n} matrix: {exc}"
        ) from exc
    values = np.diag(t).copy()
    order = np.argsort(np.angle(values), kind="stable")
    values = values[order]
    vectors = np.ascontiguousarray(z[:, order])
    return EigenSystem(values, vectors, _max_residual(u, values, vectors))


def linear_least_squares(x, y) -> RegressionResult:
    """Closed-form least-squares line through (x, y).

    r_squared is 1 - SS_res/SS_tot, clipped to [0, 1]; a constant-y input is
    fit exactly by the horizontal line and reports r_squared = 1.

    Raises:
        ValueError: on mismatched lengths, fewer than two points, or
            degenerate x (zero variance).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be 1-d of equal length, got {x.shape}, {y.shape}")
    if x.size < 2:
        raise ValueError("need at least two points for a line fit")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("least-squares input contains non-finite values")
    xm = x.mean()
    ym = y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("x values are all identical; slope is undefined")
    sxy = float(np.sum((x - xm) * (y - ym)))
    slope = sxy / sxx
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - slope * x - intercept) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RegressionResult(slope, intercept, r_squared)
