"""Dense complex Hermitian linear algebra for small operators.

Everything here works on plain ``numpy`` arrays of shape ``(d, d)``.  The
eigensolver is a cyclic Jacobi method; for ``d <= 8`` a sweep costs next to
nothing and the method is unconditionally stable for Hermitian input.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

HERM_TOL = 1e-12
PSD_TOL = 1e-9
EQ_TOL = 1e-10

_JACOBI_OFF_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 64
_MAX_DIM = 64


class LinalgError(ValueError):
    """Base class for rejected matrix input."""


class NotHermitianError(LinalgError):
    pass


class PsdViolationError(LinalgError):
    pass


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues; column ``k`` of ``eigenvectors`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square complex128 array, rejecting non-finite entries."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise LinalgError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinalgError("matrix has non-finite entries")
    return arr


def hermiticity_error(m: np.ndarray) -> float:
    """max_{jk} |M[j,k] - conj(M[k,j])|."""
    return float(np.max(np.abs(m - m.conj().T)))


def as_hermitian(m, tol: float = HERM_TOL) -> np.ndarray:
    """Validate Hermiticity and return the exactly symmetrised copy.

    Raises
    ------
    NotHermitianError
        If any entry pair deviates from conjugate symmetry by more than ``tol``.
    """
    arr = as_matrix(m)
    err = hermiticity_error(arr)
    if err > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {err:.3e} > {tol:g})")
    return 0.5 * (arr + arr.conj().T)


def _eig_2x2(h: np.ndarray) -> EigenDecomposition:
    # A single Jacobi rotation diagonalises a 2x2 block exactly; done in scalars.
    (h00, _), (h10, h11) = h.tolist()
    a = h00.real
    dd = h11.real
    mod = abs(h10)
    if mod == 0.0:
        vals = [a, dd]
        vecs = [[1.0, 0.0], [0.0, 1.0]]
    else:
        phase = h10 / mod
        tau = (dd - a) / (2.0 * mod)
        t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
        c = 1.0 / math.sqrt(1.0 + t * t)
        s = t * c
        vals = [a - t * mod, dd + t * mod]
        # Columns of diag(1, phase) @ [[c, s], [-s, c]].
        vecs = [[c, s], [-s * phase, c * phase]]
    if vals[0] > vals[1]:
        vals = [vals[1], vals[0]]
        vecs = [[vecs[0][1], vecs[0][0]], [vecs[1][1], vecs[1][0]]]
    return EigenDecomposition(np.array(vals), np.array(vecs, dtype=np.complex128))


def _eig_jacobi(h: np.ndarray) -> EigenDecomposition:
    # Scalar arithmetic on nested lists: for d <= 8 this beats per-slice numpy.
    d = h.shape[0]
    a = h.tolist()
    v = [[1.0 + 0j if j == k else 0j for k in range(d)] for j in range(d)]
    scale = max(1.0, float(np.linalg.norm(h)))
    tol2 = (_JACOBI_OFF_TOL * scale) ** 2
    for _ in range(_JACOBI_MAX_SWEEPS):
        off2 = 0.0
        for p in range(d - 1):
            row = a[p]
            for q in range(p + 1, d):
                z = row[q]
                off2 += 2.0 * (z.real * z.real + z.imag * z.imag)
        if off2 < tol2:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p][q]
                mod = abs(apq)
                if mod < 1e-300:
                    continue
                # J = diag(1, ph) @ [[c, s], [-s, c]] restricted to the (p, q) plane,
                # where ph makes the (p, q) entry real before the real rotation.
                ph = apq.conjugate() / mod
                tau = (a[q][q].real - a[p][p].real) / (2.0 * mod)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                jqp = -s * ph
                jqq = c * ph
                cjqp = jqp.conjugate()
                cjqq = jqq.conjugate()
                for r in range(d):
                    ar = a[r]
                    x, y = ar[p], ar[q]
                    ar[p] = x * c + y * jqp
                    ar[q] = x * s + y * jqq
                rp, rq = a[p], a[q]
                for k in range(d):
                    x, y = rp[k], rq[k]
                    rp[k] = c * x + cjqp * y
                    rq[k] = s * x + cjqq * y
                rp[q] = 0j
                rq[p] = 0j
                rp[p] = complex(rp[p].real)
                rq[q] = complex(rq[q].real)
                for r in range(d):
                    vr = v[r]
                    x, y = vr[p], vr[q]
                    vr[p] = x * c + y * jqp
                    vr[q] = x * s + y * jqq
    else:
        raise LinalgError("Jacobi iteration did not converge")
    vals = np.array([a[k][k].real for k in range(d)])
    vecs = np.array(v, dtype=np.complex128)
    order = np.argsort(vals, kind="stable")
    return EigenDecomposition(vals[order], vecs[:, order])


def hermitian_eig(h) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    h : array_like, shape (d, d)
        Hermitian matrix; validated with :func:`as_hermitian`.

    Returns
    -------
    EigenDecomposition
        Eigenvalues sorted ascending with orthonormal eigenvector columns.

    Examples
    --------
    >>> hermitian_eig(np.diag([0.5, 0.375, 0.0])).eigenvalues
    array([0.   , 0.375, 0.5  ])
    """
    return eig_trusted(as_hermitian(h))


def eig_trusted(m: np.ndarray) -> EigenDecomposition:
    """:func:`hermitian_eig` without input validation.

    ``m`` must already be an exactly Hermitian complex128 array, e.g. the
    output of :func:`as_hermitian` or an explicit ``(M + M^dagger) / 2``.
    """
    d = m.shape[0]
    if d > _MAX_DIM:
        raise LinalgError(f"dimension {d} exceeds supported maximum {_MAX_DIM}")
    if d == 1:
        return EigenDecomposition(np.array([m[0, 0].real]), np.ones((1, 1), dtype=np.complex128))
    if d == 2:
        return _eig_2x2(m)
    return _eig_jacobi(m)


def eigvals(h) -> np.ndarray:
    return hermitian_eig(h).eigenvalues


def _extreme_2x2(m: np.ndarray) -> tuple[float, float]:
    # Same rotation as _eig_2x2, eigenvalues only.
    (h00, _), (h10, h11) = m.tolist()
    a, dd = h00.real, h11.real
    mod = abs(h10)
    if mod == 0.0:
        return (a, dd) if a <= dd else (dd, a)
    tau = (dd - a) / (2.0 * mod)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    lo, hi = a - t * mod, dd + t * mod
    return (lo, hi) if lo <= hi else (hi, lo)


def lambda_min(h, trusted: bool = False) -> float:
    """Smallest eigenvalue; ``trusted=True`` skips validation (see :func:`eig_trusted`)."""
    m = h if trusted else as_hermitian(h)
    if m.shape[0] == 2:
        return _extreme_2x2(m)[0]
    return float(eig_trusted(m).eigenvalues[0])


def lambda_max(h, trusted: bool = False) -> float:
    m = h if trusted else as_hermitian(h)
    if m.shape[0] == 2:
        return _extreme_2x2(m)[1]
    return float(eig_trusted(m).eigenvalues[-1])


def operator_norm(h) -> float:
    """Largest absolute eigenvalue (the largest eigenvalue for PSD input)."""
    vals = eigvals(h)
    return float(max(abs(vals[0]), abs(vals[-1])))


def trace_norm(h) -> float:
    """Sum of absolute eigenvalues."""
    return float(np.sum(np.abs(eigvals(h))))


def entrywise_l1_norm(m) -> float:
    """Sum of the complex moduli of all entries; any matrix shape is accepted."""
    return float(np.sum(np.abs(np.asarray(m, dtype=np.complex128))))


def is_psd(h, tol: float = PSD_TOL) -> bool:
    return lambda_min(h) >= -tol


def psd_sqrt(h) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues in ``[-PSD_TOL, 0)`` are clamped to zero before the root is
    taken.

    Raises
    ------
    PsdViolationError
        If the smallest eigenvalue is below ``-PSD_TOL``.
    """
    vals, vecs = hermitian_eig(h)
    if vals[0] < -PSD_TOL:
        raise PsdViolationError(f"matrix is not PSD (lambda_min = {vals[0]:.3e})")
    roots = np.sqrt(np.clip(vals, 0.0, None))
    s = (vecs * roots) @ vecs.conj().T
    return 0.5 * (s + s.conj().T)


def psd_inv_sqrt(h) -> np.ndarray:
    """Inverse square root of a positive definite matrix."""
    vals, vecs = hermitian_eig(h)
    if vals[0] <= 0.0:
        raise PsdViolationError(f"matrix is singular or indefinite (lambda_min = {vals[0]:.3e})")
    s = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return 0.5 * (s + s.conj().T)


def is_unitary(u, tol: float = EQ_TOL) -> bool:
    arr = as_matrix(u)
    return float(np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0])))) <= tol


def max_abs(m) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0
