"""Small dense linear-algebra helpers.

The symmetric eigensolver is a cyclic Jacobi method.  It is slow compared to
LAPACK but deterministic, and eigenvector ordering and signs are fixed by
:func:`sorted_eigh` so greedy runs are reproducible across platforms.
"""

import numpy as np

from .errors import DomainError, InvariantError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYM_TOL = 1e-12
PSD_TOL = 1e-10


def jacobi_eigh(A, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decompose a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Symmetric input.  Only used through its symmetric part.
    tol : float
        Stop when the largest off-diagonal magnitude drops below
        ``tol * ||A||_F``.
    max_sweeps : int
        Upper bound on full passes over the upper triangle.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in the order the rotations leave them (unsorted).
    V : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, ``A @ V = V @ diag(w)``.
    sweeps : int
        Number of sweeps performed.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    fro = np.linalg.norm(A)
    threshold = tol * fro

    sweeps = 0
    while sweeps < max_sweeps:
        off = np.abs(A - np.diag(np.diag(A)))
        if n < 2 or off.max() <= threshold:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= threshold:
                    continue
                # Rutishauser's stable form of the rotation angle.
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0

                Vp = V[:, p].copy()
                Vq = V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq

    return np.diag(A).copy(), V, sweeps


def fix_signs(V):
    """Flip columns so the first entry of largest magnitude is positive."""
    V = np.array(V, dtype=float)
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return V


def sorted_eigh(A):
    """Jacobi eigenpairs sorted by descending eigenvalue.

    The sort is stable in the Jacobi output index and eigenvector signs are
    normalized with :func:`fix_signs`.
    """
    w, V, _ = jacobi_eigh(A)
    order = sorted(range(len(w)), key=lambda i: -w[i])
    return w[order], fix_signs(V[:, order])


def is_symmetric(A, tol=SYM_TOL):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    return bool(np.abs(A - A.T).max(initial=0.0) <= tol * scale)


def symmetrize(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + A.T)


def check_symmetric_psd(name, A, definite=False):
    """Raise :class:`InvariantError` unless ``A`` is symmetric PSD (or PD).

    Eigenvalues above ``-PSD_TOL * lambda_max`` count as nonnegative.
    """
    A = np.asarray(A, dtype=float)
    if not is_symmetric(A):
        raise InvariantError(f"{name} is not symmetric")
    if A.size == 0:
        return
    w = np.linalg.eigvalsh(A)
    lam_max = max(float(w.max()), 0.0)
    if definite:
        if w.min() <= 0.0:
            raise InvariantError(
                f"{name} is not positive definite (min eigenvalue {w.min():.3e})")
    elif w.min() < -PSD_TOL * lam_max or (lam_max == 0.0 and w.min() < 0.0):
        raise InvariantError(
            f"{name} is not positive semidefinite (min eigenvalue {w.min():.3e})")


def random_orthonormal(n, rng):
    """Random ``n x n`` orthonormal matrix from the QR factors of a Gaussian."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))
