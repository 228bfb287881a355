"""Small dense linear algebra: partial-pivot elimination and cyclic Jacobi."""

import numpy as np


class SingularMatrixError(np.linalg.LinAlgError):
    pass


def solve(A, b, pivot_tol=1e-13):
    """Solve ``A x = b`` by Gaussian elimination with partial pivoting.

    ``A`` must be square. Raises :class:`SingularMatrixError` when a pivot
    falls below ``pivot_tol`` times the largest entry of ``A``.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"solve needs a square matrix, got shape {A.shape}")
    if b.shape[0] != n:
        raise ValueError(f"right-hand side has length {b.shape[0]}, expected {n}")
    scale = max(np.abs(A).max(), 1.0)
    aug = np.column_stack([A, b.reshape(n, -1)])
    for k in range(n):
        piv = k + int(np.argmax(np.abs(aug[k:, k])))
        if abs(aug[piv, k]) <= pivot_tol * scale:
            raise SingularMatrixError(f"matrix is singular to working precision (column {k})")
        if piv != k:
            aug[[k, piv]] = aug[[piv, k]]
        factors = aug[k + 1:, k] / aug[k, k]
        aug[k + 1:, k:] -= np.outer(factors, aug[k, k:])
    x = np.zeros_like(aug[:, n:])
    for k in range(n - 1, -1, -1):
        x[k] = (aug[k, n:] - aug[k, k + 1:n] @ x[k + 1:]) / aug[k, k]
    return x.reshape(b.shape)


def jacobi_eigenvalues(S, tol=1e-15, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = np.array(S, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("jacobi_eigenvalues needs a symmetric matrix")
    a = 0.5 * (a + a.T)
    total = np.sqrt(np.sum(a * a))
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        # summed directly: the difference of the full and diagonal norms stalls at rounding level
        off = np.sqrt(np.sum(a[off_mask] ** 2))
        if off <= tol * max(total, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                diff = a[q, q] - a[p, p]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * abs(diff):
                    # rotation angle below rounding: annihilate directly
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta)) if theta != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # rotate rows/cols p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    else:
        raise np.linalg.LinAlgError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))
