"""Dense small-matrix and scalar kernels.

Everything here delegates to numpy/scipy in binary64 or to mpmath when
extended precision is requested.  The rest of the package goes through
these wrappers so the precision policy lives in one place.
"""

import numpy as np
import scipy.linalg
import mpmath

from .errors import NumericalError

#: unit roundoff of binary64
U = 2.0 ** -52

#: decimal digits used for extended-precision eigenproblems (>= 32 required,
#: i.e. at least twice binary64)
EXTENDED_DPS = 40


def smallest_singular_vector(A):
    """Unit-norm vector u minimizing ||A u||_2.

    A must have at least as many rows as columns and finite entries.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise ValueError("need a matrix with rows >= cols")
    if not np.all(np.isfinite(A)):
        raise ValueError("non-finite entries")
    _, _, Vh = np.linalg.svd(A, full_matrices=False)
    return Vh[-1].conj()


def dense_eigenvalues(A, B=None, extended=False):
    """Generalized eigenvalues of the pencil (A, B).

    Returns ``(finite, n_infinite)`` where ``finite`` is an array of the
    finite eigenvalues and ``n_infinite`` counts infinite eigenvalues
    (from a singular B), which are excluded.  With ``extended=True`` the
    solve is carried out in mpmath at EXTENDED_DPS digits; this path
    requires a diagonal B (which is all the pole eigenproblem needs) and
    falls back to a shift-and-invert transformation otherwise.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    n = A.shape[0]
    if B is None:
        B = np.eye(n)
    B = np.asarray(B, dtype=complex)
    if B.shape != A.shape:
        raise ValueError("A and B must have the same shape")

    if not extended:
        alpha, beta = scipy.linalg.eig(A, B, right=False, homogeneous_eigvals=True)
        infinite = np.abs(beta) < 1e3 * U * np.maximum(np.abs(alpha), 1.0)
        finite = alpha[~infinite] / beta[~infinite]
        return finite, int(np.count_nonzero(infinite))

    return _dense_eigenvalues_extended(A, B)


def _dense_eigenvalues_extended(A, B):
    n = A.shape[0]
    diag_B = np.diag(B)
    is_diagonal = np.allclose(B, np.diag(diag_B), atol=0.0)
    with mpmath.workdps(EXTENDED_DPS):
        if is_diagonal:
            try:
                return _extended_schur_path(A, diag_B, n)
            except ZeroDivisionError:
                pass  # singular corner block; use shift-and-invert below
        return _extended_shift_invert(A, B, n)


def _extended_schur_path(A, diag_B, n):
    # Split by zero/nonzero diagonal of B: det(A - x B) = 0 reduces to
    # a standard eigenproblem for the Schur complement on the nonzero
    # block, with one infinite eigenvalue per zero diagonal entry.
    zero = np.abs(diag_B) == 0.0
    idx0 = np.flatnonzero(zero)
    idx1 = np.flatnonzero(~zero)
    if idx1.size == 0:
        return np.empty(0, dtype=complex), n
    A22 = _to_mp(A[np.ix_(idx1, idx1)])
    if idx0.size:
        A11 = _to_mp(A[np.ix_(idx0, idx0)])
        A12 = _to_mp(A[np.ix_(idx0, idx1)])
        A21 = _to_mp(A[np.ix_(idx1, idx0)])
        S = A22 - A21 * _mp_solve(A11, A12)
    else:
        S = A22
    D = mpmath.diag([mpmath.mpc(d) for d in diag_B[idx1]])
    M = mpmath.inverse(D) * S
    vals = _mp_eigvals(M)
    finite = np.array([complex(v) for v in vals])
    return finite, int(idx0.size)


def _mp_eigvals(M):
    vals = mpmath.eig(M, left=False, right=False)
    if isinstance(vals, tuple):  # 1x1 matrices ignore the flags
        vals = vals[0]
    return vals


def _mp_solve(A, B):
    """Solve A X = B column-by-column in mpmath."""
    cols = []
    for j in range(B.cols):
        cols.append(mpmath.lu_solve(A, B[:, j]))
    X = mpmath.zeros(B.rows, B.cols)
    for j, c in enumerate(cols):
        for i in range(B.rows):
            X[i, j] = c[i]
    return X


def _extended_shift_invert(A, B, n):
    # Generic B: shift-and-invert.  Eigenvalues of M = (A - s B)^{-1} B
    # are 1/(x - s); infinite x maps to 0.
    shift = 1.0 + np.max(np.abs(A)) / max(np.max(np.abs(B)), 1.0)
    Am = _to_mp(A) - mpmath.mpf(shift) * _to_mp(B)
    M = mpmath.inverse(Am) * _to_mp(B)
    mus = _mp_eigvals(M)
    scale = max(abs(m) for m in mus)
    if scale == 0:
        return np.empty(0, dtype=complex), n
    finite = []
    n_inf = 0
    for m in mus:
        if m == 0 or abs(m) < 1e3 * mpmath.mpf(10) ** (-EXTENDED_DPS) * scale:
            n_inf += 1
        else:
            finite.append(complex(shift + 1 / m))
    return np.array(finite, dtype=complex), n_inf


def _to_mp(A):
    return mpmath.matrix([[mpmath.mpc(A[i, j]) for j in range(A.shape[1])]
                          for i in range(A.shape[0])])


def symmetric_eigen_range(S):
    """(lambda_min, lambda_max) of a real symmetric (or Hermitian) matrix."""
    S = np.asarray(S)
    if np.isrealobj(S):
        S = S.astype(float)
    scale = np.linalg.norm(S)
    if np.linalg.norm(S - S.conj().T) > 1e-12 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric within tolerance")
    w = np.linalg.eigvalsh(0.5 * (S + S.conj().T))
    return float(w[0]), float(w[-1])


def matrix_exponential(A):
    """exp(A) for a square matrix (scipy.linalg.expm)."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    return scipy.linalg.expm(A)


def polynomial_roots(coeffs, extended=False):
    """Roots of sum_k coeffs[k] z^k (ascending order, leading coeff nonzero)."""
    coeffs = list(coeffs)
    if len(coeffs) < 2:
        raise ValueError("need degree >= 1")
    if coeffs[-1] == 0:
        raise ValueError("leading coefficient is zero")
    if extended:
        with mpmath.workdps(EXTENDED_DPS):
            desc = [mpmath.mpmathify(c) for c in reversed(coeffs)]
            roots = mpmath.polyroots(desc, maxsteps=200, extraprec=80)
            out = np.array([complex(r) for r in roots])
    else:
        out = np.roots(np.asarray(coeffs, dtype=complex)[::-1])

    maxc = max(abs(complex(c)) for c in coeffs)
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=complex))
    for r in out:
        if abs(p(r)) > 1e-10 * maxc * max(1.0, abs(r)) ** (len(coeffs) - 1):
            raise NumericalError("root residual too large")
    return out
