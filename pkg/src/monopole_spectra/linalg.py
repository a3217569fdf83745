"""Symmetric eigensolvers: a dense generalized solver and tridiagonal bisection.

The dense path reduces ``S x = lam M x`` with a Cholesky factor of ``M`` and
hands the standard problem to LAPACK. The tridiagonal path counts sign
changes of the Sturm sequence and bisects; its inner loop is compiled when
the extension is available and falls back to a vectorized numpy version
otherwise. Set ``MONOPOLE_SPECTRA_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

import mpmath
import numpy as np
from scipy.linalg import solve_triangular

from . import _sturm_py

if os.environ.get("MONOPOLE_SPECTRA_PURE", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _sturm as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

__all__ = [
    "BACKEND",
    "NotPositiveDefiniteError",
    "ResidualCheckError",
    "gen_sym_eig",
    "gen_sym_eig_mp",
    "tridiag_eig_bisect",
    "sturm_count",
    "available_backends",
]


class NotPositiveDefiniteError(ArithmeticError):
    """Cholesky factorization of the mass matrix broke down."""


class ResidualCheckError(ArithmeticError):
    """An eigenpair failed the residual test."""


def available_backends() -> list[str]:
    return (["compiled"] if _compiled is not None else []) + ["python"]


def _kernel(backend: str | None):
    if backend is None:
        backend = BACKEND
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled Sturm kernel is not built")
        return _compiled
    if backend == "python":
        return _sturm_py
    raise ValueError(f"unknown backend {backend!r}")


def _lower_symmetric(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    low = np.tril(A)
    return low + np.tril(A, -1).T


def gen_sym_eig(S, M, n_eigs: int | None = None, return_vectors: bool = False, check: bool = True):
    """Lowest eigenvalues of the symmetric-definite pencil ``S x = lam M x``.

    Only the lower triangles of ``S`` and ``M`` are read, so symmetry holds
    by construction.

    Parameters
    ----------
    S, M : (n, n) array_like
        Stiffness-like symmetric matrix and positive definite mass matrix.
    n_eigs : int, optional
        Number of eigenvalues to return (default: all).
    return_vectors : bool
        Also return ``M``-orthonormal eigenvectors as columns.
    check : bool
        Verify ``|S x - lam M x| <= 1e-10 |S| |x|`` for every returned pair.

    Raises
    ------
    NotPositiveDefiniteError
        If the Cholesky factorization of ``M`` fails.
    """
    S = _lower_symmetric(S)
    M = _lower_symmetric(M)
    n = S.shape[0]
    if M.shape != S.shape:
        raise ValueError("S and M must have the same shape")
    if n_eigs is None:
        n_eigs = n
    if not 1 <= n_eigs <= n:
        raise ValueError(f"n_eigs must be in [1, {n}]")
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "mass matrix is not numerically positive definite; assemble in higher precision"
        ) from exc
    if not np.all(np.isfinite(L)):
        raise NotPositiveDefiniteError("Cholesky factor is not finite")
    X = solve_triangular(L, S, lower=True)
    C = solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    lam, Y = np.linalg.eigh(C)
    lam = lam[:n_eigs]
    vecs = solve_triangular(L.T, Y[:, :n_eigs], lower=False)
    if check:
        snorm = np.linalg.norm(S, 2)
        for k in range(n_eigs):
            x = vecs[:, k]
            res = np.linalg.norm(S @ x - lam[k] * (M @ x))
            if res > 1e-10 * max(snorm, np.finfo(float).tiny) * np.linalg.norm(x):
                raise ResidualCheckError(f"eigenpair {k} residual {res:.3e} too large")
    return (lam, vecs) if return_vectors else lam


def gen_sym_eig_mp(S, M, n_eigs: int | None = None, prec: int = 256):
    """Extended-precision variant of :func:`gen_sym_eig` using mpmath.

    ``S`` and ``M`` may hold mpmath numbers or exact rationals; the Cholesky
    reduction and the symmetric eigensolver both run with ``prec`` bits.
    Returns a list of mpmath numbers.
    """
    with mpmath.workprec(prec):
        Sm = mpmath.matrix(S)
        Mm = mpmath.matrix(M)
        n = Sm.rows
        if n_eigs is None:
            n_eigs = n
        try:
            L = mpmath.cholesky(Mm)
        except ValueError as exc:
            raise NotPositiveDefiniteError(str(exc)) from exc
        Linv = mpmath.inverse(L)
        C = Linv * Sm * Linv.T
        for i in range(n):
            for j in range(i):
                C[i, j] = C[j, i] = (C[i, j] + C[j, i]) / 2
        ev = mpmath.eigsy(C, eigvals_only=True)
        vals = sorted(ev[i] for i in range(n))
        return [+v for v in vals[:n_eigs]]


def _prepare(diag, offdiag):
    d = np.ascontiguousarray(diag, dtype=float)
    e = np.ascontiguousarray(offdiag, dtype=float)
    if d.ndim != 1 or d.size < 1:
        raise ValueError("diag must be a nonempty vector")
    if e.shape != (d.size - 1,):
        raise ValueError("offdiag must have length len(diag) - 1")
    e2 = np.ascontiguousarray(e * e)
    pivmin = np.finfo(float).tiny * max(1.0, float(e2.max()) if e2.size else 1.0)
    return d, e, e2, pivmin


def sturm_count(diag, offdiag, sigma: float, backend: str | None = None) -> int:
    """Number of eigenvalues of the tridiagonal matrix strictly below ``sigma``."""
    d, _, e2, pivmin = _prepare(diag, offdiag)
    return int(_kernel(backend).sturm_count(d, e2, float(sigma), pivmin))


def tridiag_eig_bisect(diag, offdiag, index_range=None, abstol: float | None = None,
                       backend: str | None = None) -> np.ndarray:
    """Selected eigenvalues of a symmetric tridiagonal matrix by bisection.

    Parameters
    ----------
    diag : (n,) array_like
    offdiag : (n-1,) array_like
    index_range : (lo, hi), optional
        Half-open range of ascending eigenvalue indices; default all.
    abstol : float, optional
        Absolute bracket width. Default ``4 eps |T|``.
    backend : {"compiled", "python"}, optional

    Returns
    -------
    ndarray of eigenvalues in ascending order.
    """
    d, e, e2, pivmin = _prepare(diag, offdiag)
    n = d.size
    lo, hi = (0, n) if index_range is None else (int(index_range[0]), int(index_range[1]))
    if not 0 <= lo < hi <= n:
        raise ValueError(f"index range ({lo}, {hi}) invalid for order {n}")
    ae = np.abs(e)
    rad = np.zeros(n)
    rad[:-1] += ae
    rad[1:] += ae
    lower = float(np.min(d - rad))
    upper = float(np.max(d + rad))
    tnorm = max(abs(lower), abs(upper))
    # widen slightly so the Gershgorin ends are strict brackets
    pad = 2.0 * np.finfo(float).eps * max(tnorm, 1.0) * n + pivmin
    lower -= pad
    upper += pad
    if abstol is None:
        abstol = 4.0 * np.finfo(float).eps * max(tnorm, np.finfo(float).tiny)
    return np.asarray(_kernel(backend).bisect(d, e2, lo, hi, lower, upper, float(abstol), pivmin))
