"""Shared numerical kernels.

Hermite polynomials, bisection, damped Newton with a finite-difference
Jacobian, symmetric tridiagonal and dense eigen-solvers, the matrix square
root and composite Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import eigh_tridiagonal

from .errors import (
    ArgumentError,
    BracketError,
    BranchSingularityError,
    ConvergenceError,
    NotPositiveSemidefiniteError,
)

# Jacobians whose condition number exceeds this are treated as singular.
SINGULAR_COND = 1e12


def hermite(n: int, x: ArrayLike) -> NDArray | float:
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise ArgumentError(f"Hermite degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if x.ndim else float(h_prev)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if x.ndim else float(h)


def hermite_function(n: int, x: ArrayLike) -> NDArray:
    """Orthonormal Hermite function H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)).

    Uses the normalized recurrence so large n does not overflow.
    """
    if n < 0:
        raise ArgumentError(f"Hermite degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    psi_prev = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if n == 0:
        return psi_prev
    psi = math.sqrt(2.0) * x * psi_prev
    for k in range(2, n + 1):
        psi_prev, psi = psi, math.sqrt(2.0 / k) * x * psi - math.sqrt((k - 1) / k) * psi_prev
    return psi


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = 0.0) -> float:
    """Bracketed bisection.

    Returns the midpoint of the final bracket, which lies within ``tol`` of a
    sign change of ``f``. With ``tol = 0`` the bracket shrinks to adjacent
    floats.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    while True:
        mid = 0.5 * (lo + hi)
        if hi - lo <= 2.0 * tol or mid <= lo or mid >= hi:
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid


def fd_jacobian(g: Callable[[NDArray], NDArray], x: NDArray, rel_step: float = 1e-6) -> NDArray:
    """Central-difference Jacobian with per-component step rel_step*(1+|x_j|)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        s = rel_step * (1.0 + abs(x[j]))
        e = np.zeros_like(x)
        e[j] = s
        cols.append((np.asarray(g(x + e)) - np.asarray(g(x - e))) / (2.0 * s))
    return np.column_stack(cols)


def _solve_step(jac: NDArray, r: NDArray) -> NDArray:
    if not np.all(np.isfinite(jac)):
        raise BranchSingularityError("non-finite Jacobian")
    cond = np.linalg.cond(jac)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise BranchSingularityError(f"singular Jacobian (cond={cond:.3g})")
    return np.linalg.solve(jac, -r)


def newton_iterate(
    g: Callable[[NDArray], NDArray],
    x0: ArrayLike,
    tol: float = 1e-12,
    max_iter: int = 100,
    rel_step: float = 1e-6,
    reject: tuple[type[Exception], ...] = (),
) -> tuple[NDArray, int]:
    """Damped Newton iteration; returns the root and the iteration count.

    Steps are halved (up to 30 times) while the max-norm residual fails to
    decrease; a trial point where ``g`` raises one of ``reject`` counts as a
    failed decrease. One polishing step is taken after the tolerance is met.
    """

    def trial(x_try):
        try:
            return np.asarray(g(x_try), dtype=float)
        except reject:
            return None

    x = np.array(x0, dtype=float)
    r = np.asarray(g(x), dtype=float)
    norm = np.max(np.abs(r))
    for it in range(1, max_iter + 1):
        if norm <= tol:
            step = _solve_step(fd_jacobian(g, x, rel_step), r)
            x_new = x + step
            r_new = trial(x_new)
            if r_new is not None and np.max(np.abs(r_new)) <= norm:
                x = x_new
            return x, it - 1
        step = _solve_step(fd_jacobian(g, x, rel_step), r)
        lam = 1.0
        for _ in range(30):
            x_new = x + lam * step
            r_new = trial(x_new)
            n_new = np.inf if r_new is None else np.max(np.abs(r_new))
            if np.isfinite(n_new) and n_new < norm:
                break
            lam *= 0.5
        else:
            raise ConvergenceError(f"line search failed at iteration {it}, residual {norm:.3g}")
        x, r, norm = x_new, r_new, n_new
    if norm <= tol:
        return x, max_iter
    raise ConvergenceError(f"no convergence in {max_iter} iterations, residual {norm:.3g}")


def newton_nd(
    g: Callable[[NDArray], NDArray],
    x0: ArrayLike,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> NDArray:
    """Solve g(x) = 0 to max-norm ``tol`` by damped Newton."""
    return newton_iterate(g, x0, tol, max_iter)[0]


@dataclass(frozen=True)
class TridiagonalSymmetric:
    diag: NDArray
    offdiag: NDArray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or e.size != max(d.size - 1, 0):
            raise ArgumentError("offdiag must be one shorter than diag")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ArgumentError("tridiagonal entries must be finite")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def order(self) -> int:
        return self.diag.size

    def matvec(self, v: NDArray) -> NDArray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def norm(self) -> float:
        """Row-sum bound on the operator norm."""
        s = np.abs(self.diag).copy()
        s[:-1] += np.abs(self.offdiag)
        s[1:] += np.abs(self.offdiag)
        return float(s.max())


def eig_tridiag(m: TridiagonalSymmetric, k: int) -> list[tuple[float, NDArray]]:
    """The ``k`` eigenpairs nearest zero, sorted by eigenvalue.

    Eigenvectors are unit-norm with a positive first nonnegligible entry.
    """
    if not 1 <= k <= m.order:
        raise ArgumentError(f"k must be in [1, {m.order}], got {k}")
    w = eigh_tridiagonal(m.diag, m.offdiag, eigvals_only=True)
    # the k values nearest zero form a contiguous window of the sorted spectrum
    start = int(np.argmin(np.abs(w)))
    lo, hi = start, start
    while hi - lo + 1 < k:
        if lo == 0:
            hi += 1
        elif hi == w.size - 1 or abs(w[lo - 1]) <= abs(w[hi + 1]):
            lo -= 1
        else:
            hi += 1
    return tridiag_eigpairs(m, lo, hi)


def tridiag_eigpairs(m: TridiagonalSymmetric, lo: int, hi: int) -> list[tuple[float, NDArray]]:
    """Eigenpairs with ascending indices lo..hi (inclusive)."""
    w, v = eigh_tridiagonal(m.diag, m.offdiag, select="i", select_range=(lo, hi))
    out = []
    for j in range(w.size):
        vec = v[:, j]
        big = np.flatnonzero(np.abs(vec) > 1e-8 * np.abs(vec).max())
        if vec[big[0]] < 0:
            vec = -vec
        out.append((float(w[j]), vec))
    return out


def node_count(v: ArrayLike, dead_band: float = 1e-12) -> int:
    """Strict sign changes of ``v``, ignoring entries within dead_band*max|v|."""
    v = np.asarray(v, dtype=float)
    band = dead_band * np.abs(v).max()
    s = np.sign(v[np.abs(v) > band])
    return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass(frozen=True)
class DenseSymmetric:
    """Symmetric matrix; stored in full, exchangeable as a packed lower triangle."""

    matrix: NDArray

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ArgumentError("DenseSymmetric needs a non-empty square matrix")
        object.__setattr__(self, "matrix", 0.5 * (a + a.T))

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def packed(self) -> NDArray:
        return self.matrix[np.tril_indices(self.order)]

    @classmethod
    def from_packed(cls, order: int, values: ArrayLike) -> "DenseSymmetric":
        values = np.asarray(values, dtype=float)
        if values.size != order * (order + 1) // 2:
            raise ArgumentError("packed length does not match order")
        a = np.zeros((order, order))
        a[np.tril_indices(order)] = values
        return cls(a + np.tril(a, -1).T)


def sqrt_spd(m: DenseSymmetric, tol: float = 1e-10) -> DenseSymmetric:
    """Principal square root V sqrt(L) V^T of a positive semidefinite matrix.

    Eigenvalues in [-tol*||m||, 0) are clipped to zero.
    """
    w, v = np.linalg.eigh(m.matrix)
    scale = max(abs(w[0]), abs(w[-1]))
    if w[0] < -tol * scale:
        raise NotPositiveSemidefiniteError(
            f"smallest eigenvalue {w[0]:.3g} below -{tol:g}*||M|| = {-tol * scale:.3g}"
        )
    root = np.sqrt(np.clip(w, 0.0, None))
    return DenseSymmetric((v * root) @ v.T)


def _gl_nodes(order: int) -> tuple[NDArray, NDArray]:
    return np.polynomial.legendre.leggauss(order)


def _gl_composite(f: Callable, lo: float, hi: float, panels: int, order: int) -> float:
    t, w = _gl_nodes(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    fx = np.asarray(f(x), dtype=float).reshape(panels, order)
    return float(np.sum(half * (fx @ w)))


def gauss_legendre(
    f: Callable[[NDArray], NDArray],
    lo: float,
    hi: float,
    panels: int = 8,
    order: int = 10,
) -> tuple[float, float]:
    """Composite Gauss-Legendre quadrature of a vectorized ``f``.

    Returns the value at ``2*panels`` and |value(panels) - value(2*panels)|
    as the error estimate.
    """
    if panels < 1 or order < 1:
        raise ArgumentError("panels and order must be positive")
    coarse = _gl_composite(f, lo, hi, panels, order)
    fine = _gl_composite(f, lo, hi, 2 * panels, order)
    return fine, abs(fine - coarse)


def real_roots_in(coeffs: Sequence[float], lo: float, hi: float, imag_tol: float = 1e-9) -> NDArray:
    """Real roots in [lo, hi] of a polynomial (highest degree first), via companion eigenvalues.

    Leading coefficients below 1e-14 of the largest are dropped; their roots
    sit near infinity and would swamp the companion matrix.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    big = np.abs(coeffs).max() if coeffs.size else 0.0
    lead = np.flatnonzero(np.abs(coeffs) > 1e-14 * big)
    coeffs = coeffs[lead[0]:] if lead.size else coeffs[:0]
    roots = np.roots(coeffs)
    scale = max(1.0, np.max(np.abs(roots))) if roots.size else 1.0
    real = roots[np.abs(roots.imag) <= imag_tol * scale].real
    return np.sort(real[(real >= lo) & (real <= hi)])
