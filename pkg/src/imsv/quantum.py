"""Quantum side: multi-parameter spectral problems and nonlinear operators.

The separated equations F_i(q_i, i hbar d/dq_i, h) Psi_i = 0 must admit
square-integrable solutions simultaneously; the admissible h form the
joint spectrum. For the example model the spectrum and the eigenstates are
known in closed form and the two nonlinear operators act on grid functions
as pointwise fields, A[Psi] = a[Psi](q) * Psi(q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import (
    ArgumentError,
    BranchTrackingError,
    ContinuumRegionError,
    ConvergenceError,
    DegenerateStateError,
    DiscretizationError,
    ForbiddenRegionError,
    GridError,
    NotPositiveSemidefiniteError,
    TruncationError,
    UnsupportedModelError,
)
from .model import ExampleParams, ModelSpec, SpectralPoint, solve_y_branch
from .numerics import (
    DenseSymmetric,
    TridiagonalSymmetric,
    bisect,
    hermite_function,
    newton_iterate,
    node_count,
    real_roots_in,
    sqrt_spd,
    tridiag_eigpairs,
)

NODE_THRESHOLD = 1e-6
BOUNDARY_DECAY = 1e-10


@dataclass(frozen=True)
class Grid1D:
    q_min: float = -10.0
    q_max: float = 10.0
    n_points: int = 401

    def __post_init__(self):
        if int(self.n_points) < 3:
            raise GridError(f"grid needs at least 3 points, got {self.n_points}")
        if not self.q_min < self.q_max:
            raise GridError("q_min must be below q_max")
        object.__setattr__(self, "n_points", int(self.n_points))

    @classmethod
    def symmetric(cls, span: float, n_points: int) -> "Grid1D":
        return cls(-span, span, n_points)

    @property
    def points(self) -> NDArray:
        return np.linspace(self.q_min, self.q_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.q_max - self.q_min) / (self.n_points - 1)

    def refined(self) -> "Grid1D":
        """Same span, half the spacing."""
        return Grid1D(self.q_min, self.q_max, 2 * self.n_points - 1)


def _l2_norm_1d(values: NDArray, dx: float) -> float:
    return math.sqrt(float(np.trapezoid(values * values, dx=dx)))


@dataclass(frozen=True)
class WaveFunction1D:
    grid: Grid1D
    values: NDArray
    node_count: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ArgumentError("values do not match the grid")
        norm = _l2_norm_1d(v, self.grid.spacing)
        if not (norm > 0 and math.isfinite(norm)):
            raise ArgumentError("wavefunction norm must be positive and finite")
        if node_count(v) != self.node_count:
            raise ArgumentError(f"node_count {self.node_count} disagrees with the samples ({node_count(v)})")
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return _l2_norm_1d(self.values, self.grid.spacing)


@dataclass(frozen=True)
class ProductState:
    factors: tuple[WaveFunction1D, ...]
    spectral: SpectralPoint

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) != self.spectral.h.size:
            raise ArgumentError("one factor per separated coordinate is required")
        for f in self.factors:
            if abs(f.norm - 1.0) > 1e-12:
                raise ArgumentError("factors must be normalized")

    @property
    def values(self) -> NDArray:
        """Samples on the tensor grid, indexed [i_1, i_2, ...]."""
        out = self.factors[0].values
        for f in self.factors[1:]:
            out = np.multiply.outer(out, f.values)
        return out


@dataclass(frozen=True)
class FieldResult:
    values: NDArray  # NaN off the mask
    mask: NDArray
    mean: float
    max_abs_deviation: float

    def deviation_from(self, target: float) -> float:
        """max |field - target| over the mask."""
        return float(np.max(np.abs(self.values[self.mask] - target)))


# ---------------------------------------------------------------- spectrum


def omega(params: ExampleParams, h: float) -> float:
    """Oscillator frequency sqrt(1 - 2h/a^2) of the rewritten separated equations."""
    if h >= params.h_max:
        raise ContinuumRegionError(f"h={h} is not below a^2/2={params.h_max}")
    return math.sqrt(1.0 - h / params.h_max)


def _spectral_equation(params: ExampleParams, total: int) -> Callable[[float], float]:
    """LHS - RHS of  eps/(2a^4) h^2 + h = total*hbar*sqrt(1 - 2h/a^2)."""
    c = params.eps / (2.0 * params.a**4)
    lam = total * params.hbar
    return lambda h: c * h * h + h - lam * math.sqrt(max(0.0, 1.0 - h / params.h_max))


def joint_spectrum_example(params: ExampleParams, n: int, m: int) -> SpectralPoint:
    """Exact spectral point (h, g) of the example for quantum numbers (n, m).

    h is the unique root in [0, a^2/2) of the spectral equation (bisection);
    g = (m - n) hbar omega(h).
    """
    if n < 0 or m < 0:
        raise ArgumentError("quantum numbers must be nonnegative")
    f = _spectral_equation(params, n + m + 1)
    h = bisect(f, 0.0, params.h_max, 0.0)
    lhs = h + params.eps / (2.0 * params.a**4) * h * h
    if abs(f(h)) > 1e-12 * max(1.0, lhs):
        raise ConvergenceError(f"spectral root residual {f(h):.3g} too large")
    g = (m - n) * params.hbar * omega(params, h)
    return SpectralPoint(np.array([h, g]), (n, m), params.hbar)


def spectral_root_quartic(params: ExampleParams, total: int) -> float:
    """Cross-check for h via the squared (quartic) equation's companion matrix.

    Real roots in [0, a^2/2) of (c h^2 + h)^2 - lam^2 (1 - 2h/a^2) are
    filtered by the sign-correct unsquared equation.
    """
    c = params.eps / (2.0 * params.a**4)
    lam = total * params.hbar
    coeffs = [c * c, 2.0 * c, 1.0, 2.0 * lam * lam / params.a**2, -lam * lam]
    f = _spectral_equation(params, total)
    cands = [r for r in real_roots_in(coeffs, 0.0, params.h_max) if r < params.h_max]
    good = [r for r in cands if abs(f(r)) <= 1e-8 * max(1.0, lam)]
    if len(good) != 1:
        raise ConvergenceError(f"expected one admissible quartic root, found {good}")
    return float(good[0])


def eigenfunction_1d(params: ExampleParams, spectral: SpectralPoint, which: int, grid: Grid1D) -> WaveFunction1D:
    """Normalized H_n(sqrt(omega/hbar) q) exp(-omega q^2 / (2 hbar)) on ``grid``.

    ``which`` is 1 or 2 and selects the quantum number from ``spectral``.
    """
    if which not in (1, 2):
        raise ArgumentError("which must be 1 or 2")
    n = spectral.qnums[which - 1]
    w = omega(params, float(spectral.h[0]))
    x = math.sqrt(w / spectral.hbar) * grid.points
    v = hermite_function(n, x)
    peak = np.abs(v).max()
    if max(abs(v[0]), abs(v[-1])) > BOUNDARY_DECAY * peak:
        raise TruncationError(
            f"state n={n} not decayed at the grid edge; need span beyond "
            f"{6 * math.sqrt(spectral.hbar / w):.3g}"
        )
    v = v / _l2_norm_1d(v, grid.spacing)
    return WaveFunction1D(grid, v, node_count(v))


def product_state(params: ExampleParams, n: int, m: int, grid: Grid1D) -> ProductState:
    sp = joint_spectrum_example(params, n, m)
    return ProductState((eigenfunction_1d(params, sp, 1, grid), eigenfunction_1d(params, sp, 2, grid)), sp)


def separated_operator(model: ModelSpec, i: int, h: ArrayLike, grid: Grid1D) -> TridiagonalSymmetric:
    """-hbar^2 d^2/dq^2 + B/A on the interior grid points (Dirichlet ends).

    F_i = A y^2 + B quantizes to A (-hbar^2 d^2) + B; dividing by A keeps the
    zero-eigenvalue condition and makes the matrix symmetric.
    """
    x = grid.points[1:-1]
    a, b = model.fs[i].y_split(x, np.asarray(h, dtype=float))
    if np.any(a == 0.0) or np.any(np.sign(a) != np.sign(a[0])):
        raise UnsupportedModelError("y^2 coefficient must keep one sign on the grid")
    kin = model.hbar**2 / grid.spacing**2
    return TridiagonalSymmetric(2.0 * kin + b / a, np.full(x.size - 1, -kin))


def separated_eigenvalue(model: ModelSpec, i: int, h: ArrayLike, nodes: int, grid: Grid1D) -> float:
    """Eigenvalue of the i-th separated operator whose eigenvector has ``nodes`` sign changes."""
    op = separated_operator(model, i, h, grid)
    lam, vec = tridiag_eigpairs(op, nodes, nodes)[0]
    found = node_count(vec)
    if found != nodes:
        raise BranchTrackingError(f"coordinate {i}: wanted {nodes} nodes, eigenvector has {found}")
    return lam


def brute_force_joint_spectrum(
    model: ModelSpec,
    qnums: Sequence[int],
    grid: Grid1D,
    h0: ArrayLike | None = None,
    tol: float = 1e-9,
) -> SpectralPoint:
    """Joint spectral point by grid diagonalization and N-dimensional Newton.

    mu_i(h) is the node-selected eigenvalue of the discretized i-th separated
    operator; h solves mu(h) = 0. Trial Newton steps that lose the
    node-count branch are shortened; losing it at an accepted iterate or at
    ``h0`` raises BranchTrackingError.
    """
    qnums = tuple(int(k) for k in qnums)
    if len(qnums) != model.n_dims:
        raise ArgumentError("one quantum number per coordinate is required")
    h0 = np.array(model.branch_seed if h0 is None else h0, dtype=float)

    def mu(h):
        return np.array([separated_eigenvalue(model, i, h, k, grid) for i, k in enumerate(qnums)])

    h, _ = newton_iterate(mu, h0, tol * max(1.0, model.hbar), max_iter=100, reject=(BranchTrackingError,))
    return SpectralPoint(h, qnums, model.hbar)


# ---------------------------------------------------------- nonlinear fields


def _laplacian(psi: NDArray, dx: float) -> NDArray:
    lap = np.zeros_like(psi)
    lap[1:-1, 1:-1] = (
        psi[2:, 1:-1] + psi[:-2, 1:-1] + psi[1:-1, 2:] + psi[1:-1, :-2] - 4.0 * psi[1:-1, 1:-1]
    ) / (dx * dx)
    return lap


def _second_diffs(psi: NDArray, dx: float) -> tuple[NDArray, NDArray]:
    d11 = np.zeros_like(psi)
    d22 = np.zeros_like(psi)
    d11[1:-1, :] = (psi[2:, :] - 2.0 * psi[1:-1, :] + psi[:-2, :]) / (dx * dx)
    d22[:, 1:-1] = (psi[:, 2:] - 2.0 * psi[:, 1:-1] + psi[:, :-2]) / (dx * dx)
    return d11, d22


def _check_psi(psi: ArrayLike, grid: Grid1D) -> NDArray:
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (grid.n_points, grid.n_points):
        raise ArgumentError(f"psi must have shape {(grid.n_points,) * 2}, got {psi.shape}")
    if not np.any(psi != 0.0):
        raise DegenerateStateError("psi vanishes identically")
    return psi


def _node_mask(psi: NDArray) -> NDArray:
    mask = np.abs(psi) >= NODE_THRESHOLD * np.abs(psi).max()
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = False
    return mask


def _fields(params: ExampleParams, psi: NDArray, grid: Grid1D) -> tuple[NDArray, NDArray, NDArray]:
    """(h-field, g-field, mask), both fields NaN off the mask."""
    x = grid.points
    dx = grid.spacing
    q1, q2 = np.meshgrid(x, x, indexing="ij")
    r2 = q1 * q1 + q2 * q2
    mask = _node_mask(psi)
    safe = np.where(mask, psi, 1.0)
    # K = (-hbar^2 Lap psi + q^2 psi) / psi
    k = (-params.hbar**2 * _laplacian(psi, dx) + r2 * psi) / safe
    w = params.a**2 + r2
    rad = 1.0 + params.eps * k / (w * w)
    mask &= rad >= 0.0
    if not mask.any():
        raise DegenerateStateError("no grid point survives the node mask")
    # (a^2/eps) w (sqrt(rad) - 1) without the 0/0 at eps = 0
    hf = params.a**2 * k / (w * (1.0 + np.sqrt(np.where(mask, rad, 1.0))))
    d11, d22 = _second_diffs(psi, dx)
    gf = 0.5 * (params.hbar**2 * (d11 - d22) / safe + (2.0 * hf / params.a**2 - 1.0) * (q1 * q1 - q2 * q2))
    nan = np.full_like(psi, np.nan)
    return np.where(mask, hf, nan), np.where(mask, gf, nan), mask


def _field_result(values: NDArray, mask: NDArray) -> FieldResult:
    sel = values[mask]
    mean = float(np.mean(sel))
    return FieldResult(values, mask, mean, float(np.max(np.abs(sel - mean))))


def apply_nonlinear_h(params: ExampleParams, psi: ArrayLike, grid: Grid1D) -> FieldResult:
    """Pointwise field of the nonlinear Hamiltonian.

    h[Psi](q) = (a^2/eps)(q^2+a^2){-1 + sqrt(1 + eps K/(a^2+q^2)^2)},
    K = (-hbar^2 Lap Psi + q^2 Psi)/Psi with the 5-point Laplacian. Points
    with |Psi| < 1e-6 max|Psi|, boundary points and points with a negative
    radicand are masked out.
    """
    hf, _, mask = _fields(params, _check_psi(psi, grid), grid)
    return _field_result(hf, mask)


def apply_nonlinear_g(params: ExampleParams, psi: ArrayLike, grid: Grid1D) -> FieldResult:
    """Pointwise field of the second nonlinear integral.

    g[Psi] = [hbar^2 (d11 - d22)Psi/Psi + (2 h[Psi]/a^2 - 1)(q1^2 - q2^2)] / 2.
    """
    _, gf, mask = _fields(params, _check_psi(psi, grid), grid)
    return _field_result(gf, mask)


def _erode(mask: NDArray) -> NDArray:
    """Points whose whole 5-point stencil lies inside ``mask``."""
    out = mask.copy()
    out[1:, :] &= mask[:-1, :]
    out[:-1, :] &= mask[1:, :]
    out[:, 1:] &= mask[:, :-1]
    out[:, :-1] &= mask[:, 1:]
    out[0, :] = out[-1, :] = out[:, 0] = out[:, -1] = False
    return out


def weak_commutator(params: ExampleParams, psi: ArrayLike, grid: Grid1D) -> float:
    """||H(G Psi) - G(H Psi)|| / ||Psi|| with A Psi := a[Psi] Psi.

    The outer application differentiates the inner product field, so it is
    only evaluated where the inner field is defined on the whole stencil.
    """
    psi = _check_psi(psi, grid)
    hf, gf, mask = _fields(params, psi, grid)
    g_psi = np.where(mask, gf, 0.0) * psi
    h_psi = np.where(mask, hf, 0.0) * psi
    hg, _, m_hg = _fields(params, g_psi, grid) if np.any(g_psi) else (None, None, None)
    _, gh, m_gh = _fields(params, h_psi, grid)
    core = _erode(mask) & m_gh
    if hg is None:
        # g-field vanished identically: H(G Psi) = 0
        comm = np.where(core, -gh * h_psi, 0.0)
    else:
        core &= m_hg
        comm = np.where(core, hg * g_psi - gh * h_psi, 0.0)
    if not core.any():
        raise DegenerateStateError("no grid point survives the composed masks")
    return math.sqrt(float(np.sum(comm * comm)) / float(np.sum(psi * psi)))


def eigen_residual(params: ExampleParams, psi: ArrayLike, grid: Grid1D, h: float) -> float:
    """Division-free residual of the single-parameter equation, relative to ||Psi||.

    {-hbar^2 Lap + q^2 - (eps/a^4) h^2 - 2(q^2/a^2 + 1) h} Psi, interior points.
    """
    psi = _check_psi(psi, grid)
    x = grid.points
    q1, q2 = np.meshgrid(x, x, indexing="ij")
    r2 = q1 * q1 + q2 * q2
    res = (
        -params.hbar**2 * _laplacian(psi, grid.spacing)
        + (r2 - params.eps / params.a**4 * h * h - 2.0 * (r2 / params.a**2 + 1.0) * h) * psi
    )[1:-1, 1:-1]
    return math.sqrt(float(np.sum(res * res)) / float(np.sum(psi * psi)))


# ------------------------------------------------------ linear quantization


def _dense_kinetic(params: ExampleParams, grid: Grid1D) -> tuple[NDArray, NDArray]:
    """-hbar^2 Lap + q^2 (5-point, Dirichlet) on interior points, and q^2."""
    x = grid.points[1:-1]
    n = x.size
    d = (2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) * (params.hbar**2 / grid.spacing**2)
    eye = np.eye(n)
    k = np.kron(d, eye) + np.kron(eye, d)
    r2 = np.add.outer(x * x, x * x).ravel()
    k[np.diag_indices_from(k)] += r2
    return k, r2


def linear_quantization_matrix(params: ExampleParams, grid: Grid1D) -> NDArray:
    """Symmetric sandwich (a^2/eps) W^1/2 (-I + sqrt(I + eps S K S)) W^1/2.

    K = -hbar^2 Lap + q^2, S = diag 1/(a^2+q^2), W = diag (a^2+q^2).
    """
    if not params.eps > 0:
        raise ArgumentError("linear quantization of the deformed model needs eps > 0")
    k, r2 = _dense_kinetic(params, grid)
    w = params.a**2 + r2
    s = 1.0 / w
    operand = np.eye(k.shape[0]) + params.eps * (s[:, None] * k * s[None, :])
    try:
        root = sqrt_spd(DenseSymmetric(operand)).matrix
    except NotPositiveSemidefiniteError as exc:
        raise DiscretizationError(f"square-root operand lost positivity; shrink the spacing ({exc})") from exc
    root[np.diag_indices_from(root)] -= 1.0
    sw = np.sqrt(w)
    return (params.a**2 / params.eps) * (sw[:, None] * root * sw[None, :])


def linear_quantization_spectrum(params: ExampleParams, k_levels: int, grid: Grid1D) -> list[float]:
    """The ``k_levels`` lowest eigenvalues of the linearly quantized Hamiltonian."""
    a = linear_quantization_matrix(params, grid)
    w = scipy.linalg.eigh(a, eigvals_only=True, subset_by_index=[0, k_levels - 1])
    return [float(v) for v in w]


def weighted_linear_spectrum(params: ExampleParams, k_levels: int, grid: Grid1D) -> list[float]:
    """Lowest eigenvalues of (a^2/2) W^-1/2 K W^-1/2, the eps = 0 operator."""
    k, r2 = _dense_kinetic(params, grid)
    iw = 1.0 / np.sqrt(params.a**2 + r2)
    a = 0.5 * params.a**2 * (iw[:, None] * k * iw[None, :])
    w = scipy.linalg.eigh(a, eigvals_only=True, subset_by_index=[0, k_levels - 1])
    return [float(v) for v in w]


# ---------------------------------------------------------- classical limit


def classical_limit_check(
    model: ModelSpec,
    i: int,
    h: ArrayLike,
    q: float,
    hbar_list: Sequence[float],
    action: tuple[Callable[[float], float], Callable[[float], float]] | None = None,
) -> list[float]:
    """Residual of F_i(q, i hbar d/dq, h) exp(i S/hbar), divided by exp(i S/hbar).

    Uses (i hbar d)^2 e^{iS/hbar} = (S'^2 - i hbar S'') e^{iS/hbar}, so the result
    is A (S'^2 - i hbar S'') + B. ``action`` supplies (S', S''); by default
    S' = Y_i (the classical momentum branch) and S'' follows from the
    differentiated radicand. Returns |result| / max(1, |A| S'^2 + |B|).
    """
    f = model.fs[i]
    h = np.asarray(h, dtype=float)
    a, b = (float(v) for v in f.y_split(q, h))
    if action is None:
        y = solve_y_branch(f, q, h, 1)
        if y == 0.0:
            raise ForbiddenRegionError(f"q={q} is a turning point; S'' is unbounded there")
        da, db = (float(v) for v in f.y_split_dx(q, h))
        drad = -(db * a - b * da) / (a * a)
        s1, s2 = y, drad / (2.0 * y)
    else:
        s1, s2 = float(action[0](q)), float(action[1](q))
    scale = max(1.0, abs(a) * s1 * s1 + abs(b))
    return [abs(complex(a * s1 * s1 + b, -hb * a * s2)) / scale for hb in hbar_list]
