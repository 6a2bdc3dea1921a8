"""Classical integrals of motion reconstructed from the F-functions.

Given a phase point (q, p), the separated equations F_i(q_i, p_i, h) = 0 are
N algebraic equations for the N separation constants; their solution
h(q, p) is the set of commuting integrals. The example model also has the
integrals in closed form, which serve as oracles here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ArgumentError, BranchSingularityError, ForbiddenRegionError
from .model import ExampleParams, ModelSpec, PhasePoint, eval_f, y_radicand
from .numerics import SINGULAR_COND, bisect, gauss_legendre, newton_iterate

PhaseFunction = Callable[[PhasePoint], float]


@dataclass(frozen=True)
class IntegralValues:
    h: NDArray
    converged: bool
    newton_iters: int


@dataclass(frozen=True)
class ActionResult:
    turning_points: tuple[float, ...]
    value: float
    error: float


class Motion(enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"


def separated_residuals(model: ModelSpec, pt: PhasePoint, h: ArrayLike) -> NDArray:
    """G_i(h) = F_i(q_i, p_i, h) for every coordinate."""
    if pt.n != model.n_dims:
        raise ArgumentError(f"phase point has {pt.n} coordinates, model has {model.n_dims}")
    return np.array([eval_f(f, q, p, h) for f, q, p in zip(model.fs, pt.q, pt.p)])


def integrals_jacobian(model: ModelSpec, pt: PhasePoint, h: ArrayLike) -> NDArray:
    """Matrix dF_i/dh_l at (q_i, p_i, h)."""
    h = np.asarray(h, dtype=float)
    return np.array([f.dz(q, p, h) for f, q, p in zip(model.fs, pt.q, pt.p)])


def jacobian_rank(model: ModelSpec, pt: PhasePoint, h: ArrayLike, rtol: float = 1e-10) -> int:
    """Numerical rank of dF_i/dh_l; a diagnostic, not an independence proof."""
    jac = integrals_jacobian(model, pt, h)
    return int(np.linalg.matrix_rank(jac, tol=rtol * max(1.0, np.abs(jac).max())))


def solve_integrals(
    model: ModelSpec,
    pt: PhasePoint,
    h0: ArrayLike | None = None,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> IntegralValues:
    """Values of the integrals H_1..H_N at ``pt`` by Newton from ``h0``.

    The Jacobian is a central finite difference with step 1e-6*(1+|h|).
    Raises BranchSingularityError or ConvergenceError.
    """
    h0 = np.array(model.branch_seed if h0 is None else h0, dtype=float)
    if h0.shape != (model.n_dims,):
        raise ArgumentError("h0 must have length n_dims")
    h, iters = newton_iterate(lambda v: separated_residuals(model, pt, v), h0, tol, max_iter)
    return IntegralValues(h=h, converged=True, newton_iters=iters)


def continue_integrals(
    model: ModelSpec,
    pt: PhasePoint,
    steps: int = 8,
    tol: float = 1e-10,
) -> IntegralValues:
    """Integrals on the branch continued from ``branch_seed`` at the phase-space origin.

    The seed must solve the separated equations at the origin with an
    invertible Jacobian; the solution is then tracked along the straight
    path origin -> ``pt``.
    """
    origin = PhasePoint(np.zeros(model.n_dims), np.zeros(model.n_dims))
    seed = np.array(model.branch_seed)
    jac = integrals_jacobian(model, origin, seed)
    cond = np.linalg.cond(jac)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise BranchSingularityError(f"dF/dh singular at the branch anchor (cond={cond:.3g})")
    res = solve_integrals(model, origin, seed, tol)
    h, total = res.h, res.newton_iters
    target = pt.as_vector()
    for k in range(1, steps + 1):
        sub = PhasePoint.from_vector(target * (k / steps))
        res = solve_integrals(model, sub, h, tol)
        h, total = res.h, total + res.newton_iters
    return IntegralValues(h=h, converged=True, newton_iters=total)


def example_hamiltonian(params: ExampleParams, pt: PhasePoint) -> float:
    """Closed-form first integral of the example.

    H = (a^2/eps)(q^2+a^2){-1 + sqrt(1 + eps(p^2+q^2)/(a^2+q^2)^2)},
    evaluated in a cancellation-free form that reduces to
    a^2(p^2+q^2)/(2(a^2+q^2)) at eps = 0.
    """
    a2 = params.a**2
    q2 = float(pt.q @ pt.q)
    k = float(pt.p @ pt.p) + q2
    w = a2 + q2
    return a2 * k / (w * (1.0 + math.sqrt(1.0 + params.eps * k / (w * w))))


def example_second_integral(params: ExampleParams, pt: PhasePoint) -> float:
    """G = [(2H/a^2 - 1)(q1^2 - q2^2) - (p1^2 - p2^2)] / 2."""
    h = example_hamiltonian(params, pt)
    q1, q2 = pt.q
    p1, p2 = pt.p
    return 0.5 * ((2.0 * h / params.a**2 - 1.0) * (q1 * q1 - q2 * q2) - (p1 * p1 - p2 * p2))


def example_integrals(params: ExampleParams, pt: PhasePoint) -> NDArray:
    return np.array([example_hamiltonian(params, pt), example_second_integral(params, pt)])


def _stencil_derivs(f: PhaseFunction, pt: PhasePoint, steps: NDArray) -> NDArray:
    v = pt.as_vector()
    out = np.empty(v.size)
    for k in range(v.size):
        e = np.zeros(v.size)
        e[k] = steps[k]
        out[k] = (f(PhasePoint.from_vector(v + e)) - f(PhasePoint.from_vector(v - e))) / (2.0 * steps[k])
    return out


def phase_gradient(f: PhaseFunction, pt: PhasePoint, step: float = 1e-4) -> NDArray:
    """Central-difference gradient (d/dq..., d/dp...) with one Richardson level."""
    steps = step * (1.0 + np.abs(pt.as_vector()))
    coarse = _stencil_derivs(f, pt, steps)
    fine = _stencil_derivs(f, pt, 0.5 * steps)
    return (4.0 * fine - coarse) / 3.0


def _bracket(df: NDArray, dg: NDArray) -> float:
    n = df.size // 2
    return float(df[:n] @ dg[n:] - df[n:] @ dg[:n])


def poisson_bracket(f: PhaseFunction, g: PhaseFunction, pt: PhasePoint, step: float = 1e-4) -> float:
    """{f, g} = sum_k (df/dq_k dg/dp_k - df/dp_k dg/dq_k) by central differences.

    Steps are step*(1+|coordinate|); the value is Richardson-extrapolated
    from the brackets at the step and at half the step.
    """
    if not step > 0:
        raise ArgumentError("step must be positive")
    steps = step * (1.0 + np.abs(pt.as_vector()))
    coarse = _bracket(_stencil_derivs(f, pt, steps), _stencil_derivs(g, pt, steps))
    fine = _bracket(_stencil_derivs(f, pt, 0.5 * steps), _stencil_derivs(g, pt, 0.5 * steps))
    return (4.0 * fine - coarse) / 3.0


def potential(model: ModelSpec | ExampleParams, q: ArrayLike) -> float:
    """V(q) = H(q, p=0) on the physical branch."""
    q = np.asarray(q, dtype=float)
    pt = PhasePoint(q, np.zeros_like(q))
    if isinstance(model, ExampleParams):
        if q.size != 2:
            raise ArgumentError("the example model is two-dimensional")
        return example_hamiltonian(model, pt)
    return float(continue_integrals(model, pt).h[0])


def classify_motion(params: ExampleParams, h: float) -> Motion:
    """Finite iff h < a^2/2; the level set at the boundary is unbounded."""
    return Motion.FINITE if h < params.h_max else Motion.INFINITE


def _radicand(model: ModelSpec, i: int, h: NDArray) -> Callable[[NDArray], NDArray]:
    f = model.fs[i]
    return lambda x: y_radicand(f, x, h)


def turning_points(
    model: ModelSpec,
    i: int,
    h: ArrayLike,
    q_inside: float = 0.0,
    q_max: float = 1e6,
) -> tuple[float, float]:
    """Turning points enclosing ``q_inside``, located by bisection to 1e-12.

    Raises ForbiddenRegionError if ``q_inside`` is not allowed, and
    ArgumentError if the allowed interval is not bounded within ``q_max``.
    """
    h = np.asarray(h, dtype=float)
    rad = _radicand(model, i, h)
    if rad(np.array(q_inside)) < 0:
        raise ForbiddenRegionError(f"q={q_inside} is classically forbidden")
    ends = []
    for direction in (-1.0, 1.0):
        inner, width = q_inside, 1.0
        while rad(np.array(q_inside + direction * width)) >= 0:
            inner = q_inside + direction * width
            width *= 2.0
            if width > q_max:
                raise ArgumentError("allowed region is unbounded (infinite motion)")
        lo, hi = sorted((inner, q_inside + direction * width))
        ends.append(bisect(lambda x: float(rad(np.array(x))), lo, hi, 1e-12))
    return ends[0], ends[1]


def action_integral(
    model: ModelSpec,
    i: int,
    h: ArrayLike,
    q_range: Sequence[float],
    panels: int = 8,
    order: int = 12,
) -> ActionResult:
    """S_i = integral of Y_i dq over ``q_range`` by Gauss-Legendre.

    Each half of the range is mapped by u^2 = distance to its endpoint, which
    removes the square-root singularity at turning points.
    """
    h = np.asarray(h, dtype=float)
    lo, hi = float(q_range[0]), float(q_range[1])
    if not lo < hi:
        raise ArgumentError("q_range must be increasing")
    rad = _radicand(model, i, h)
    scale = max(1e-300, float(np.max(np.abs(rad(np.linspace(lo, hi, 65))))))
    slack = 1e-10 * scale

    def y(x):
        r = rad(x)
        if np.any(r < -slack):
            bad = x[np.argmin(r)]
            raise ForbiddenRegionError(f"radicand negative at q={bad:.6g} inside the range")
        return np.sqrt(np.clip(r, 0.0, None))

    mid = 0.5 * (lo + hi)
    umax = math.sqrt(mid - lo)
    left, e_left = gauss_legendre(lambda u: 2.0 * u * y(lo + u * u), 0.0, umax, panels, order)
    right, e_right = gauss_legendre(lambda u: 2.0 * u * y(hi - u * u), 0.0, umax, panels, order)
    tps = tuple(x for x in (lo, hi) if abs(rad(np.array(x))) <= 1e-9 * scale)
    return ActionResult(turning_points=tps, value=left + right, error=e_left + e_right)


def cycle_action(model: ModelSpec, i: int, h: ArrayLike, q_inside: float = 0.0, **kw) -> ActionResult:
    """Closed-orbit action: twice the integral between the enclosing turning points."""
    lo, hi = turning_points(model, i, h, q_inside)
    half = action_integral(model, i, h, (lo, hi), **kw)
    return ActionResult(turning_points=(lo, hi), value=2.0 * half.value, error=2.0 * half.error)
