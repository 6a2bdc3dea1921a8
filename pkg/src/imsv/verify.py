"""Verification suites behind ``imsv verify``.

Each suite appends named checks to a RunReport. A check passes when
|value| <= tolerance; range checks store the distance from the range centre
as the value and the half-width as the tolerance, with the raw quantity in
``observed``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import classical, quantum
from .errors import ImsvError
from .model import ExampleParams, ModelSpec, PhasePoint, build_example_model, match_example
from .rng import SplitMix64

SUITES = ("classical", "quantum", "limit")


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    observed: float | None = None
    error: str | None = None


@dataclass
class RunReport:
    command: str
    inputs: dict
    results: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)

    def add_result(self, name: str, value) -> None:
        self.results.append({"name": name, "value": value})

    def check(self, name: str, value: float, tolerance: float, observed: float | None = None) -> Check:
        value = float(value)
        ok = math.isfinite(value) and abs(value) <= tolerance
        c = Check(name, value if math.isfinite(value) else -1.0, tolerance, ok, observed)
        self.checks.append(c)
        return c

    def check_range(self, name: str, observed: float, lo: float, hi: float) -> Check:
        centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return self.check(name, observed - centre, half, observed=float(observed))

    def fail(self, name: str, exc: Exception) -> None:
        self.checks.append(Check(name, -1.0, 0.0, False, error=f"{type(exc).__name__}: {exc}"))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> str:
        d = {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "checks": [{k: v for k, v in asdict(c).items() if v is not None} for c in self.checks],
            "passed": self.passed,
        }
        return json.dumps(d, indent=2) + "\n"


def _guard(report: RunReport, name: str, fn: Callable[[], None]) -> None:
    try:
        fn()
    except ImsvError as exc:
        report.fail(name, exc)


def halving_ratios(values: list[float]) -> list[float]:
    return [values[k] / values[k + 1] for k in range(len(values) - 1)]


def classical_suite(model: ModelSpec, seed: int, report: RunReport, n_points: int = 100) -> None:
    """Poisson commutativity of the reconstructed integrals at seeded points."""
    params = match_example(model)
    n = model.n_dims
    origin = PhasePoint(np.zeros(n), np.zeros(n))
    try:
        classical.continue_integrals(model, origin)
    except ImsvError as exc:
        report.fail("classical.branch_anchor", exc)
        return
    rng = SplitMix64(seed)
    pts = [PhasePoint.from_vector(v) for v in rng.points(n_points, 2 * n, -2.0, 2.0)]

    worst_bracket = worst_anti = worst_sub = worst_agree = 0.0
    min_rank = n
    for pt in pts:
        try:
            centre = classical.continue_integrals(model, pt).h
        except ImsvError as exc:
            report.fail("classical.continuation", exc)
            return
        cache: dict[bytes, np.ndarray] = {}

        def integrals(p: PhasePoint) -> np.ndarray:
            key = p.as_vector().tobytes()
            if key not in cache:
                cache[key] = classical.solve_integrals(model, p, centre).h
            return cache[key]

        funcs = [lambda p, k=k: float(integrals(p)[k]) for k in range(n)]
        grads = [classical.phase_gradient(f, pt) for f in funcs]
        for k in range(n):
            for l in range(k + 1, n):
                b = classical.poisson_bracket(funcs[k], funcs[l], pt)
                b_rev = classical.poisson_bracket(funcs[l], funcs[k], pt)
                scale = 1.0 + np.linalg.norm(grads[k]) * np.linalg.norm(grads[l])
                worst_bracket = max(worst_bracket, abs(b) / scale)
                worst_anti = max(worst_anti, abs(b + b_rev) / scale)
        min_rank = min(min_rank, classical.jacobian_rank(model, pt, centre))
        if params is not None:
            closed = classical.example_integrals(params, pt)
            worst_sub = max(worst_sub, float(np.max(np.abs(classical.separated_residuals(model, pt, closed)))))
            worst_agree = max(worst_agree, float(np.max(np.abs(centre - closed))))

    report.add_result("classical.points", len(pts))
    report.add_result("classical.min_jacobian_rank", min_rank)
    report.check("classical.poisson_bracket", worst_bracket, 1e-6)
    report.check("classical.bracket_antisymmetry", worst_anti, 1e-9)
    if params is not None:
        report.check("classical.closed_form_substitution", worst_sub, 1e-10)
        report.check("classical.solver_vs_closed_form", worst_agree, 1e-8)


def _example_quantum(params: ExampleParams, report: RunReport) -> None:
    model_grid = quantum.Grid1D(-10.0, 10.0, 801)
    model = build_example_model(params)

    def oracle():
        worst = 0.0
        for total in range(3):
            for n in range(total + 1):
                brute = quantum.brute_force_joint_spectrum(model, (n, total - n), model_grid)
                exact = quantum.joint_spectrum_example(params, n, total - n)
                worst = max(worst, float(np.max(np.abs(brute.h - exact.h))))
        report.check("quantum.oracle_agreement", worst, 1e-4)

    def eigenrelation():
        grid = quantum.Grid1D(-10.0, 10.0, 401)
        worst = 0.0
        for n, m in ((0, 0), (1, 0), (1, 1)):
            st = quantum.product_state(params, n, m, grid)
            field_h = quantum.apply_nonlinear_h(params, st.values, grid)
            field_g = quantum.apply_nonlinear_g(params, st.values, grid)
            worst = max(worst, abs(field_h.mean - st.spectral.h[0]), abs(field_g.mean - st.spectral.h[1]))
        report.check("quantum.field_mean_vs_spectrum", worst, 1e-3)

    def residual_convergence():
        res = []
        for npts in (201, 401, 801):
            grid = quantum.Grid1D(-10.0, 10.0, npts)
            st = quantum.product_state(params, 1, 1, grid)
            res.append(quantum.eigen_residual(params, st.values, grid, st.spectral.h[0]))
        for k, r in enumerate(halving_ratios(res)):
            report.check_range(f"quantum.eigen_residual_ratio_{k}", r, 3.5, 4.5)

    def homogeneity():
        grid = quantum.Grid1D(-10.0, 10.0, 401)
        psi = quantum.product_state(params, 1, 1, grid).values
        f1 = quantum.apply_nonlinear_h(params, psi, grid)
        f2 = quantum.apply_nonlinear_h(params, 7.3 * psi, grid)
        same_mask = bool(np.array_equal(f1.mask, f2.mask))
        dev = float(np.max(np.abs(f1.values[f1.mask] - f2.values[f1.mask]))) if same_mask else math.inf
        report.check("quantum.homogeneity", dev, 1e-10 * max(1.0, float(np.max(np.abs(f1.values[f1.mask])))))

    def commutator():
        eig, mix = [], []
        for npts in (201, 401, 801):
            grid = quantum.Grid1D(-10.0, 10.0, npts)
            s00 = quantum.product_state(params, 0, 0, grid).values
            s01 = quantum.product_state(params, 0, 1, grid).values
            eig.append(quantum.weak_commutator(params, s00, grid))
            mix.append(quantum.weak_commutator(params, s00 + 0.3 * s01, grid))
        for k, r in enumerate(halving_ratios(eig)):
            report.check_range(f"quantum.weak_commutator_ratio_{k}", r, 3.0, 5.0)
        report.add_result("quantum.weak_commutator_eigenstate", eig[-1])
        report.add_result("quantum.weak_commutator_mixture", mix[-1])
        report.check("quantum.mixture_separation", 10.0 * eig[-1] / mix[-1], 1.0, observed=mix[-1] / eig[-1])

    for name, fn in (
        ("quantum.oracle_agreement", oracle),
        ("quantum.field_mean_vs_spectrum", eigenrelation),
        ("quantum.eigen_residual_ratio", residual_convergence),
        ("quantum.homogeneity", homogeneity),
        ("quantum.weak_commutator", commutator),
    ):
        _guard(report, name, fn)


def quantum_suite(model: ModelSpec, seed: int, report: RunReport) -> None:
    """Spectral checks; the nonlinear-operator checks need the example model."""
    params = match_example(model)
    if params is not None:
        _example_quantum(params, report)
        return

    def ground():
        grid = quantum.Grid1D(-10.0, 10.0, 801)
        sp = quantum.brute_force_joint_spectrum(model, (0,) * model.n_dims, grid)
        mu = [quantum.separated_eigenvalue(model, i, sp.h, 0, grid) for i in range(model.n_dims)]
        report.add_result("quantum.ground_point", [float(v) for v in sp.h])
        report.check("quantum.ground_residual", max(abs(v) for v in mu), 1e-8)

    _guard(report, "quantum.ground_residual", ground)


def limit_suite(model: ModelSpec, seed: int, report: RunReport) -> None:
    """WKB residuals must shrink linearly in hbar."""
    hbars = [1e-2 / 2**k for k in range(8)]
    rng = SplitMix64(seed ^ 0x5DEECE66D)
    n = model.n_dims
    v = rng.points(1, 2 * n, -1.0, 1.0)[0]
    pt = PhasePoint(np.full(n, 0.3), np.asarray(v[n:]) + np.sign(v[n:]) * 0.2)

    def run():
        h = classical.continue_integrals(model, pt).h
        worst = 0.0
        for i in range(n):
            res = quantum.classical_limit_check(model, i, h, float(pt.q[i]), hbars)
            ratios = halving_ratios(res)
            worst = max(worst, max(abs(r - 2.0) for r in ratios))
            report.add_result(f"limit.residual_{i}_at_min_hbar", res[-1])
        report.check("limit.halving_ratio", worst, 0.2)

    _guard(report, "limit.halving_ratio", run)


def run_verify(model: ModelSpec, suite: str, seed: int) -> RunReport:
    suites = SUITES if suite == "all" else (suite,)
    report = RunReport("verify", {"suite": suite, "seed": seed, "model": model.to_dict()})
    for s in suites:
        {"classical": classical_suite, "quantum": quantum_suite, "limit": limit_suite}[s](model, seed, report)
    return report
