import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imsv import classical as C
from imsv.errors import ArgumentError, BranchSingularityError, ForbiddenRegionError
from imsv.model import ExampleParams, ModelSpec, PhasePoint, build_example_model

P = ExampleParams(1.3, 0.7, 0.5)
coord = st.floats(-2, 2, allow_nan=False)
phase = st.tuples(coord, coord, coord, coord).map(lambda v: PhasePoint(v[:2], v[2:]))


def flipped_model(params=P):
    d = build_example_model(params).to_dict()
    for t in d["fs"][1]:
        if t["zpow"] == [0, 1]:
            t["coeff"] = abs(t["coeff"])
    return ModelSpec.from_dict(d)


def test_origin_is_root():
    m = build_example_model(ExampleParams(1, 1, 1))
    h = C.solve_integrals(m, PhasePoint([0, 0], [0, 0]), [0, 0]).h
    assert np.allclose(h, 0, atol=1e-14)


def test_solver_hand_value():
    m = build_example_model(ExampleParams(1, 1, 1))
    h = C.solve_integrals(m, PhasePoint([0, 0], [1, 0]), [0, 0]).h
    assert h[0] == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert h[1] == pytest.approx(-0.5, abs=1e-12)


def test_hamiltonian_values():
    assert C.example_hamiltonian(P, PhasePoint([0, 0], [0, 0])) == 0.0
    big = ExampleParams(1e6, 1, 1)
    assert C.example_hamiltonian(big, PhasePoint([1, 2], [3, 4])) == pytest.approx(15, rel=1e-6)
    assert C.example_hamiltonian(ExampleParams(1, 1, 1), PhasePoint([0, 0], [1, 0])) == pytest.approx(
        math.sqrt(2) - 1, rel=1e-15
    )


@given(phase)
def test_eps_zero_form_and_continuity(pt):
    a = 1.7
    q2, k = pt.q @ pt.q, pt.q @ pt.q + pt.p @ pt.p
    h0 = C.example_hamiltonian(ExampleParams(a, 0.0, 1), pt)
    assert h0 == pytest.approx(a * a * k / (2 * (a * a + q2)), rel=1e-14, abs=1e-300)
    h_small = C.example_hamiltonian(ExampleParams(a, 1e-9, 1), pt)
    assert h_small == pytest.approx(h0, rel=1e-8, abs=1e-300)


def test_second_integral_values():
    assert C.example_second_integral(P, PhasePoint([0.4, 0.4], [-1, -1])) == 0.0
    osc = ExampleParams(1e6, 0, 1)
    assert C.example_second_integral(osc, PhasePoint([1, 0], [0, 0])) == pytest.approx(-0.5, rel=1e-9)
    # regression: here G = H = 1/(1+sqrt(3/2)) = sqrt(6) - 2
    g = C.example_second_integral(ExampleParams(1, 1, 1), PhasePoint([1, 0], [0, 1]))
    assert g == pytest.approx(0.4494897427831781, rel=1e-15)
    assert g == pytest.approx(math.sqrt(6) - 2, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(phase)
def test_closed_forms_solve_separated_equations(pt):
    m = build_example_model(P)
    res = C.separated_residuals(m, pt, C.example_integrals(P, pt))
    assert np.max(np.abs(res)) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(phase)
def test_continuation_matches_closed_form(pt):
    m = build_example_model(P)
    assert np.allclose(C.continue_integrals(m, pt).h, C.example_integrals(P, pt), atol=1e-9)


def test_continuation_flipped_sign_is_singular():
    with pytest.raises(BranchSingularityError):
        C.continue_integrals(flipped_model(), PhasePoint([0.3, 0.2], [0.1, 0.4]))


@given(phase)
def test_canonical_brackets(pt):
    q1 = lambda z: float(z.q[0])
    p1 = lambda z: float(z.p[0])
    p2 = lambda z: float(z.p[1])
    assert C.poisson_bracket(q1, p1, pt) == pytest.approx(1.0, abs=1e-10)
    assert C.poisson_bracket(q1, p2, pt) == pytest.approx(0.0, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(phase)
def test_example_integrals_commute(pt):
    h = lambda z: C.example_hamiltonian(P, z)
    g = lambda z: C.example_second_integral(P, z)
    scale = 1 + np.linalg.norm(C.phase_gradient(h, pt)) * np.linalg.norm(C.phase_gradient(g, pt))
    assert abs(C.poisson_bracket(h, g, pt)) <= 1e-6 * scale


def test_bracket_with_itself_nonzero_control():
    # {H, q1} = -dH/dp1 is generically nonzero
    pt = PhasePoint([0.3, -0.2], [0.8, 0.1])
    h = lambda z: C.example_hamiltonian(P, z)
    assert abs(C.poisson_bracket(h, lambda z: float(z.q[0]), pt)) > 0.1


def test_bad_step():
    with pytest.raises(ArgumentError):
        C.poisson_bracket(lambda z: 0.0, lambda z: 0.0, PhasePoint([0, 0], [0, 0]), step=0)


def test_potential():
    assert C.potential(P, [0, 0]) == 0.0
    p = ExampleParams(2, 1, 1)
    v = [C.potential(p, [r, 0]) for r in (1, 3, 10, 100, 1e4)]
    assert all(b > a for a, b in zip(v, v[1:]))
    assert v[-1] < 2 and v[-1] == pytest.approx(2, rel=1e-3)
    assert C.potential(ExampleParams(1e6, 0.5, 1), [0.7, 1.1]) == pytest.approx(0.5 * (0.49 + 1.21), rel=1e-6)


def test_potential_generic_path_matches():
    m = build_example_model(P)
    assert C.potential(m, [0.5, -0.7]) == pytest.approx(C.potential(P, [0.5, -0.7]), abs=1e-10)


def test_classify_motion():
    p = ExampleParams(2, 1, 1)
    assert C.classify_motion(p, 1.0) is C.Motion.FINITE
    assert C.classify_motion(p, 2.0) is C.Motion.INFINITE
    assert C.classify_motion(ExampleParams(1e6, 0, 1), 1e3) is C.Motion.FINITE


@pytest.mark.parametrize("h,g", [(1.0, 0.0), (2.0, 0.5), (3.0, -1.0)])
def test_oscillator_cycle_action(h, g):
    m = build_example_model(ExampleParams(1e6, 0, 1))
    res = C.cycle_action(m, 0, [h, g])
    e1 = h - g
    assert res.value == pytest.approx(math.pi * e1, rel=1e-9)
    assert res.turning_points[0] == pytest.approx(-math.sqrt(e1), rel=1e-9)


def test_action_zero_radicand():
    m = build_example_model(ExampleParams(1, 0, 1))
    # h = a^2/2 kills the x^2 term; h - g = 0 kills the rest
    res = C.action_integral(m, 0, [0.5, 0.5], (-1, 1))
    assert res.value == 0.0


def test_action_forbidden():
    m = build_example_model(ExampleParams(1, 0, 1))
    with pytest.raises(ForbiddenRegionError):
        C.action_integral(m, 0, [0.3, 0.0], (-2, 2))


def test_turning_points_unbounded():
    m = build_example_model(ExampleParams(1, 0, 1))
    with pytest.raises(ArgumentError):
        C.turning_points(m, 0, [0.8, 0.0])


def test_jacobian_rank_generic():
    m = build_example_model(P)
    pt = PhasePoint([0.3, 0.5], [0.2, -0.4])
    assert C.jacobian_rank(m, pt, C.example_integrals(P, pt)) == 2
