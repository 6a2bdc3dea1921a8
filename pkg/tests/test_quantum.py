import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imsv import classical as C
from imsv import quantum as Q
from imsv.errors import (
    ArgumentError,
    ContinuumRegionError,
    DegenerateStateError,
    ForbiddenRegionError,
    GridError,
    TruncationError,
)
from imsv.model import ExampleParams, PhasePoint, build_example_model

P = ExampleParams(1.3, 0.7, 0.5)
params_st = st.builds(
    ExampleParams,
    st.floats(0.5, 5.0),
    st.floats(0.0, 3.0),
    st.floats(0.05, 2.0),
)


def test_omega():
    p = ExampleParams(2, 1, 1)
    assert Q.omega(p, 0.0) == 1.0
    assert Q.omega(p, 1.5) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ContinuumRegionError):
        Q.omega(p, 2.0)


def test_oscillator_limit_ground():
    sp = Q.joint_spectrum_example(ExampleParams(1e6, 0, 1), 0, 0)
    assert sp.h[0] == pytest.approx(1.0, rel=1e-9)
    assert sp.h[1] == 0.0


def test_eps_zero_closed_form():
    sp = Q.joint_spectrum_example(ExampleParams(2, 0, 1), 0, 0)
    assert sp.h[0] == pytest.approx(0.25 * (-1 + math.sqrt(17)), rel=1e-14)


@settings(max_examples=40)
@given(params_st, st.integers(0, 6), st.integers(0, 6))
def test_spectrum_structure(p, n, m):
    sp = Q.joint_spectrum_example(p, n, m)
    sw = Q.joint_spectrum_example(p, m, n)
    assert sp.h[0] == sw.h[0]
    assert sp.h[1] == -sw.h[1]
    assert 0 < sp.h[0] < p.h_max
    assert sp.h[0] == pytest.approx(Q.spectral_root_quartic(p, n + m + 1), rel=1e-9)


@settings(max_examples=20)
@given(params_st, st.integers(0, 30))
def test_spectrum_monotone_in_total(p, total):
    h1 = Q.joint_spectrum_example(p, total, 0).h[0]
    h2 = Q.joint_spectrum_example(p, total + 1, 0).h[0]
    assert h2 > h1


def test_negative_quantum_number():
    with pytest.raises(ArgumentError):
        Q.joint_spectrum_example(P, -1, 0)


def test_grid_validation():
    with pytest.raises(GridError):
        Q.Grid1D(-1, 1, 2)
    with pytest.raises(GridError):
        Q.Grid1D(1, -1, 10)
    g = Q.Grid1D(-2, 2, 5)
    assert g.refined().spacing == pytest.approx(0.5 * g.spacing)


def test_eigenfunction_ground_nodeless():
    sp = Q.joint_spectrum_example(P, 0, 0)
    wf = Q.eigenfunction_1d(P, sp, 1, Q.Grid1D())
    assert wf.node_count == 0
    assert np.all(wf.values > 0)
    assert wf.norm == pytest.approx(1.0, abs=1e-12)


def test_eigenfunction_hermite_zeros():
    p = ExampleParams(1e6, 0, 1)
    g = Q.Grid1D(-8, 8, 1601)
    wf = Q.eigenfunction_1d(p, Q.joint_spectrum_example(p, 2, 0), 1, g)
    assert wf.node_count == 2
    x, v = g.points, wf.values
    idx = np.flatnonzero(np.sign(v[1:]) != np.sign(v[:-1]))
    zeros = x[idx] - v[idx] * g.spacing / (v[idx + 1] - v[idx])
    assert np.allclose(zeros, [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=g.spacing**2)


def test_eigenfunction_truncation():
    sp = Q.joint_spectrum_example(P, 0, 0)
    with pytest.raises(TruncationError):
        Q.eigenfunction_1d(P, sp, 1, Q.Grid1D(-1, 1, 101))
    with pytest.raises(ArgumentError):
        Q.eigenfunction_1d(P, sp, 3, Q.Grid1D())


def test_eigenfunction_discrete_residual_second_order():
    model = build_example_model(P)
    sp = Q.joint_spectrum_example(P, 1, 2)
    res = []
    for npts in (201, 401, 801):
        g = Q.Grid1D(-10, 10, npts)
        op = Q.separated_operator(model, 0, sp.h, g)
        v = Q.eigenfunction_1d(P, sp, 1, g).values[1:-1]
        res.append(np.linalg.norm(op.matvec(v)) / np.linalg.norm(v))
    assert 3.5 < res[0] / res[1] < 4.5
    assert 3.5 < res[1] / res[2] < 4.5


def test_product_state_outer_product():
    g = Q.Grid1D(-10, 10, 81)
    st_ = Q.product_state(P, 1, 2, g)
    assert np.array_equal(st_.values, np.outer(st_.factors[0].values, st_.factors[1].values))
    assert np.all(Q.product_state(P, 0, 0, g).values > 0)


def test_brute_force_oscillator():
    m = build_example_model(ExampleParams(1e6, 0, 1))
    sp = Q.brute_force_joint_spectrum(m, (0, 0), Q.Grid1D(-10, 10, 801))
    assert sp.h[0] == pytest.approx(1.0, abs=1e-4)
    assert sp.h[1] == pytest.approx(0.0, abs=1e-4)


def test_brute_force_swap_symmetry():
    m = build_example_model(P)
    g = Q.Grid1D(-10, 10, 401)
    a = Q.brute_force_joint_spectrum(m, (1, 0), g)
    b = Q.brute_force_joint_spectrum(m, (0, 1), g)
    assert a.h[0] == pytest.approx(b.h[0], abs=1e-9)
    assert a.h[1] == pytest.approx(-b.h[1], abs=1e-9)


def test_brute_force_qnum_length():
    with pytest.raises(ArgumentError):
        Q.brute_force_joint_spectrum(build_example_model(P), (0,), Q.Grid1D())


def test_fields_on_eigenstate():
    g = Q.Grid1D(-10, 10, 401)
    st_ = Q.product_state(P, 1, 2, g)
    fh = Q.apply_nonlinear_h(P, st_.values, g)
    fg = Q.apply_nonlinear_g(P, st_.values, g)
    assert abs(fh.mean - st_.spectral.h[0]) < 1e-3
    assert abs(fg.mean - st_.spectral.h[1]) < 1e-3
    # the largest errors sit next to nodal lines
    assert fh.deviation_from(st_.spectral.h[0]) < 0.05
    assert np.all(np.isnan(fh.values[~fh.mask]))


def test_g_field_zero_for_equal_quantum_numbers():
    g = Q.Grid1D(-10, 10, 401)
    fg = Q.apply_nonlinear_g(P, Q.product_state(P, 1, 1, g).values, g)
    assert abs(fg.mean) < 1e-12


def test_g_field_antisymmetric_under_swap():
    g = Q.Grid1D(-10, 10, 201)
    psi = Q.product_state(P, 0, 2, g).values + 0.2 * Q.product_state(P, 1, 0, g).values
    a = Q.apply_nonlinear_g(P, psi, g)
    b = Q.apply_nonlinear_g(P, psi.T, g)
    assert np.array_equal(a.mask, b.mask.T)
    assert np.allclose(a.values[a.mask], -b.values.T[a.mask], atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-3, 1e3), st.sampled_from([-1.0, 1.0]))
def test_homogeneity(c, sign):
    g = Q.Grid1D(-10, 10, 201)
    psi = Q.product_state(P, 1, 0, g).values
    a = Q.apply_nonlinear_h(P, psi, g)
    b = Q.apply_nonlinear_h(P, sign * c * psi, g)
    assert np.array_equal(a.mask, b.mask)
    assert np.allclose(a.values[a.mask], b.values[a.mask], rtol=1e-12, atol=1e-12)


def test_mixture_field_not_constant():
    devs = []
    for npts in (201, 401, 801):
        g = Q.Grid1D(-10, 10, npts)
        psi = Q.product_state(P, 0, 0, g).values + 0.3 * Q.product_state(P, 2, 0, g).values
        devs.append(Q.apply_nonlinear_h(P, psi, g).max_abs_deviation)
    assert devs[-1] > 0.1
    assert devs[-1] > 0.5 * devs[0]


def test_degenerate_state():
    g = Q.Grid1D(-1, 1, 5)
    with pytest.raises(DegenerateStateError):
        Q.apply_nonlinear_h(P, np.zeros((5, 5)), g)


def test_commutator_homogeneous():
    g = Q.Grid1D(-10, 10, 201)
    psi = Q.product_state(P, 0, 0, g).values
    assert Q.weak_commutator(P, 4.2 * psi, g) == pytest.approx(Q.weak_commutator(P, psi, g), rel=1e-10)


def test_linear_quantization_small_eps_limit():
    g = Q.Grid1D(-5, 5, 22)
    p = ExampleParams(1.5, 1e-7, 0.5)
    lin = Q.linear_quantization_spectrum(p, 3, g)
    ref = Q.weighted_linear_spectrum(p, 3, g)
    assert np.allclose(lin, ref, rtol=1e-5)


def test_linear_quantization_needs_eps():
    with pytest.raises(ArgumentError):
        Q.linear_quantization_matrix(ExampleParams(1.5, 0.0, 0.5), Q.Grid1D(-5, 5, 10))


def test_classical_limit_bound():
    p = ExampleParams(1, 1, 1)
    m = build_example_model(p)
    h = C.example_integrals(p, PhasePoint([0.3, 0.3], [0.8, -0.6]))
    res = Q.classical_limit_check(m, 0, h, 0.3, [1e-3, 5e-4])
    assert res[0] < 1e-3
    assert res[0] / res[1] == pytest.approx(2.0, rel=1e-6)


def test_classical_limit_forbidden():
    m = build_example_model(ExampleParams(1, 1, 1))
    with pytest.raises(ForbiddenRegionError):
        Q.classical_limit_check(m, 0, [0.1, 0.5], 0.3, [1e-3])
