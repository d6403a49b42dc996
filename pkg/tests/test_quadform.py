import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_pd
from wignerlim.errors import NoConvergence, NotPositiveDefinite
from wignerlim.quadform import (
    QuadForm,
    SurfaceRule,
    b_matrix,
    form_power_integrand,
    identity_form,
    inverse_form,
    make_form,
    q_value,
    qineqc_check,
    surface_integral,
    surface_symmetry,
    v_q,
    v_q_prime_boundary,
)


def a_p(d, p):
    return make_form(np.eye(d) - p * np.ones((d, d)))


def sphere_volume_factor(d):
    return math.pi ** (d / 2) / math.gamma(d / 2)


# ---------------------------------------------------------------- construction


def test_identity_and_diagonal_invariants():
    Q = identity_form(3)
    assert Q.det == 1 and Q.trace == 3
    D = make_form(np.diag([2.0, 3.0]))
    assert D.det == pytest.approx(6, rel=1e-15)
    assert D.trace == 5


def test_a_p_beyond_threshold_is_rejected():
    with pytest.raises(NotPositiveDefinite):
        a_p(3, 0.5)
    a_p(3, 0.3)  # 0.3 < 1/3


def test_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        make_form([[1.0, 0.0]])
    with pytest.raises(ValueError):
        make_form([[math.nan]])


def test_constructor_symmetrizes():
    Q = make_form([[2.0, 1.0], [0.0, 2.0]])
    assert np.array_equal(Q.matrix, Q.matrix.T)
    assert Q.matrix[0, 1] == 0.5


def test_form_is_immutable():
    Q = identity_form(2)
    with pytest.raises(AttributeError):
        Q.det = 2.0
    with pytest.raises(ValueError):
        Q.matrix[0, 0] = 5.0


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_factorization_invariants(d, seed):
    Q = random_pd(d, np.random.default_rng(seed))
    A = Q.matrix
    assert np.max(np.abs(Q.chol @ Q.chol.T - A)) <= 1e-12 * np.max(np.abs(A))
    assert Q.det == pytest.approx(np.prod(np.diag(Q.chol)) ** 2, rel=1e-15)
    assert np.allclose(Q.inv_matrix @ A, np.eye(d), atol=1e-10)
    assert Q.det == pytest.approx(np.linalg.det(A), rel=1e-10)


def test_json_round_trip():
    Q = make_form([[2.0, 0.3], [0.3, 1.0]])
    back = QuadForm.from_json(json.dumps(Q.to_json()))
    assert np.array_equal(back.matrix, Q.matrix)
    with pytest.raises(ValueError):
        QuadForm.from_json({"dim": 3, "matrix": Q.matrix.tolist()})


# ---------------------------------------------------------------- evaluation


def test_q_value_examples():
    assert q_value(identity_form(3), [1, 1, 1]) == 3
    assert q_value(make_form(np.diag([2.0, 3.0])), [1, -1]) == 5
    assert q_value(a_p(2, 0.25), [1, 1]) == pytest.approx(1, abs=1e-15)


def test_q_value_rows_and_shape_check():
    Q = make_form(np.diag([1.0, 4.0]))
    assert np.allclose(q_value(Q, [[1, 0], [0, 1], [1, 1]]), [1, 4, 5])
    with pytest.raises(ValueError):
        q_value(Q, [1, 2, 3])


@given(st.integers(0, 2**32 - 1))
def test_q_value_positive_off_origin(seed):
    rng = np.random.default_rng(seed)
    Q = random_pd(3, rng)
    x = rng.normal(size=(50, 3))
    assert np.all(q_value(Q, x) > 0)
    assert q_value(Q, np.zeros(3)) == 0


def test_inverse_form_examples(rng):
    assert np.array_equal(inverse_form(identity_form(3)).matrix, np.eye(3))
    assert np.allclose(inverse_form(make_form(np.diag([2.0, 3.0]))).matrix, np.diag([0.5, 1 / 3]), atol=1e-15)
    Q = random_pd(3, rng)
    assert Q.det * inverse_form(Q).det == pytest.approx(1, abs=1e-10)
    assert np.allclose(inverse_form(Q).matrix, np.linalg.inv(Q.matrix), atol=1e-12)


# ---------------------------------------------------------------- B(s)


@pytest.mark.parametrize("d", [1, 2, 5])
@pytest.mark.parametrize("s", [0.0, 1.3, 0.5 + 2j])
def test_b_matrix_identity(d, s):
    assert np.allclose(b_matrix(identity_form(d), s), (d - 2 * (s + 1)) * np.eye(d))


@pytest.mark.parametrize("d", [2, 3, 6])
def test_b_matrix_trace_vanishes_at_boundary(d):
    B = b_matrix(identity_form(d), d / 2 - 1)
    assert abs(np.trace(B @ np.eye(d))) < 1e-14


def test_b_matrix_diagonal_example():
    A = np.diag([2.0, 3.0])
    B = b_matrix(make_form(A), 0)
    assert np.allclose(B, np.diag([2.0, -3.0]))
    # independent route: plain numpy algebra
    assert np.allclose(B, np.trace(A) * A - 2 * A @ A)


@given(st.integers(0, 2**32 - 1), st.floats(-2, 3), st.floats(-3, 3))
def test_b_matrix_symmetric(seed, re, im):
    Q = random_pd(3, np.random.default_rng(seed))
    B = b_matrix(Q, complex(re, im))
    assert np.allclose(B, B.T, atol=1e-13)


# ---------------------------------------------------------------- surface cubature


def test_constant_over_square_perimeter():
    r = surface_integral(2, lambda X: np.ones(len(X)))
    assert r.value == pytest.approx(8, rel=1e-14)


def test_constant_over_cube_surface():
    r = surface_integral(3, lambda X: np.ones(len(X)))
    assert r.value == pytest.approx(24, rel=1e-14)


def test_cubic_form_power_gives_sphere_area():
    r = surface_integral(3, form_power_integrand(identity_form(3), 1.5), symmetric=True)
    assert r.value.real == pytest.approx(4 * math.pi, rel=1e-10)


def test_lemma_a_squared_binary(rng):
    Q = random_pd(2, rng)
    A = Q.matrix
    got = surface_integral(2, form_power_integrand(Q, 2.0, A @ A), symmetric=True).value.real
    assert got == pytest.approx(np.trace(A) * math.pi / math.sqrt(Q.det), rel=1e-9)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_lemma_inverse_half_power(d, seed):
    Q = random_pd(d, np.random.default_rng(seed))
    got = surface_integral(d, form_power_integrand(Q, d / 2), symmetric=True).value.real
    exact = 2 / math.sqrt(Q.det) * sphere_volume_factor(d)
    assert abs(got - exact) <= 1e-7 * exact


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_lemma_trace_ratio(d, seed):
    rng = np.random.default_rng(seed)
    Q = random_pd(d, rng)
    B = rng.normal(size=(d, d))
    B = B + B.T
    got = surface_integral(d, form_power_integrand(Q, 1 + d / 2, B), symmetric=True).value.real
    exact = np.trace(B @ np.linalg.inv(Q.matrix)) / math.sqrt(Q.det) * math.pi ** (d / 2) / math.gamma(1 + d / 2)
    assert abs(got - exact) <= 1e-7 * max(1.0, abs(exact))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_single_face_arctan_integral(d):
    # one face x_1 = 1 of the cubic form, by symmetry 1/(2d) of the whole
    face = surface_integral(d, form_power_integrand(identity_form(d), d / 2), symmetric=True).value.real / (2 * d)
    assert face == pytest.approx(sphere_volume_factor(d) / d, rel=1e-7)


def test_symmetry_flags_match_full_evaluation(rng):
    Q = make_form(np.diag([1.0, 2.5, 0.7]))
    f = form_power_integrand(Q, 0.8)
    full = surface_integral(3, f).value
    reduced = surface_integral(3, f, **surface_symmetry(Q)).value
    assert abs(full - reduced) <= 1e-12 * abs(full)
    assert surface_symmetry(Q) == {"reflect": True, "permute": False}
    assert surface_symmetry(identity_form(3).scaled(2.0)) == {"reflect": True, "permute": True}
    assert surface_symmetry(random_pd(3, rng)) == {"reflect": False, "permute": False}


def test_refinement_budget_exhaustion_carries_estimate():
    rule = SurfaceRule(order=2, max_refinements=1, tol=1e-15)
    with pytest.raises(NoConvergence) as exc:
        surface_integral(2, lambda X: np.abs(X[:, 0] - 0.3) ** 0.5, rule)
    assert exc.value.result is not None
    assert exc.value.result.abs_err_estimate > 0


def test_surface_rule_validation():
    with pytest.raises(ValueError):
        SurfaceRule(order=1)
    with pytest.raises(ValueError):
        SurfaceRule(tol=0.0)


def test_reduction_is_bit_stable(rng):
    Q = random_pd(3, rng)
    f = form_power_integrand(Q, 1.1 + 0.4j)
    a = surface_integral(3, f, symmetric=True).value
    b = surface_integral(3, f, symmetric=True).value
    assert a == b


# ---------------------------------------------------------------- V_Q


@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_v_vanishes_at_boundary(d, seed):
    Q = random_pd(d, np.random.default_rng(seed))
    r = v_q(Q, d / 2 - 1)
    assert abs(r.value) <= max(10 * r.abs_err_estimate, 1e-12)


def test_v_cubic_factorization():
    Q = identity_form(3)
    for s in (0.2, 0.9, 1.7):
        S = surface_integral(3, form_power_integrand(Q, s + 1), symmetric=True).value
        assert v_q(Q, s).value == pytest.approx((3 - 2 * (s + 1)) * S, rel=1e-12)
    assert abs(v_q(Q, 0.5).value) < 1e-12


def test_v_binary_at_zero():
    assert abs(v_q(make_form(np.diag([1.0, 2.0])), 0).value) < 1e-12


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_v_scaling(rng, lam):
    Q = random_pd(3, rng)
    s = 0.8 + 0.3j
    assert abs(v_q(Q.scaled(lam), s).value - lam ** (-s) * v_q(Q, s).value) <= 1e-9 * abs(v_q(Q, s).value)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_v_prime_cubic(d):
    got = v_q_prime_boundary(identity_form(d)).value.real
    assert got == pytest.approx(-4 * sphere_volume_factor(d), rel=1e-10)


@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_v_prime_binary_arctan(a, b):
    exact = -8 * (math.sqrt(b / a) * math.atan(math.sqrt(a / b)) + math.sqrt(a / b) * math.atan(math.sqrt(b / a)))
    got = v_q_prime_boundary(make_form(np.diag([a, b]))).value.real
    assert abs(got - exact) < 1e-6


def test_v_prime_scaling():
    got = v_q_prime_boundary(identity_form(4).scaled(2.0)).value.real
    assert got == pytest.approx(-2 * math.pi**2, rel=1e-10)


def test_v_prime_negative_on_random_battery(rng):
    # observation only; no theorem is being checked
    vals = [v_q_prime_boundary(random_pd(2 + k % 2, rng)).value.real for k in range(6)]
    assert all(v < 0 for v in vals)


# ---------------------------------------------------------------- sign probe


def test_qineqc_identity_is_zero():
    r = qineqc_check(identity_form(3))
    assert r.holds_leq and r.holds_geq and not r.indefinite


def test_qineqc_a_p_changes_sign():
    # direct algebra: g = d p |x|^2 - d p (1 - (d-1) p) (sum x)^2
    d, p = 3, 0.2
    r = qineqc_check(a_p(d, p))
    assert r.indefinite
    assert r.g_min == pytest.approx(d * p * 3 - d * p * (1 - (d - 1) * p) * 9, abs=1e-12)
    # the maximum of the sampled values is attained at a sign-alternating corner
    corners = [np.array(c, float) for c in itertools.product([-1, 1], repeat=d)]
    g = [d * p * c @ c - d * p * (1 - (d - 1) * p) * c.sum() ** 2 for c in corners]
    assert r.g_max == pytest.approx(max(g), abs=1e-12)


def test_qineqc_scaled_cubic_is_indefinite():
    r = qineqc_check(make_form(np.eye(2) + 0.5 * np.diag([1.0, -1.0])))
    assert r.indefinite


def test_qineqc_grid_validation():
    with pytest.raises(ValueError):
        qineqc_check(identity_form(2), grid_per_face=1)
