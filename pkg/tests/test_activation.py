import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hidden_gda.activation import (
    DomainError,
    ScalarField,
    evaluate,
    grad,
    grad_check,
    hess,
    parse_field,
    sigmoid,
)

SIG = ScalarField.make_sigmoid()
AFF = ScalarField.make_affine_sigmoid(0.8, 0.2)
BUMP = ScalarField.make_bump(0.2, 0.5)
FAMILIES = [SIG, AFF, BUMP, ScalarField.make_affine_sigmoid(0.9, -0.6), ScalarField.make_bump(0.6, 1.0)]


@pytest.mark.parametrize("field, theta, expected", [
    (SIG, 0.0, 0.5),
    (AFF, 0.0, 0.9),
    (BUMP, 0.0, 0.2),
])
def test_eval_examples(field, theta, expected):
    assert float(evaluate(field, [theta])) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("field, theta, expected", [
    (SIG, 0.0, 0.25),
    (BUMP, 0.0, 0.0),
    (AFF, 0.0, 0.05),
])
def test_grad_examples(field, theta, expected):
    assert float(grad(field, [theta])[0]) == pytest.approx(expected, abs=1e-15)


def test_affine_grad_against_finite_difference():
    h = 1e-5
    fd = (float(AFF.value([h])) - float(AFF.value([-h]))) / (2 * h)
    assert fd == pytest.approx(0.05, abs=1e-10)


@pytest.mark.parametrize("field, theta, expected", [
    (BUMP, 0.0, 1.0),
    (SIG, 0.0, 0.0),
    (SIG, math.log(3.0), -0.09375),
])
def test_hess_examples(field, theta, expected):
    H = hess(field, [theta])
    assert H.shape == (1, 1)
    assert float(H[0, 0]) == pytest.approx(expected, abs=1e-15)


def test_bump_hessian_against_finite_difference():
    h = 1e-4
    fd = (float(BUMP.value([h])) - 2 * float(BUMP.value([0.0])) + float(BUMP.value([-h]))) / h**2
    assert fd == pytest.approx(1.0, abs=1e-6)


def test_grad_check_examples():
    assert grad_check(SIG, [0.3], 1e-5) < 1e-8
    assert grad_check(BUMP, [1.7], 1e-5) < 1e-7


def test_grad_check_second_order_convergence():
    theta = [0.7]
    small = grad_check(BUMP, theta, 1e-3)
    large = grad_check(BUMP, theta, 1e-2)
    assert 60 < large / small < 140


@pytest.mark.parametrize("field", FAMILIES, ids=str)
def test_grad_check_random_points(field):
    rng = np.random.default_rng(11)
    for theta in rng.uniform(-5, 5, 100):
        assert grad_check(field, [theta]) < 1e-6


@pytest.mark.parametrize("field", FAMILIES, ids=str)
def test_values_stay_in_declared_range(field):
    lo, hi = field.value_range
    vals = field.value(np.linspace(-10, 10, 4001)[:, None])
    assert np.all(vals >= lo) and np.all(vals <= hi)
    assert 0.0 <= lo and hi <= 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-40, 40))
def test_sigmoid_identity(x):
    f = float(SIG.value([x]))
    assert abs(float(SIG.grad([x])[0]) - f * (1 - f)) <= 1e-14


def test_sigmoid_is_stable_for_huge_arguments():
    with np.errstate(all="raise"):
        vals = sigmoid(np.array([-1000.0, -710.0, 710.0, 1000.0]))
    np.testing.assert_array_equal(vals, [0.0, 0.0, 1.0, 1.0])


@pytest.mark.parametrize("bad", [[np.nan], [np.inf], [-np.inf]])
def test_non_finite_input_is_a_domain_error(bad):
    with pytest.raises(DomainError):
        SIG.value(bad)


def test_wrong_dimension_is_a_domain_error():
    with pytest.raises(DomainError):
        SIG.value([0.0, 1.0])


@pytest.mark.parametrize("kwargs", [
    dict(family="affine_sigmoid", params={"a": 0.5, "b": 0.0}),
    dict(family="affine_sigmoid", params={"a": 0.9, "b": 0.2}),
    dict(family="bump", params={"A": 0.0, "B": 0.5}),
    dict(family="bump", params={"A": 0.2, "B": -1.0}),
    dict(family="bump", params={"A": 0.9, "B": 0.5}),
    dict(family="tanh", params={}),
    dict(family="sigmoid", params={}, dim=2),
])
def test_invalid_fields_are_rejected(kwargs):
    with pytest.raises(ValueError):
        ScalarField(**kwargs)


def test_parse_field_roundtrip():
    assert parse_field("affine_sigmoid a=0.8 b=0.2") == AFF
    assert parse_field("bump A=0.2 B=0.5") == BUMP
    assert parse_field("sigmoid") == SIG
    assert parse_field(str(AFF)) == AFF


@pytest.mark.parametrize("text", ["", "bump A=0.2 B", "bump A=x B=0.5", "affine_sigmoid a=0.8"])
def test_parse_field_errors(text):
    with pytest.raises(ValueError):
        parse_field(text)


def test_batched_evaluation_matches_loop():
    thetas = np.linspace(-3, 3, 13)[:, None]
    batched = BUMP.value(thetas)
    looped = np.array([float(BUMP.value(t)) for t in thetas])
    np.testing.assert_array_equal(batched, looped)
