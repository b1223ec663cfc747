import math
import random

import numpy as np
import pytest

from eggdb.expr import parse_expression
from eggdb.fitdata import (
    Dataset,
    EvaluationError,
    FitFailure,
    alphabet_size,
    description_length,
    eval_with_grad,
    evaluate,
    fit_params,
    fitness_of,
    gaussian_nll,
    load_dataset,
    metrics,
)
from oracles import eval_scalar, random_expr


def _expr(text):
    return parse_expression(text)[0]


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(4))
    ds = Dataset(np.zeros((3, 2)), np.zeros(3))
    assert ds.columns == ["x0", "x1"]
    assert ds.n_rows == 3 and ds.n_vars == 2


def test_load_dataset_last_column_target(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,y\n1,2,3\n4,5,6\n")
    ds = load_dataset(str(p))
    assert ds.columns == ["a", "b"]
    assert list(ds.y) == [3.0, 6.0]


def test_load_dataset_named_target_and_test(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,y\n1,2,3\n")
    q = tmp_path / "t.csv"
    q.write_text("a,b,y\n7,8,9\n")
    ds = load_dataset(str(p), target="b", test_path=str(q))
    assert ds.columns == ["a", "y"]
    assert list(ds.y) == [2.0]
    assert ds.test is not None and list(ds.test.y) == [8.0]


def test_evaluate_matches_scalar_reference():
    rng = random.Random(23)
    for _ in range(40):
        tree = random_expr(rng, 10)
        X = np.array([[rng.uniform(-2, 2) for _ in range(3)] for _ in range(6)])
        theta = [rng.uniform(-2, 2) for _ in range(2)]
        out = evaluate(tree, theta, X)
        for i in range(6):
            ref = eval_scalar(tree, theta, list(X[i]))
            if math.isfinite(ref):
                assert out[i] == pytest.approx(ref, rel=1e-12, abs=1e-12)
            else:
                assert not math.isfinite(out[i])


def test_protected_semantics():
    X = np.array([[-4.0], [0.0]])
    assert list(evaluate(_expr("sqrt(x0)"), [], X)) == [2.0, 0.0]
    assert evaluate(_expr("log(x0)"), [], X)[0] == pytest.approx(math.log(4.0))
    prot = evaluate(_expr("x0 |**| t0"), [2.0], X)
    assert prot[0] == 16.0 and prot[1] == 0.0
    neg = evaluate(_expr("x0 |**| t0"), [-1.0], X)
    assert math.isnan(neg[1])


def test_evaluate_missing_inputs_raise():
    X = np.zeros((2, 1))
    with pytest.raises(EvaluationError):
        evaluate(_expr("x3"), [], X)
    with pytest.raises(EvaluationError):
        evaluate(_expr("t1 * x0"), [1.0], X)


def test_gradient_matches_finite_differences():
    rng = random.Random(5)
    checked = 0
    while checked < 30:
        tree = random_expr(rng, 9)
        theta = np.array([rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)])
        X = np.array([[rng.uniform(0.5, 2.0) for _ in range(3)] for _ in range(4)])
        v, jac = eval_with_grad(tree, theta, X)
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(jac)):
            continue
        h = 1e-6
        ok = True
        for j in range(2):
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            fd = (evaluate(tree, tp, X) - evaluate(tree, tm, X)) / (2 * h)
            if not np.all(np.isfinite(fd)):
                ok = False
                break
            assert np.allclose(jac[:, j], fd, rtol=1e-4, atol=1e-5)
        if ok:
            checked += 1


def test_metrics_perfect_fit(linear_dataset):
    m = metrics(_expr("t0*x0 + t1"), [2.0, 5.0], linear_dataset.X, linear_dataset.y)
    assert m.mse == pytest.approx(0.0, abs=1e-20)
    assert m.r2 == pytest.approx(1.0)


def test_r2_none_for_constant_target():
    ds = Dataset(np.zeros((5, 1)), np.full(5, 3.0))
    m = metrics(_expr("t0"), [1.0], ds.X, ds.y)
    assert m.r2 is None


def test_gaussian_nll_matches_closed_form():
    r = np.array([1.0, -1.0, 2.0, 0.0])
    sigma2 = np.sum(r**2) / 4
    expected = 0.5 * 4 * (np.log(2 * np.pi * sigma2) + 1.0)
    assert gaussian_nll(r) == pytest.approx(expected)


def test_fitness_sign_convention(linear_dataset):
    fit = fitness_of(_expr("t0*x0 + t1"), [2.0, 5.0], linear_dataset)
    assert fit == pytest.approx(0.0, abs=1e-20)
    worse = fitness_of(_expr("t0*x0 + t1"), [0.0, 0.0], linear_dataset)
    assert worse < fit


def test_fit_recovers_linear_coefficients(linear_dataset):
    theta, fit = fit_params(_expr("t0*x0 + t1"), linear_dataset, restarts=3, seed=1)
    assert theta[0] == pytest.approx(2.0, abs=1e-6)
    assert theta[1] == pytest.approx(5.0, abs=1e-6)
    assert fit == pytest.approx(0.0, abs=1e-10)


def test_fit_is_deterministic_per_seed(small_dataset):
    e = _expr("t0*sqrt(x0) + t1*x4")
    a = fit_params(e, small_dataset, restarts=4, seed=9)
    b = fit_params(e, small_dataset, restarts=4, seed=9)
    assert list(a[0]) == list(b[0]) and a[1] == b[1]


def test_fit_without_parameters(linear_dataset):
    theta, fit = fit_params(_expr("x0"), linear_dataset)
    assert len(theta) == 0
    assert fit == pytest.approx(-float(np.mean((linear_dataset.X[:, 0] - linear_dataset.y) ** 2)))


def test_fit_failure_on_empty_data():
    ds = Dataset(np.zeros((0, 1)), np.zeros(0))
    with pytest.raises(FitFailure):
        fit_params(_expr("t0*x0"), ds)


def test_fit_with_nll_loss(linear_dataset):
    theta, fit = fit_params(_expr("t0*x0 + t1"), linear_dataset, loss_kind="nll", restarts=3, seed=2)
    assert theta[0] == pytest.approx(2.0, abs=1e-4)
    n = linear_dataset.n_rows
    floor_nll = 0.5 * n * (np.log(2 * np.pi * 1e-12) + 1.0)
    assert fit == pytest.approx(-floor_nll, rel=1e-6)


def test_alphabet_size():
    assert alphabet_size(5) == 12 + 5 + 1


def test_description_length_components(linear_dataset):
    e = _expr("t0*x0 + t1")
    dl = description_length(e, [2.0, 5.0], linear_dataset)
    assert np.isfinite(dl)
    # A structurally larger model with an extra irrelevant term codes longer.
    e2 = _expr("t0*x0 + t1 + 0*x1")
    dl2 = description_length(e2, [2.0, 5.0], linear_dataset)
    assert dl2 > dl


def test_description_length_drops_zero_parameters(linear_dataset):
    e = _expr("t0*x0 + t1*x1")
    with_zero = description_length(e, [2.0, 0.0], linear_dataset)
    # The zero parameter contributes nothing beyond the structure term.
    e_manual = parse_expression("t0*x0 + t1*x1")[0]
    again = description_length(e_manual, [2.0, 0.0], linear_dataset)
    assert with_zero == again
    assert np.isfinite(with_zero)
