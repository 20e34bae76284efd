import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import sparsecontrol as sc
from sparsecontrol.checks import bisect_threshold
from sparsecontrol.grid import like
from sparsecontrol.l1ball import (l1_directional_derivative, project_field,
                                  project_slice, recover_multiplier)

slices = st.lists(st.floats(-100.0, 100.0), min_size=1, max_size=50).map(np.array)
weights = st.floats(0.05, 3.0)
budgets = st.floats(0.01, 50.0)


def test_feasible_slice_passes_through():
    res = project_slice(np.array([0.3, -0.2]), 1.0, 2.0)
    assert res.threshold == 0.0
    assert not res.active
    assert np.array_equal(res.values, [0.3, -0.2])


def test_hand_example_unit_weight():
    res = project_slice(np.array([3.0, 1.0]), 1.0, 2.0)
    assert res.threshold == pytest.approx(1.0)
    assert res.active
    assert np.allclose(res.values, [2.0, 0.0], atol=1e-15)


def test_hand_example_weighted_signed():
    res = project_slice(np.array([-3.0, 1.0]), 0.5, 1.0)
    assert res.threshold == pytest.approx(1.0)
    assert np.allclose(res.values, [-2.0, 0.0], atol=1e-15)


def test_tiny_budget_shrinks_to_origin():
    v = np.array([4.0, -2.0, 1.0])
    res = project_slice(v, 1.0, 1e-9)
    assert np.sum(np.abs(res.values)) == pytest.approx(1e-9, rel=1e-6)
    assert np.max(np.abs(res.values)) <= 2e-9


def test_invalid_arguments():
    with pytest.raises(ValueError):
        project_slice(np.array([1.0]), 1.0, 0.0)
    with pytest.raises(ValueError):
        project_slice(np.array([1.0]), -1.0, 1.0)


@settings(max_examples=400, derandomize=True)
@given(slices, weights, budgets)
def test_projection_properties(v, w, gamma):
    res = project_slice(v, w, gamma)
    total = w * np.sum(np.abs(res.values))
    assert total <= gamma + 1e-12 * max(1.0, gamma)
    if res.active:
        assert total == pytest.approx(gamma, abs=1e-10 * max(1.0, gamma))
    else:
        assert res.threshold == 0.0
    # threshold engages exactly when the input is (strictly) infeasible
    input_total = w * np.sum(np.abs(v))
    if input_total > gamma * (1.0 + 1e-10):
        assert res.threshold > 0.0
    if input_total < gamma * (1.0 - 1e-10):
        assert res.threshold == 0.0
    # idempotence, exact
    again = project_slice(res.values, w, gamma)
    assert np.array_equal(again.values, res.values)
    assert again.threshold == 0.0


@settings(max_examples=200, derandomize=True)
@given(slices, weights, budgets, st.integers(0, 2**31 - 1))
def test_nonexpansive(v, w, gamma, seed):
    rng = np.random.default_rng(seed)
    b = v + rng.standard_normal(v.size)
    pa = project_slice(v, w, gamma).values
    pb = project_slice(b, w, gamma).values
    assert np.sqrt(w * np.sum((pa - pb) ** 2)) \
        <= np.sqrt(w * np.sum((v - b) ** 2)) + 1e-12


def test_matches_bisection_oracle():
    rng = np.random.default_rng(123)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 51))
        v = rng.standard_normal(n) * 10.0 ** rng.uniform(-1, 1)
        w = float(10.0 ** rng.uniform(-1, 0.5))
        gamma = float(w * np.sum(np.abs(v)) * 10.0 ** rng.uniform(-1.0, 0.3)) + 1e-12
        res = project_slice(v, w, gamma)
        lam = bisect_threshold(v, w, gamma)
        oracle = np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)
        worst = max(worst, float(np.max(np.abs(res.values - oracle))))
    assert worst <= 1e-10


def test_project_field_slicewise():
    grid = sc.SpaceGrid(1, 4)
    tgrid = sc.TimeGrid(1.0, 3)
    values = np.array([
        [0.1, -0.1, 0.0, 0.1],      # feasible
        [5.0, -3.0, 2.0, 0.0],      # infeasible
        [0.2, 0.0, 0.0, -0.2],      # feasible
    ])
    f = sc.field_per_interval(grid, tgrid, values)
    projected, thresholds = project_field(f, 0.5)
    assert np.array_equal(projected.values[0], values[0])
    assert np.array_equal(projected.values[2], values[2])
    assert thresholds[0] == 0.0 and thresholds[2] == 0.0
    assert thresholds[1] > 0.0
    # componentwise match with the slice routine
    per_slice = project_slice(values[1], grid.cell_weight, 0.5)
    assert np.array_equal(projected.values[1], per_slice.values)
    assert thresholds[1] == per_slice.threshold


def test_l1_directional_derivative_cases():
    w = 1.0
    # strictly positive control: plain integral of v
    assert l1_directional_derivative(np.array([1.0, 2.0]),
                                     np.array([3.0, -1.0]), w) == pytest.approx(2.0)
    # zero control: l1 norm of v
    assert l1_directional_derivative(np.zeros(3),
                                     np.array([1.0, -2.0, 3.0]), w) == pytest.approx(6.0)
    # mixed hand example
    assert l1_directional_derivative(np.array([1.0, 0.0, -2.0]),
                                     np.array([5.0, -3.0, 4.0]), w,
                                     zero_tol=1e-10) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        l1_directional_derivative(np.zeros(2), np.zeros(3), w)


def test_recover_multiplier_values():
    grid = sc.SpaceGrid(1, 2)
    tgrid = sc.TimeGrid(1.0, 1)
    u = sc.field_per_interval(grid, tgrid, np.array([[2.0, 0.0]]))
    phi = sc.field_per_interval(grid, tgrid, np.array([[-3.0, -1.0]]))
    mu = recover_multiplier(u, phi, 1.0)
    assert np.allclose(mu.values, [[1.0, 1.0]])
    # unconstrained stationarity: u = -phi/kappa gives mu = 0
    kappa = 0.7
    u2 = like(u, -phi.values / kappa)
    assert np.allclose(recover_multiplier(u2, phi, kappa).values, 0.0)
    # linearity in (u, phi)
    mu2 = recover_multiplier(like(u, 3.0 * u.values), like(phi, 3.0 * phi.values), 1.0)
    assert np.allclose(mu2.values, 3.0 * mu.values)


def test_recover_multiplier_shape_mismatch():
    grid = sc.SpaceGrid(1, 2)
    tgrid = sc.TimeGrid(1.0, 2)
    u = sc.field_per_interval(grid, tgrid)
    phi = sc.field_at_nodes(grid, tgrid)
    with pytest.raises(ValueError):
        recover_multiplier(u, phi, 1.0)


def test_soft_threshold_identity_chain():
    # project -phi/kappa, recover mu, check |phi| = kappa|u| + |mu| nodewise
    # and the support/sign structure of the multiplier
    rng = np.random.default_rng(7)
    kappa, gamma, w = 0.4, 1.3, 0.25
    for _ in range(50):
        phi = rng.standard_normal(12) * 3.0
        res = project_slice(-phi / kappa, w, gamma)
        u = res.values
        mu = -(phi + kappa * u)
        assert np.max(np.abs(np.abs(phi) - (kappa * np.abs(u) + np.abs(mu)))) <= 1e-12
        assert np.all(u * mu >= -1e-14)          # same signs
        if res.active and res.threshold > 0:
            on_support = np.abs(u) > 0
            assert np.all(np.abs(np.abs(mu[on_support]) / kappa
                                 - res.threshold) <= 1e-12)
            assert np.max(np.abs(mu)) / kappa == pytest.approx(res.threshold,
                                                               rel=1e-12)
        else:
            assert np.allclose(mu, 0.0, atol=1e-12)
