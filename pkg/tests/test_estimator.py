import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tphcov.errors import DesignError, NumericalError, ParameterError, ResourceError, SpaceMismatchError
from tphcov.estimator import (
    CovEstimate,
    Dataset,
    assemble_pairs,
    fit,
    gram_matrix,
    hp_norm_sq,
    objective,
    predict,
    predict_grid,
)
from tphcov.kernel import kernel_eval, product_kernel, zonal_green
from tphcov.spaces import sample_uniform, space_params

from oracles import brute_force_coeffs, quadratic_objective


def random_dataset(space, r_list, rng):
    rng = np.random.default_rng(rng)
    locs = [sample_uniform(space, r, rng) for r in r_list]
    vals = [rng.normal(size=r) for r in r_list]
    return Dataset(space, locs, vals)


@pytest.fixture(scope="module")
def k2():
    return zonal_green(space_params("sphere", 2), 3.0)


def test_single_subject_two_points():
    s2 = space_params("sphere", 2)
    data = Dataset(s2, [np.eye(3)[:2]], [[2.0, -1.5]])
    des = assemble_pairs(data)
    assert des.size == 2
    np.testing.assert_array_equal(des.response, [-3.0, -3.0])
    np.testing.assert_array_equal(des.weight, [0.5, 0.5])
    np.testing.assert_array_equal(des.first_idx, [0, 1])
    np.testing.assert_array_equal(des.second_idx, [1, 0])


def test_two_subjects_weights():
    data = random_dataset(space_params("sphere", 2), [2, 3], 0)
    des = assemble_pairs(data)
    assert des.size == 8
    np.testing.assert_allclose(des.weight[:2], 1 / 4)
    np.testing.assert_allclose(des.weight[2:], 1 / 12)
    np.testing.assert_array_equal(des.subject, [0, 0, 1, 1, 1, 1, 1, 1])
    # exhaustive enumeration in subject-major, j, k order
    expected = [(0, 1), (1, 0)] + [(2 + j, 2 + k) for j in range(3) for k in range(3) if j != k]
    assert list(zip(des.first_idx, des.second_idx)) == expected


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(2, 7), min_size=1, max_size=6), st.integers(0, 1000))
def test_design_invariants(r_list, seed):
    data = random_dataset(space_params("sphere", 2), r_list, seed)
    des = assemble_pairs(data)
    assert des.size == sum(r * (r - 1) for r in r_list)
    assert des.weight.sum() == pytest.approx(1.0, rel=1e-12)
    for i in range(len(r_list)):
        assert des.weight[des.subject == i].sum() == pytest.approx(1 / len(r_list))
    rows = {(f, s): (y, w) for f, s, y, w in zip(des.first_idx, des.second_idx, des.response, des.weight)}
    for (f, s), val in rows.items():
        assert rows[(s, f)] == val


def test_design_errors():
    s2 = space_params("sphere", 2)
    with pytest.raises(DesignError, match="subject 1"):
        assemble_pairs(random_dataset(s2, [3, 1], 0))
    with pytest.raises(DesignError):
        Dataset(s2, [np.eye(3)], [[1.0, 2.0]])
    with pytest.raises(SpaceMismatchError):
        Dataset(s2, [np.eye(4)], [[1.0, 2.0, 3.0, 4.0]])
    with pytest.raises(DesignError):
        assemble_pairs(Dataset(s2, [], []))


def test_one_by_one_closed_form(k2):
    data = random_dataset(k2.params, [2], 3)
    des = assemble_pairs(data)
    # keep only the first row to exercise the solver on a 1x1 system
    one = type(des)(des.space, des.points, des.first_idx[:1], des.second_idx[:1],
                    des.response[:1], des.weight[:1], des.subject[:1])
    eta = 0.37
    est = fit(k2, one, eta)
    K11 = gram_matrix(k2, one)[0, 0]
    w, y = one.weight[0], one.response[0]
    assert est.coeffs[0] == pytest.approx(w * y / (w * K11 + eta), rel=1e-12)
    assert K11 == pytest.approx(k2.max_value**2, rel=1e-12)


def test_gram_symmetric_psd(k2):
    des = assemble_pairs(random_dataset(k2.params, [3, 4, 2, 5], 7))
    K = gram_matrix(k2, des)
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() >= -1e-8 * np.trace(K)
    m, mm = 3, 11
    assert K[m, mm] == pytest.approx(
        product_kernel(k2, des.first[m], des.second[m], des.first[mm], des.second[mm]), rel=1e-12
    )


@pytest.mark.parametrize("kind", ["sphere", "real_projective"])
@pytest.mark.parametrize("seed", range(6))
def test_brute_force_equivalence(kind, seed):
    sp = space_params(kind, 2)
    k = zonal_green(sp, 3.0)
    rng = np.random.default_rng(seed)
    r_list = list(rng.integers(2, 5, size=rng.integers(1, 4)))
    des = assemble_pairs(random_dataset(sp, r_list, rng))
    eta = 10 ** rng.uniform(-3, 0)
    est = fit(k, des, eta)
    K = gram_matrix(k, des)
    ref = brute_force_coeffs(K, des.weight, des.response, eta)
    assert np.linalg.norm(est.coeffs - ref) <= 1e-8 * np.linalg.norm(ref)
    resid = (K + np.diag(eta / des.weight)) @ est.coeffs - des.response
    assert np.linalg.norm(resid) <= 1e-9 * np.linalg.norm(des.response)
    base = objective(k, des, est)
    assert base == pytest.approx(quadratic_objective(K, des.weight, des.response, eta, est.coeffs), rel=1e-10)
    for _ in range(20):
        delta = rng.normal(size=est.coeffs.size) * 1e-3 * np.abs(est.coeffs).max()
        assert quadratic_objective(K, des.weight, des.response, eta, est.coeffs + delta) >= base


def test_zero_and_unit_coefficients(k2):
    des = assemble_pairs(random_dataset(k2.params, [3, 2], 1))
    est = fit(k2, des, 1.0)
    zero = CovEstimate(k2, est.points, est.first_idx, est.second_idx, np.zeros(des.size), 1.0)
    u, v = sample_uniform(k2.params, 2, 9)
    assert predict(zero, u, v) == 0.0
    assert hp_norm_sq(zero) == 0.0
    assert objective(k2, des, zero) == pytest.approx(np.sum(des.weight * des.response**2))
    m = 4
    unit = CovEstimate(k2, est.points, est.first_idx, est.second_idx, np.eye(des.size)[m], 1.0)
    assert predict(unit, u, v) == pytest.approx(product_kernel(k2, u, v, des.first[m], des.second[m]), rel=1e-12)
    assert hp_norm_sq(unit) == pytest.approx(k2.max_value**2, rel=1e-12)
    doubled = CovEstimate(k2, est.points, est.first_idx, est.second_idx, 2 * est.coeffs, 1.0)
    assert hp_norm_sq(doubled) == pytest.approx(4 * hp_norm_sq(est), rel=1e-12)


@pytest.mark.parametrize("kind, d", [("sphere", 2), ("real_projective", 2), ("complex_projective", 4)])
def test_predict_symmetry(kind, d):
    sp = space_params(kind, d)
    k = zonal_green(sp, d + 1.0)
    des = assemble_pairs(random_dataset(sp, [4, 3, 5], 2))
    est = fit(k, des, 0.05)
    U = sample_uniform(sp, 100, 3)
    V = sample_uniform(sp, 100, 4)
    a, b = predict(est, U, V), predict(est, V, U)
    assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(a))
    G = predict_grid(est, U[:10], V[:7])
    np.testing.assert_allclose(G[2, 5], predict(est, U[2], V[5]), rtol=1e-12)


def test_eta_monotonicity(k2):
    des = assemble_pairs(random_dataset(k2.params, [4, 4, 3], 5))
    K = gram_matrix(k2, des)
    norms = [hp_norm_sq(fit(k2, des, eta, gram=K)) for eta in np.logspace(-4, 3, 15)]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(norms, norms[1:]))


def test_permutation_invariance(k2):
    rng = np.random.default_rng(8)
    data = random_dataset(k2.params, [3, 4, 2], rng)
    est = fit(k2, assemble_pairs(data), 0.1)
    order = [2, 0, 1]
    perm_locs, perm_vals = [], []
    for i in order:
        within = rng.permutation(data.r[i])
        perm_locs.append(data.locations[i][within])
        perm_vals.append(data.values[i][within])
    est2 = fit(k2, assemble_pairs(Dataset(k2.params, perm_locs, perm_vals)), 0.1)
    U = sample_uniform(k2.params, 30, 1)
    V = sample_uniform(k2.params, 30, 2)
    np.testing.assert_allclose(predict(est, U, V), predict(est2, U, V), atol=1e-9)


def test_penalty_limits(k2):
    """For large eta the fit decays like 1/eta towards the c = W y representer."""
    des = assemble_pairs(random_dataset(k2.params, [3, 3], 12))
    U = sample_uniform(k2.params, 200, 0)
    V = sample_uniform(k2.params, 200, 1)
    first_order = CovEstimate(k2, des.points, des.first_idx, des.second_idx, des.weight * des.response, 1.0)
    limit = predict(first_order, U, V)
    big = fit(k2, des, 1e6)
    assert np.abs(big.coeffs).max() < 1e-6 * np.abs(des.response).max()
    np.testing.assert_allclose(1e6 * predict(big, U, V), limit, rtol=1e-4, atol=1e-4 * np.abs(limit).max())
    scale = np.abs(predict(fit(k2, des, 1.0), U, V)).max()
    assert np.abs(predict(big, U, V)).max() < 1e-5 * scale


def test_interpolation_limit(k2):
    # M = 6: one subject with three well separated points
    data = Dataset(k2.params, [np.eye(3)], [[1.0, -0.5, 2.0]])
    des = assemble_pairs(data)
    est = fit(k2, des, 1e-8)
    fitted = predict(est, des.first, des.second)
    assert np.sum(des.weight * (des.response - fitted) ** 2) < 1e-10


def test_fit_errors(k2):
    des = assemble_pairs(random_dataset(k2.params, [3, 3], 0))
    with pytest.raises(ParameterError):
        fit(k2, des, 0.0)
    with pytest.raises(ResourceError):
        fit(k2, des, 1.0, max_pairs=5)
    with pytest.raises(NumericalError):
        fit(k2, des, 1.0, gram=-np.eye(des.size) * 1e6)
    other = zonal_green(space_params("real_projective", 2), 3.0)
    with pytest.raises(SpaceMismatchError):
        fit(other, des, 1.0)


def test_predict_space_mismatch(k2):
    est = fit(k2, assemble_pairs(random_dataset(k2.params, [2], 0)), 1.0)
    with pytest.raises(TypeError):
        predict(est, np.ones(4) / 2, np.ones(4) / 2)


def test_constant_recovery_scale(k2):
    """Penalized fit to constant responses approaches the constant as eta shrinks."""
    s2 = k2.params
    rng = np.random.default_rng(4)
    locs = [sample_uniform(s2, 5, rng) for _ in range(20)]
    data = Dataset(s2, locs, [np.ones(5) for _ in locs])
    est = fit(k2, assemble_pairs(data), 1e-6)
    U = sample_uniform(s2, 50, rng)
    assert np.abs(predict(est, U, U[::-1]) - 1).max() < 0.05
    assert kernel_eval(k2, 1.0) > 1
