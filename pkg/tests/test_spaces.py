import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tphcov.errors import ParameterError, SpaceMismatchError, UnsupportedSpaceError
from tphcov.spaces import (
    SpaceKind,
    cos_eps_rho,
    cos_eps_rho_matrix,
    distance_cdf,
    geodesic_distance,
    sample_uniform,
    space_params,
)

from conftest import POINT_SPACES
from oracles import jacobi_weight_cdf_quad


@pytest.mark.parametrize(
    "kind, d, alpha, beta, eps, stride",
    [
        ("sphere", 2, 0.0, 0.0, 1.0, 1),
        ("complex_projective", 4, 1.0, 0.0, 1.0, 1),
        ("real_projective", 3, 0.5, 0.5, 0.5, 2),
        ("cayley_plane", 16, 7.0, 3.0, 1.0, 1),
        ("quaternion_projective", 8, 3.0, 1.0, 1.0, 1),
        ("sphere", 1, -0.5, -0.5, 1.0, 1),
    ],
)
def test_space_params_table(kind, d, alpha, beta, eps, stride):
    sp = space_params(kind, d)
    assert (sp.alpha, sp.beta, sp.eps, sp.ell_stride) == (alpha, beta, eps, stride)
    assert sp.alpha >= sp.beta >= -0.5


@pytest.mark.parametrize(
    "kind, d",
    [("sphere", 0), ("real_projective", 1), ("complex_projective", 2), ("complex_projective", 5),
     ("quaternion_projective", 4), ("quaternion_projective", 10), ("cayley_plane", 8), ("torus", 2)],
)
def test_space_params_rejects_illegal(kind, d):
    with pytest.raises(ParameterError):
        space_params(kind, d)


def test_aliases():
    assert space_params("cp", 4).kind is SpaceKind.COMPLEX_PROJECTIVE
    assert space_params("Real-Projective", 2).kind is SpaceKind.REAL_PROJECTIVE


def test_ambient_dims():
    assert space_params("sphere", 2).ambient_dim == 3
    assert space_params("complex_projective", 4).ambient_dim == 6
    assert space_params("quaternion_projective", 8).ambient_dim == 12


def test_sample_zero_count(s2):
    assert sample_uniform(s2, 0, 1).shape == (0, 3)


def test_sample_unit_norm_and_determinism():
    for kind, d in POINT_SPACES:
        sp = space_params(kind, d)
        a = sample_uniform(sp, 50, 7)
        b = sample_uniform(sp, 50, 7)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(np.sum(a * a, axis=1), 1.0, atol=1e-12)
        assert not np.array_equal(a, sample_uniform(sp, 50, 8))


def test_sample_mean_vanishes(s2):
    x = sample_uniform(s2, 200_000, 3)
    # each coordinate has variance 1/3
    assert np.all(np.abs(x.mean(axis=0)) < 5 * np.sqrt(1 / 3 / 200_000))


def test_cayley_has_no_points():
    cay = space_params("cayley_plane", 16)
    with pytest.raises(UnsupportedSpaceError):
        sample_uniform(cay, 3, 0)
    with pytest.raises(UnsupportedSpaceError):
        cos_eps_rho(cay, np.ones(17), np.ones(17))


def test_mismatched_points(s2):
    with pytest.raises(SpaceMismatchError):
        cos_eps_rho(s2, np.array([1.0, 0, 0]), np.array([1.0, 0, 0, 0]))


def test_trivial_distances(s2, rp2):
    north = np.array([0.0, 0, 1])
    assert cos_eps_rho(s2, north, north) == 1.0
    assert cos_eps_rho(s2, north, -north) == -1.0
    assert geodesic_distance(s2, north, north) == 0.0
    assert cos_eps_rho(rp2, north, -north) == 1.0
    assert geodesic_distance(rp2, np.array([1.0, 0, 0]), north) == pytest.approx(np.pi, abs=1e-15)


def test_circle_arc_length():
    s1 = space_params("sphere", 1)
    for theta in np.linspace(0, np.pi, 13):
        v = np.array([np.cos(theta), np.sin(theta)])
        assert geodesic_distance(s1, np.array([1.0, 0]), v) == pytest.approx(theta, abs=1e-7)


def test_self_distance_is_zero_everywhere():
    for kind, d in POINT_SPACES:
        sp = space_params(kind, d)
        x = sample_uniform(sp, 20, 1)
        np.testing.assert_allclose(cos_eps_rho(sp, x, x), 1.0, atol=1e-12)


def _unit_scalar(sp, rng):
    f = sp.field_dim
    z = rng.standard_normal(f)
    return z / np.linalg.norm(z)


def _right_multiply(sp, u, lam):
    """Multiply every field coordinate of u on the right by the unit scalar lam."""
    f = sp.field_dim
    blocks = u.reshape(-1, f)
    if f == 1:
        return (blocks * lam[0]).reshape(-1)
    if f == 2:
        z = (blocks[:, 0] + 1j * blocks[:, 1]) * (lam[0] + 1j * lam[1])
        return np.column_stack([z.real, z.imag]).reshape(-1)
    a0, a1, a2, a3 = blocks.T
    b0, b1, b2, b3 = lam
    out = np.column_stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ])
    return out.reshape(-1)


@pytest.mark.parametrize("kind, d", [k for k in POINT_SPACES if k[0] != "sphere"])
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_representative_invariance(kind, d, seed):
    sp = space_params(kind, d)
    rng = np.random.default_rng(seed)
    u, v = sample_uniform(sp, 2, rng)
    lam = _unit_scalar(sp, rng)
    u2 = _right_multiply(sp, u, lam)
    assert np.linalg.norm(u2) == pytest.approx(1.0, abs=1e-12)
    assert abs(cos_eps_rho(sp, u2, v) - cos_eps_rho(sp, u, v)) < 1e-12
    assert abs(cos_eps_rho(sp, v, u2) - cos_eps_rho(sp, v, u)) < 1e-12


@pytest.mark.parametrize("kind, d", POINT_SPACES)
def test_symmetry_and_range(kind, d):
    sp = space_params(kind, d)
    U = sample_uniform(sp, 30, 5)
    V = sample_uniform(sp, 30, 6)
    T = cos_eps_rho_matrix(sp, U, V)
    assert np.array_equal(T, cos_eps_rho_matrix(sp, V, U).T)
    np.testing.assert_allclose(T, cos_eps_rho(sp, U[:, None, :], V[None, :, :]), atol=1e-14)
    assert np.all(np.abs(T) <= 1.0)
    rho = geodesic_distance(sp, U, V)
    assert np.all((rho >= 0) & (rho <= np.pi))


@pytest.mark.parametrize("kind, d", POINT_SPACES)
def test_distance_cdf_matches_quadrature(kind, d):
    sp = space_params(kind, d)
    lower = 0.0 if sp.kind is SpaceKind.REAL_PROJECTIVE else -1.0
    for t in np.linspace(lower, 1.0, 9):
        assert distance_cdf(sp, t) == pytest.approx(
            jacobi_weight_cdf_quad(sp.alpha, sp.beta, t, lower), abs=1e-7
        )


def test_distance_law_beta_cross_check():
    # |<u, v>|^2 on P^4(C) (3 complex coordinates) is Beta(1, 2)
    sp = space_params("complex_projective", 4)
    U = sample_uniform(sp, 20000, 11)
    V = sample_uniform(sp, 20000, 12)
    x = (cos_eps_rho(sp, U, V) + 1) / 2
    assert stats.kstest(x, stats.beta(1, 2).cdf).statistic < 0.015
