"""Compact two-point homogeneous spaces: parameters, points, distances, sampling.

Points are plain NumPy arrays of real coordinates. A single point has shape
``(D,)`` and a collection of points has shape ``(N, D)``, where ``D`` is the
ambient real dimension of the coordinate vector:

=====================  ==========  =======================================
family                 d           coordinates
=====================  ==========  =======================================
sphere S^d             1, 2, ...   d + 1 reals
real projective        2, 3, ...   d + 1 reals (sign ambiguity)
complex projective     4, 6, ...   d/2 + 1 complex numbers, stored
                                   interleaved as (re, im) pairs
quaternion projective  8, 12, ...  d/4 + 1 quaternions, stored as
                                   (1, i, j, k) blocks
Cayley plane           16          no point model
=====================  ==========  =======================================

Projective points are unit vectors up to right multiplication by a unit
scalar of the coordinate field; every quantity computed here is invariant
under that ambiguity, so no canonical form is ever chosen.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ParameterError, SpaceMismatchError, UnsupportedSpaceError

__all__ = [
    "SpaceKind",
    "SpaceParams",
    "space_params",
    "sample_uniform",
    "cos_eps_rho",
    "cos_eps_rho_matrix",
    "geodesic_distance",
    "distance_cdf",
    "as_rng",
]


class SpaceKind(str, enum.Enum):
    SPHERE = "sphere"
    REAL_PROJECTIVE = "real_projective"
    COMPLEX_PROJECTIVE = "complex_projective"
    QUATERNION_PROJECTIVE = "quaternion_projective"
    CAYLEY_PLANE = "cayley_plane"


_ALIASES = {
    "s": SpaceKind.SPHERE,
    "rp": SpaceKind.REAL_PROJECTIVE,
    "cp": SpaceKind.COMPLEX_PROJECTIVE,
    "hp": SpaceKind.QUATERNION_PROJECTIVE,
    "cay": SpaceKind.CAYLEY_PLANE,
    "cayley": SpaceKind.CAYLEY_PLANE,
}

_LEGAL = {
    SpaceKind.SPHERE: "d = 1, 2, 3, ...",
    SpaceKind.REAL_PROJECTIVE: "d = 2, 3, 4, ...",
    SpaceKind.COMPLEX_PROJECTIVE: "d = 4, 6, 8, ...",
    SpaceKind.QUATERNION_PROJECTIVE: "d = 8, 12, 16, ...",
    SpaceKind.CAYLEY_PLANE: "d = 16",
}

# real components per coordinate of the field R, C, H
_FIELD_DIM = {
    SpaceKind.SPHERE: 1,
    SpaceKind.REAL_PROJECTIVE: 1,
    SpaceKind.COMPLEX_PROJECTIVE: 2,
    SpaceKind.QUATERNION_PROJECTIVE: 4,
}


def _parse_kind(kind) -> SpaceKind:
    if isinstance(kind, SpaceKind):
        return kind
    key = str(kind).strip().lower().replace("-", "_").replace(" ", "_")
    try:
        return SpaceKind(key)
    except ValueError:
        pass
    if key in _ALIASES:
        return _ALIASES[key]
    raise ParameterError(
        f"unknown space family {kind!r}; expected one of "
        f"{[k.value for k in SpaceKind]}"
    )


@dataclass(frozen=True)
class SpaceParams:
    """A space family with its Jacobi parameters and eigenvalue index set.

    Attributes
    ----------
    kind : SpaceKind
    d : int
        Manifold dimension.
    alpha, beta : float
        Jacobi parameters of the zonal eigenfunctions.
    eps : float
        Scaling inside ``cos(eps * rho)``; 1/2 on real projective space.
    ell_stride : int
        2 on real projective space (only even degrees), 1 otherwise.
    """

    kind: SpaceKind
    d: int
    alpha: float
    beta: float
    eps: float
    ell_stride: int

    @property
    def field_dim(self) -> int:
        if self.kind is SpaceKind.CAYLEY_PLANE:
            raise UnsupportedSpaceError("the Cayley plane has no point model")
        return _FIELD_DIM[self.kind]

    @property
    def ambient_dim(self) -> int:
        """Number of real coordinates of a point representative."""
        f = self.field_dim
        return f * (self.d // f + 1)

    @property
    def supports_points(self) -> bool:
        return self.kind is not SpaceKind.CAYLEY_PLANE

    @property
    def label(self) -> str:
        names = {
            SpaceKind.SPHERE: "S^{d}",
            SpaceKind.REAL_PROJECTIVE: "P^{d}(R)",
            SpaceKind.COMPLEX_PROJECTIVE: "P^{d}(C)",
            SpaceKind.QUATERNION_PROJECTIVE: "P^{d}(H)",
            SpaceKind.CAYLEY_PLANE: "P^{d}(Cay)",
        }
        return names[self.kind].format(d=self.d)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "d": self.d}


def space_params(kind, d: int) -> SpaceParams:
    """Build the parameters of a compact two-point homogeneous space.

    Parameters
    ----------
    kind : SpaceKind or str
        Space family (``"sphere"``, ``"real_projective"``, ``"complex_projective"``,
        ``"quaternion_projective"``, ``"cayley_plane"``; short aliases
        ``s, rp, cp, hp, cay`` are accepted).
    d : int
        Manifold dimension.

    Raises
    ------
    ParameterError
        If ``d`` is not a legal dimension for ``kind``.
    """
    kind = _parse_kind(kind)
    if isinstance(d, bool) or int(d) != d:
        raise ParameterError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    legal = {
        SpaceKind.SPHERE: d >= 1,
        SpaceKind.REAL_PROJECTIVE: d >= 2,
        SpaceKind.COMPLEX_PROJECTIVE: d >= 4 and d % 2 == 0,
        SpaceKind.QUATERNION_PROJECTIVE: d >= 8 and d % 4 == 0,
        SpaceKind.CAYLEY_PLANE: d == 16,
    }[kind]
    if not legal:
        raise ParameterError(
            f"illegal dimension d={d} for {kind.value}; legal set is {_LEGAL[kind]}"
        )

    half = (d - 2) / 2
    if kind is SpaceKind.CAYLEY_PLANE:
        alpha, beta = 7.0, 3.0
    elif kind is SpaceKind.COMPLEX_PROJECTIVE:
        alpha, beta = half, 0.0
    elif kind is SpaceKind.QUATERNION_PROJECTIVE:
        alpha, beta = half, 1.0
    else:
        alpha, beta = half, half
    rp = kind is SpaceKind.REAL_PROJECTIVE
    return SpaceParams(
        kind=kind,
        d=d,
        alpha=alpha,
        beta=beta,
        eps=0.5 if rp else 1.0,
        ell_stride=2 if rp else 1,
    )


def as_rng(rng) -> np.random.Generator:
    """Coerce a seed, ``SeedSequence`` or ``Generator`` into a ``Generator``."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_uniform(space: SpaceParams, count: int, rng=None) -> np.ndarray:
    """Draw ``count`` i.i.d. points from the normalized Riemannian measure.

    A standard Gaussian vector over the coordinate field is normalized to unit
    length; rotation invariance makes the result uniform on the sphere and,
    after quotienting by unit scalars, on the projective spaces.

    Returns
    -------
    ndarray of shape (count, space.ambient_dim)
    """
    if not space.supports_points:
        raise UnsupportedSpaceError("uniform sampling is not available on the Cayley plane")
    if count < 0:
        raise ParameterError(f"count must be non-negative, got {count}")
    rng = as_rng(rng)
    z = rng.standard_normal((int(count), space.ambient_dim))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    return z / norms


def _check_points(space: SpaceParams, *arrays: np.ndarray) -> None:
    if not space.supports_points:
        raise UnsupportedSpaceError("no point model on the Cayley plane")
    D = space.ambient_dim
    for a in arrays:
        if a.shape[-1:] != (D,):
            raise SpaceMismatchError(
                f"points with {a.shape[-1] if a.ndim else 0} coordinates do not belong "
                f"to {space.label} (expected {D})"
            )


def _split(x: np.ndarray, f: int) -> list[np.ndarray]:
    """Coordinate-field components: list of f arrays of shape (..., m + 1)."""
    x = x.reshape(x.shape[:-1] + (-1, f))
    return [x[..., c] for c in range(f)]


def _field_inner_sq(space: SpaceParams, u, v, dot) -> np.ndarray:
    """Squared modulus (or signed value for real fields) of sum_i conj(u_i) v_i."""
    f = space.field_dim
    if f == 1:
        return dot(u, v)
    a = _split(u, f)
    b = _split(v, f)
    if f == 2:
        re = dot(a[0], b[0]) + dot(a[1], b[1])
        im = dot(a[0], b[1]) - dot(a[1], b[0])
        return re * re + im * im
    # quaternion product conj(a) * b; antisymmetric terms are paired so that
    # swapping a and b negates each pair exactly and |.|^2 stays symmetric
    q0 = (dot(a[0], b[0]) + dot(a[1], b[1])) + (dot(a[2], b[2]) + dot(a[3], b[3]))
    q1 = (dot(a[0], b[1]) - dot(a[1], b[0])) + (dot(a[3], b[2]) - dot(a[2], b[3]))
    q2 = (dot(a[0], b[2]) - dot(a[2], b[0])) + (dot(a[1], b[3]) - dot(a[3], b[1]))
    q3 = (dot(a[0], b[3]) - dot(a[3], b[0])) + (dot(a[2], b[1]) - dot(a[1], b[2]))
    return q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3


def _to_t(space: SpaceParams, h: np.ndarray) -> np.ndarray:
    if space.kind is SpaceKind.SPHERE:
        t = h
    elif space.kind is SpaceKind.REAL_PROJECTIVE:
        t = np.abs(h)
    else:
        t = 2.0 * h - 1.0
    return np.clip(t, -1.0, 1.0)


def cos_eps_rho(space: SpaceParams, u, v):
    """``cos(eps * rho(u, v))`` for broadcastable arrays of points.

    Sphere: ``<u, v>``; real projective: ``|<u, v>|``; complex and quaternion
    projective: ``2 |<u, v>|^2 - 1`` with the Hermitian inner product of the
    coordinate field. The value is clamped to [-1, 1].
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_points(space, u, v)
    t = _to_t(space, _field_inner_sq(space, u, v, lambda x, y: np.sum(x * y, axis=-1)))
    return t[()] if t.ndim == 0 else t


def cos_eps_rho_matrix(space: SpaceParams, U, V) -> np.ndarray:
    """Pairwise ``cos(eps * rho)`` between rows of ``U`` (N, D) and ``V`` (K, D)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    _check_points(space, U, V)
    return _to_t(space, _field_inner_sq(space, U, V, lambda x, y: x @ y.T))


def geodesic_distance(space: SpaceParams, u, v):
    """Geodesic distance in [0, pi], ``arccos(cos_eps_rho) / eps``."""
    return np.arccos(cos_eps_rho(space, u, v)) / space.eps


def _jacobi_beta_cdf(alpha: float, beta: float, t):
    # (1 - t)^alpha (1 + t)^beta on [-1, 1] is a Beta(beta + 1, alpha + 1) law of (1 + t)/2
    return special.betainc(beta + 1.0, alpha + 1.0, (1.0 + np.asarray(t, dtype=float)) / 2.0)


def distance_cdf(space: SpaceParams, t):
    """CDF of ``cos(eps * rho(U, V))`` for independent uniform ``U, V``.

    The density is proportional to ``(1 - t)^alpha (1 + t)^beta`` on the support
    of ``t``, which is [-1, 1] except on real projective space where
    ``t = |<u, v>|`` lives on [0, 1].
    """
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    F = _jacobi_beta_cdf(space.alpha, space.beta, t)
    if space.kind is SpaceKind.REAL_PROJECTIVE:
        F0 = _jacobi_beta_cdf(space.alpha, space.beta, 0.0)
        F = np.clip((F - F0) / (1.0 - F0), 0.0, 1.0)
    return F
