"""Laplace-Beltrami eigenstructure and Jacobi polynomials.

Eigenvalues, eigenspace dimensions and the constants of the addition formula

    sum_m Y_{l,m}(u) Y_{l,m}(v) = kappa_l * P_l^{(alpha, beta)}(cos(eps * rho(u, v)))

for the degrees ``l`` in the index set of a space (all non-negative integers,
or only the even ones on real projective space).
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from math import lgamma

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ParameterError, SpectralIndexError
from .spaces import SpaceParams

__all__ = [
    "degrees",
    "eigenvalue",
    "eigenspace_dim",
    "log_eigenspace_dims",
    "jacobi_at_one",
    "jacobi_eval",
    "jacobi_iter",
    "SpectralTable",
    "spectral_table",
    "addition_kernel",
    "zonal_sum",
]

_T_CLAMP = 1e-12


def _check_degree(params: SpaceParams, ell: int) -> int:
    if int(ell) != ell or ell < 0 or ell % params.ell_stride:
        allowed = "even non-negative integers" if params.ell_stride == 2 else "non-negative integers"
        raise SpectralIndexError(f"degree {ell} is not in the index set of {params.label} ({allowed})")
    return int(ell)


def degrees(params: SpaceParams, ell_max: int) -> np.ndarray:
    """Degrees of the index set up to and including ``ell_max``."""
    return np.arange(0, int(ell_max) + 1, params.ell_stride)


def eigenvalue(params: SpaceParams, ell: int) -> float:
    """Laplace-Beltrami eigenvalue ``-l (l + alpha + beta + 1)``."""
    ell = _check_degree(params, ell)
    return -ell * (ell + params.alpha + params.beta + 1.0)


def log_eigenspace_dims(params: SpaceParams, ells) -> np.ndarray:
    """Natural log of the eigenspace dimensions, vectorized over degrees.

    Every Gamma factor is handled through ``gammaln``; degree 0 is special-cased
    to log(1) = 0 because the ratio is 0 * Gamma(0) on the circle.
    """
    a, b = params.alpha, params.beta
    s = a + b + 1.0
    ells = np.asarray(ells, dtype=float)
    safe = np.where(ells == 0, 1.0, ells)
    out = (
        np.log(2.0 * safe + s)
        + gammaln(b + 1.0)
        + gammaln(safe + s)
        + gammaln(safe + a + 1.0)
        - gammaln(a + 1.0)
        - gammaln(s + 1.0)
        - gammaln(safe + 1.0)
        - gammaln(safe + b + 1.0)
    )
    return np.where(ells == 0, 0.0, out)


def eigenspace_dim(params: SpaceParams, ell: int) -> int:
    """Dimension of the eigenspace of degree ``ell``.

    The Gamma ratio is evaluated in log space and must land on an integer
    within a relative 1e-6 before rounding; a miss means the Jacobi parameters
    are wired wrongly for the space.
    """
    ell = _check_degree(params, ell)
    value = float(np.exp(log_eigenspace_dims(params, [ell])[0]))
    rounded = round(value)
    if rounded < 1 or abs(value - rounded) > 1e-6 * max(1.0, value):
        raise ParameterError(
            f"eigenspace dimension {value!r} at degree {ell} is not an integer for {params.label}"
        )
    return int(rounded)


def jacobi_at_one(alpha: float, beta: float, ell: int) -> float:
    """``P_l^{(alpha, beta)}(1) = Gamma(l + alpha + 1) / (Gamma(alpha + 1) Gamma(l + 1))``."""
    return float(np.exp(lgamma(ell + alpha + 1.0) - lgamma(alpha + 1.0) - lgamma(ell + 1.0)))


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + _T_CLAMP) or np.any(np.isnan(t)):
        raise DomainError("Jacobi polynomials are evaluated on [-1, 1] only")
    return np.clip(t, -1.0, 1.0)


def jacobi_iter(alpha: float, beta: float, ell_max: int, t) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(l, P_l^{(alpha, beta)}(t))`` for ``l = 0 .. ell_max``.

    The upward three-term recurrence is entered at ``l = 2``; ``P_1`` is given
    explicitly because the recurrence's leading coefficient vanishes at ``l = 1``
    when ``alpha + beta = -1``. Only two degrees are kept in memory.
    """
    if alpha <= -1 or beta <= -1:
        raise ParameterError("Jacobi parameters must exceed -1")
    t = _check_t(t)
    p_prev = np.ones_like(t)
    yield 0, p_prev
    if ell_max < 1:
        return
    ab = alpha + beta
    p_cur = 0.5 * (alpha - beta) + 0.5 * (ab + 2.0) * t
    yield 1, p_cur
    a2b2 = alpha * alpha - beta * beta
    for n in range(2, int(ell_max) + 1):
        c = 2.0 * n + ab
        lead = 2.0 * n * (n + ab) * (c - 2.0)
        mid = c - 1.0
        back = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * c
        p_next = (mid * (c * (c - 2.0) * t + a2b2) * p_cur - back * p_prev) / lead
        p_prev, p_cur = p_cur, p_next
        yield n, p_cur


def jacobi_eval(alpha: float, beta: float, ell_max: int, t) -> np.ndarray:
    """Values of ``P_0 .. P_{ell_max}`` at ``t``, stacked along a new leading axis.

    Returns
    -------
    ndarray of shape ``(ell_max + 1,) + np.shape(t)``
    """
    return np.stack([p for _, p in jacobi_iter(alpha, beta, ell_max, t)])


@dataclass(frozen=True)
class SpectralTable:
    """Per-degree eigenvalues, eigenspace dimensions and addition-formula constants.

    Rows are indexed by the degrees in ``ells`` (the index set truncated at
    ``ell_max``). ``dims`` holds floats so that tables with huge dimensions stay
    usable; the exact integers are available from :func:`eigenspace_dim`.
    """

    params: SpaceParams
    ell_max: int
    ells: np.ndarray
    lambdas: np.ndarray
    dims: np.ndarray
    kappas: np.ndarray

    def row(self, ell: int) -> int:
        ell = _check_degree(self.params, ell)
        if ell > self.ell_max:
            raise SpectralIndexError(f"degree {ell} exceeds table truncation {self.ell_max}")
        return ell // self.params.ell_stride

    def kappa(self, ell: int) -> float:
        return float(self.kappas[self.row(ell)])


def spectral_table(params: SpaceParams, ell_max: int) -> SpectralTable:
    if ell_max < 0:
        raise ParameterError("ell_max must be non-negative")
    ells = degrees(params, ell_max)
    a, b = params.alpha, params.beta
    log_dims = log_eigenspace_dims(params, ells)
    log_p1 = gammaln(ells + a + 1.0) - gammaln(a + 1.0) - gammaln(ells + 1.0)
    return SpectralTable(
        params=params,
        ell_max=int(ell_max),
        ells=ells,
        lambdas=-ells * (ells + a + b + 1.0),
        dims=np.exp(log_dims),
        kappas=np.exp(log_dims - log_p1),
    )


def addition_kernel(table: SpectralTable, ell: int, t):
    """``kappa_l * P_l^{(alpha, beta)}(t)``, the zonal reproducing kernel of degree ``l``."""
    i = table.row(ell)
    p = table.params
    *_, (_, values) = jacobi_iter(p.alpha, p.beta, ell, t)
    out = table.kappas[i] * values
    return out[()] if np.ndim(out) == 0 else out


def zonal_sum(params: SpaceParams, coeffs, t, ells=None) -> np.ndarray:
    """``sum_l coeffs[l] * P_l^{(alpha, beta)}(t)`` without materializing all degrees.

    ``coeffs`` pairs with ``ells`` (default: the index set from 0 with the
    space's stride). The evaluation keeps only two Jacobi degrees in memory, so
    it is safe on large arrays of ``t``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if ells is None:
        ells = np.arange(coeffs.size) * params.ell_stride
    ells = np.asarray(ells, dtype=int)
    t = _check_t(t)
    shape = t.shape
    t = t.reshape(-1)
    out = np.zeros_like(t)
    if ells.size == 0:
        return out.reshape(shape)
    g = np.zeros(int(ells.max()) + 1)
    g[ells] = coeffs
    a, b = params.alpha, params.beta
    ab = a + b
    a2b2 = a * a - b * b
    # in-place variant of jacobi_iter: P_n = (A_n t + B_n) P_{n-1} - C_n P_{n-2}
    p_prev = np.ones_like(t)
    out += g[0]
    if g.size == 1:
        return out.reshape(shape)
    p_cur = 0.5 * (a - b) + 0.5 * (ab + 2.0) * t
    out += g[1] * p_cur
    buf = np.empty_like(t)
    for n in range(2, g.size):
        c = 2.0 * n + ab
        lead = 2.0 * n * (n + ab) * (c - 2.0)
        A = (c - 1.0) * c * (c - 2.0) / lead
        B = (c - 1.0) * a2b2 / lead
        C = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c / lead
        np.multiply(t, A, out=buf)
        buf += B
        buf *= p_cur
        p_prev *= C
        buf -= p_prev
        p_prev, p_cur, buf = p_cur, buf, p_prev
        if g[n]:
            out += g[n] * p_cur
    return out.reshape(shape)
