"""Zonal Green's kernel of the Sobolev operator and the tensor product kernel.

For Sobolev order ``p`` the reproducing kernel of ``H_p`` is the zonal series

    psi(t) = sum_l kappa_l / (1 - lambda_l)^p * P_l^{(alpha, beta)}(t),

and ``psi(t(u, u2)) * psi(t(v, v2))`` reproduces the tensor space on
``M x M``. The series is truncated at a degree chosen so that a certified
bound on the dropped terms stays below a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NotRKHSError, ParameterError, ResourceError
from .spaces import SpaceParams, cos_eps_rho, cos_eps_rho_matrix
from .spectral import SpectralTable, log_eigenspace_dims, spectral_table, zonal_sum

__all__ = [
    "DEFAULT_TOL",
    "MAX_ELL",
    "ZonalKernel",
    "tail_terms",
    "tail_bound",
    "truncation_level",
    "zonal_green",
    "kernel_eval",
    "kernel_matrix",
    "product_kernel",
]

DEFAULT_TOL = 1e-8
MAX_ELL = 5000
# explicit summation horizon of the tail certificate
_FAR = 100_000


def _check_rkhs(params: SpaceParams, p: float) -> None:
    if not p > params.d / 2:
        raise NotRKHSError(
            f"H_p on {params.label} is a reproducing kernel Hilbert space only for "
            f"p > d/2 = {params.d / 2}; got p = {p}"
        )


def tail_terms(params: SpaceParams, p: float, ells) -> np.ndarray:
    """``dim(Y_l) / (1 - lambda_l)^p``, the uniform bound on the degree-l term of psi."""
    ells = np.asarray(ells, dtype=float)
    s = params.alpha + params.beta + 1.0
    return np.exp(log_eigenspace_dims(params, ells) - p * np.log1p(ells * (ells + s)))


def _tail_profile(params: SpaceParams, p: float, ell_far: int = _FAR):
    """Degrees up to ``ell_far`` and the certified tail beyond each of them.

    Terms decay like ``l^-gamma`` with ``gamma = 2p - 2alpha - 1 > 1``, so the
    ratio test never certifies; instead the remainder beyond ``ell_far`` is
    dominated by ``A l^-gamma`` and summed by an integral bound, where ``A``
    bounds ``a_l l^gamma`` by its value at ``ell_far`` and its limit (the
    normalized term is monotone there). A 1% safety factor is applied.
    """
    a, b = params.alpha, params.beta
    stride = params.ell_stride
    gamma = 2.0 * p - 2.0 * a - 1.0
    ells = np.arange(0, ell_far + 1, stride)
    terms = tail_terms(params, p, ells)
    lim = np.exp(np.log(2.0) + gammaln(b + 1.0) - gammaln(a + 1.0) - gammaln(a + b + 2.0))
    amp = 1.01 * max(terms[-1] * float(ells[-1]) ** gamma, lim)
    beyond = amp * float(ells[-1]) ** (1.0 - gamma) / ((gamma - 1.0) * stride)
    # tails[i] = sum over degrees strictly greater than ells[i]
    suffix = np.cumsum(terms[::-1])[::-1]
    tails = np.append(suffix[1:], 0.0) + beyond
    return ells, tails


def tail_bound(params: SpaceParams, p: float, ell_max: int) -> float:
    """Certified bound on ``sup_t |psi(t) - psi_L(t)|`` for truncation ``L = ell_max``."""
    _check_rkhs(params, p)
    if ell_max >= _FAR:
        raise ResourceError(f"truncation {ell_max} beyond certificate horizon {_FAR}")
    ells, tails = _tail_profile(params, p)
    i = np.searchsorted(ells, ell_max, side="right") - 1
    return float(tails[i])


def truncation_level(params: SpaceParams, p: float, tol: float = DEFAULT_TOL, cap: int = MAX_ELL) -> int:
    """Smallest degree ``L`` whose certified tail bound is below ``tol``.

    Raises
    ------
    NotRKHSError
        If ``p <= d/2``.
    ResourceError
        If ``L`` would exceed ``cap``; the message reports the tolerance that
        is achievable at the cap.
    """
    _check_rkhs(params, p)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    ells, tails = _tail_profile(params, p)
    ok = np.nonzero((tails < tol) & (ells <= cap))[0]
    if ok.size == 0:
        best = tails[np.searchsorted(ells, cap, side="right") - 1]
        raise ResourceError(
            f"tail below {tol:g} needs degree > {cap} on {params.label} with p = {p}; "
            f"achievable tol at the cap is {best:.3g}"
        )
    return int(ells[ok[0]])


@dataclass(frozen=True)
class ZonalKernel:
    """Truncated coefficient table of the zonal Green's kernel.

    Attributes
    ----------
    params : SpaceParams
    p : float
        Sobolev order.
    ell_max : int
        Truncation degree.
    ells : ndarray
        Degrees in the index set up to ``ell_max``.
    coeffs : ndarray
        ``kappa_l / (1 - lambda_l)^p`` per degree.
    tail_bound : float
        Certified bound on the truncation error of ``kernel_eval``.
    table : SpectralTable
    """

    params: SpaceParams
    p: float
    ell_max: int
    ells: np.ndarray
    coeffs: np.ndarray
    tail_bound: float
    table: SpectralTable

    @property
    def max_value(self) -> float:
        """``psi(1) = sum_l dim(Y_l) / (1 - lambda_l)^p`` (truncated)."""
        return float(np.sum(self.table.dims / (1.0 - self.table.lambdas) ** self.p))


def zonal_green(params: SpaceParams, p: float, ell_max: int | None = None, tol: float = DEFAULT_TOL) -> ZonalKernel:
    """Build the truncated zonal Green's kernel.

    When ``ell_max`` is omitted it is chosen by :func:`truncation_level` with
    ``tol``. Since ``psi(1) >= 1`` an absolute tolerance is also a relative one.
    """
    _check_rkhs(params, p)
    if ell_max is None:
        ell_max = truncation_level(params, p, tol)
    if ell_max < 0 or ell_max > MAX_ELL:
        raise ResourceError(f"ell_max must lie in [0, {MAX_ELL}], got {ell_max}")
    table = spectral_table(params, ell_max)
    coeffs = table.kappas / (1.0 - table.lambdas) ** p
    return ZonalKernel(
        params=params,
        p=float(p),
        ell_max=int(ell_max),
        ells=table.ells,
        coeffs=coeffs,
        tail_bound=tail_bound(params, p, ell_max),
        table=table,
    )


def kernel_eval(k: ZonalKernel, t):
    """``psi(t)`` for scalar or array ``t`` in [-1, 1]."""
    out = zonal_sum(k.params, k.coeffs, t, ells=k.ells)
    return out[()] if out.ndim == 0 else out


def kernel_matrix(k: ZonalKernel, X, Y=None) -> np.ndarray:
    """Pairwise ``psi(t(X_i, Y_j))``; ``Y`` defaults to ``X``."""
    if Y is None:
        Y = X
    return kernel_eval(k, cos_eps_rho_matrix(k.params, X, Y))


def product_kernel(k: ZonalKernel, u, v, u2, v2):
    """Tensor reproducing kernel ``psi(t(u, u2)) * psi(t(v, v2))``."""
    first = kernel_eval(k, cos_eps_rho(k.params, u, u2))
    second = kernel_eval(k, cos_eps_rho(k.params, v, v2))
    return first * second
