"""Ground-truth covariance models and noisy replicate simulation.

The models are built from zonal objects only, so every space with a point
model gets an exact closed-form covariance:

    C(u, v) = sum_l b_l kappa_l P_l(t(u, v))
              + sum_s sigma_s^2 f_s(u) f_s(v),
    f_s(u)  = sum_l gamma_{s,l} kappa_l P_l(t(u, a_s)).

The first part is isotropic; each rank-one bump centred at an anchor ``a_s``
makes the model anisotropic. Fields are Gaussian.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError, ParameterError, SmoothnessError, SpaceMismatchError
from .estimator import Dataset
from .spaces import SpaceParams, as_rng, cos_eps_rho, cos_eps_rho_matrix, sample_uniform, space_params
from .spectral import SpectralTable, spectral_table, zonal_sum

__all__ = [
    "AnisoComponent",
    "CovModel",
    "NoiseSpec",
    "default_model",
    "true_cov",
    "true_cov_matrix",
    "bump_values",
    "sobolev_diagnostics",
    "sample_field",
    "observe",
    "sample_dataset",
]

PSD_FLOOR = 1e-10


@dataclass(frozen=True)
class AnisoComponent:
    anchor: np.ndarray
    gamma: np.ndarray
    sigma: float = 1.0


@dataclass(frozen=True)
class CovModel:
    """Closed-form covariance with isotropic and finite-rank anisotropic parts.

    ``iso`` and every ``gamma`` are indexed like ``table.ells`` (the index set
    of the space truncated at ``ell_max``).
    """

    space: SpaceParams
    iso: np.ndarray
    aniso: tuple = ()
    q: float | None = None
    table: SpectralTable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        iso = np.asarray(self.iso, dtype=float)
        if np.any(iso < 0):
            raise ModelError("isotropic coefficients must be non-negative")
        comps = []
        for c in self.aniso:
            gamma = np.asarray(c.gamma, dtype=float)
            if gamma.shape != iso.shape:
                raise ModelError("every gamma must have the same length as iso")
            if c.sigma < 0:
                raise ModelError("sigma must be non-negative")
            anchor = np.asarray(c.anchor, dtype=float)
            if self.space.supports_points:
                if anchor.shape != (self.space.ambient_dim,):
                    raise SpaceMismatchError("anchor does not belong to the model space")
                anchor = anchor / np.linalg.norm(anchor)
            comps.append(AnisoComponent(anchor=anchor, gamma=gamma, sigma=float(c.sigma)))
        object.__setattr__(self, "iso", iso)
        object.__setattr__(self, "aniso", tuple(comps))
        ell_max = (iso.size - 1) * self.space.ell_stride
        object.__setattr__(self, "table", spectral_table(self.space, ell_max))

    @property
    def ell_max(self) -> int:
        return self.table.ell_max


@dataclass(frozen=True)
class NoiseSpec:
    """I.i.d. measurement error of variance ``sigma2``."""

    sigma2: float
    law: str = "gaussian"

    def __post_init__(self):
        if not (0 <= self.sigma2 < np.inf):
            raise ParameterError(f"noise variance must be finite and non-negative, got {self.sigma2}")
        if self.law != "gaussian":
            raise ParameterError(f"unsupported noise law {self.law!r}")


def default_model(
    space: SpaceParams | None = None,
    s: float = 4.0,
    ell_max: int = 30,
    sigmas: Sequence[float] = (1.0, 1.0),
    anchors=None,
    q: float | None = 2.5,
) -> CovModel:
    """Isotropic part ``b_l = (1 - lambda_l)^-s`` plus one bump per ``sigmas`` entry.

    Bumps share the profile ``gamma_l = (1 - lambda_l)^-s``. Without explicit
    anchors the bumps sit at the first two coordinate points ``e_0`` and
    ``e_f`` (``f`` the field dimension), which are distinct on every space.
    On S^2 this is ``b_l = (1 + l(l + 1))^-s``.
    """
    space = space_params("sphere", 2) if space is None else space
    table = spectral_table(space, ell_max)
    b = (1.0 - table.lambdas) ** (-float(s))
    if anchors is None:
        D = space.ambient_dim
        f = space.field_dim
        anchors = [np.eye(D)[(i * f) % D] for i in range(len(sigmas))]
    if len(anchors) != len(sigmas):
        raise ParameterError("need one anchor per bump amplitude")
    comps = tuple(AnisoComponent(anchor=a, gamma=b.copy(), sigma=sg) for a, sg in zip(anchors, sigmas))
    return CovModel(space=space, iso=b, aniso=comps, q=q)


def _check(model: CovModel, *arrays) -> None:
    D = model.space.ambient_dim
    for a in arrays:
        if np.shape(a)[-1:] != (D,):
            raise SpaceMismatchError(f"points do not belong to {model.space.label}")


def bump_values(model: CovModel, comp: AnisoComponent, u) -> np.ndarray:
    """``f_s(u)`` for one anisotropic component."""
    t = cos_eps_rho(model.space, u, comp.anchor)
    return zonal_sum(model.space, comp.gamma * model.table.kappas, t, ells=model.table.ells)


def true_cov(model: CovModel, u, v):
    """Model covariance at broadcastable point arrays ``u`` and ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check(model, u, v)
    tab = model.table
    out = zonal_sum(model.space, model.iso * tab.kappas, cos_eps_rho(model.space, u, v), ells=tab.ells)
    for c in model.aniso:
        out = out + c.sigma**2 * bump_values(model, c, u) * bump_values(model, c, v)
    return out[()] if np.ndim(out) == 0 else out


def true_cov_matrix(model: CovModel, U, V=None) -> np.ndarray:
    """``[C(U_i, V_j)]``; ``V`` defaults to ``U``."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    V = U if V is None else np.atleast_2d(np.asarray(V, dtype=float))
    _check(model, U, V)
    tab = model.table
    out = zonal_sum(model.space, model.iso * tab.kappas, cos_eps_rho_matrix(model.space, U, V), ells=tab.ells)
    for c in model.aniso:
        out += c.sigma**2 * np.outer(bump_values(model, c, U), bump_values(model, c, V))
    return out


def sobolev_diagnostics(model: CovModel, q: float, p: float) -> tuple[float, float]:
    """``(E ||X||^2_{H_q}, ||C||^2_{H_p (x) H_p})`` computed from spectral coefficients.

    For a Gaussian field a finite second Sobolev moment also bounds the fourth,
    so only the second is computed.
    """
    sp = model.space
    if not q > sp.d / 2:
        raise SmoothnessError(f"q must exceed d/2 = {sp.d / 2}, got {q}")
    tab = model.table
    one_minus = 1.0 - tab.lambdas
    b = model.iso
    comps = model.aniso

    field = float(np.sum(one_minus**q * b * tab.dims))
    field += sum(c.sigma**2 * float(np.sum(one_minus**q * c.gamma**2 * tab.dims)) for c in comps)

    norm = float(np.sum(one_minus ** (2 * p) * b**2 * tab.dims))
    for c in comps:
        norm += 2.0 * c.sigma**2 * float(np.sum(one_minus ** (2 * p) * b * c.gamma**2 * tab.dims))
    if comps:
        # inner products of the weighted bump coefficient vectors via the addition formula
        anchors = np.stack([c.anchor for c in comps])
        t = cos_eps_rho_matrix(sp, anchors, anchors)
        for i, ci in enumerate(comps):
            for j, cj in enumerate(comps):
                g = one_minus**p * ci.gamma * cj.gamma * tab.kappas
                ip = float(zonal_sum(sp, g, t[i, j], ells=tab.ells))
                norm += ci.sigma**2 * cj.sigma**2 * ip**2
    return field, norm


def sample_field(model: CovModel, locations, rng=None, size: int | None = None) -> np.ndarray:
    """Zero-mean Gaussian draws of the field at ``locations`` (r, D).

    With ``size`` given, returns ``size`` independent replicates as rows of a
    ``(size, r)`` array, sharing one factorization of the covariance matrix.

    Raises
    ------
    ModelError
        If the covariance matrix has an eigenvalue below ``-1e-8 * trace``.
    """
    rng = as_rng(rng)
    S = true_cov_matrix(model, locations)
    S = 0.5 * (S + S.T)
    vals, vecs = np.linalg.eigh(S)
    scale = max(float(np.trace(S)), 1.0)
    if vals.min() < -1e-8 * scale:
        raise ModelError(f"covariance matrix is not positive semidefinite (eigenvalue {vals.min():.3g})")
    vals = np.where(vals > PSD_FLOOR * scale, vals, 0.0)
    root = vecs * np.sqrt(vals)
    if size is None:
        return root @ rng.standard_normal(vals.size)
    return rng.standard_normal((int(size), vals.size)) @ root.T


def observe(model: CovModel, locations, noise: NoiseSpec, rng=None, size: int | None = None) -> np.ndarray:
    """Noisy measurements ``X(U_j) + e_j``; ``size`` stacks independent replicates as rows."""
    rng = as_rng(rng)
    x = sample_field(model, locations, rng, size)
    return x + np.sqrt(noise.sigma2) * rng.standard_normal(x.shape)


def _streams(rng, count: int) -> list[np.random.Generator]:
    if isinstance(rng, np.random.Generator):
        return rng.spawn(count)
    ss = rng if isinstance(rng, np.random.SeedSequence) else np.random.SeedSequence(rng)
    return [np.random.default_rng(child) for child in ss.spawn(count)]


def sample_dataset(model: CovModel, n: int, r, noise: NoiseSpec, rng=None) -> Dataset:
    """Simulate ``n`` replicates observed at ``r`` uniform locations each.

    ``r`` is a single count or one count per subject. Each subject draws its
    locations, field and noise from its own child stream of ``rng``.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    r_list = [int(r)] * n if np.ndim(r) == 0 else [int(x) for x in r]
    if len(r_list) != n:
        raise ParameterError(f"got {len(r_list)} location counts for {n} subjects")
    if min(r_list) < 2:
        raise ParameterError("every subject needs at least two locations")
    locs, vals = [], []
    for ri, g in zip(r_list, _streams(rng, n)):
        U = sample_uniform(model.space, ri, g)
        locs.append(U)
        vals.append(observe(model, U, noise, g))
    return Dataset(space=model.space, locations=tuple(locs), values=tuple(vals))
