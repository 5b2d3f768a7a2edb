"""JSON and CSV file formats.

Dataset file::

    {"space": {"kind": "sphere", "d": 2},
     "subjects": [{"locations": [[x, y, z], ...], "values": [w, ...]}, ...]}

Estimate file::

    {"space": {...}, "p": 3.0, "ell_max": 84, "eta": 0.02,
     "points": [[...], ...],            # all measured locations
     "anchors": [[first, second], ...],  # row indices into points
     "coeffs": [...]}

Model config (``simulate``)::

    {"space": {...}, "model": {"s": 4, "ell_max": 30, "sigmas": [1, 1],
     "anchors": null, "q": 2.5}, "noise": {"sigma2": 0.25},
     "n": 50, "r": 5 | "r_list": [...], "seed": 0}
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .estimator import CovEstimate, Dataset
from .kernel import zonal_green
from .spaces import space_params
from .spectral import SpectralTable

__all__ = [
    "read_json",
    "write_json",
    "dataset_to_dict",
    "dataset_from_dict",
    "estimate_to_dict",
    "estimate_from_dict",
    "spectral_csv",
    "kernel_csv",
    "grid_csv",
]


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read JSON from {path}: {exc}") from exc


def write_json(obj, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def _space_from(d: dict):
    try:
        return space_params(d["kind"], d["d"])
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"space entry needs 'kind' and 'd': {d!r}") from exc


def dataset_to_dict(data: Dataset) -> dict:
    return {
        "space": data.space.to_dict(),
        "subjects": [
            {"locations": x.tolist(), "values": w.tolist()}
            for x, w in zip(data.locations, data.values)
        ],
    }


def dataset_from_dict(d: dict) -> Dataset:
    try:
        space = _space_from(d["space"])
        subjects = d["subjects"]
        return Dataset(
            space=space,
            locations=tuple(np.asarray(s["locations"], dtype=float) for s in subjects),
            values=tuple(np.asarray(s["values"], dtype=float) for s in subjects),
        )
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"malformed dataset: {exc}") from exc


def estimate_to_dict(est: CovEstimate) -> dict:
    return {
        "space": est.space.to_dict(),
        "p": est.kernel.p,
        "ell_max": est.kernel.ell_max,
        "eta": est.eta,
        "points": est.points.tolist(),
        "anchors": np.column_stack([est.first_idx, est.second_idx]).tolist(),
        "coeffs": est.coeffs.tolist(),
    }


def estimate_from_dict(d: dict) -> CovEstimate:
    try:
        space = _space_from(d["space"])
        anchors = np.asarray(d["anchors"], dtype=int).reshape(-1, 2)
        return CovEstimate(
            kernel=zonal_green(space, float(d["p"]), ell_max=int(d["ell_max"])),
            points=np.asarray(d["points"], dtype=float),
            first_idx=anchors[:, 0],
            second_idx=anchors[:, 1],
            coeffs=np.asarray(d["coeffs"], dtype=float),
            eta=float(d["eta"]),
        )
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"malformed estimate: {exc}") from exc


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _g(x) -> str:
    return format(float(x), ".17g")


def spectral_csv(table: SpectralTable) -> str:
    """Columns ``ell, lambda, dim, kappa``."""
    rows = (
        (int(l), _g(lam), _g(round(dim)) if dim < 2**53 else _g(dim), _g(kap))
        for l, lam, dim, kap in zip(table.ells, table.lambdas, table.dims, table.kappas)
    )
    return _csv(["ell", "lambda", "dim", "kappa"], rows)


def kernel_csv(t, psi) -> str:
    """Columns ``t, psi``."""
    return _csv(["t", "psi"], ((_g(a), _g(b)) for a, b in zip(t, psi)))


def grid_csv(values: np.ndarray) -> str:
    """Columns ``u_index, v_index, value`` for a square or rectangular grid."""
    rows = (
        (i, j, _g(values[i, j]))
        for i in range(values.shape[0])
        for j in range(values.shape[1])
    )
    return _csv(["u_index", "v_index", "value"], rows)
