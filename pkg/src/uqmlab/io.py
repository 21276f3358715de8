"""JSON and CSV formats for states, maps, experiments and samples.

State::

    {"dim": n, "matrix": [[[re, im], ...], ...]}      # row-major n x n

Map::

    {"dim": n, "kraus": [matrix, ...]}   or   {"dim": n, "choi": matrix}

where ``matrix`` is the nested ``[[[re, im], ...], ...]`` list. Experiment::

    {"outcomes": [label, ...], "transforms": [map, ...]}

Floats are written with Python's shortest round-trip repr, so values survive
a write/read cycle bit for bit. States of coherent measurements use the
symmetric basis ordered by nondecreasing multi-index (see
:mod:`uqmlab.coherent`).
"""

import csv
import json

import numpy as np

from . import qstate
from .errors import UQMError
from .experiment import DiscreteExperiment


class FormatError(UQMError):
    """A file does not follow the documented schema."""


def matrix_to_json(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(data):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise FormatError(f"matrix must be nested rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def vector_to_json(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _read_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def state_to_json(rho):
    rho = np.asarray(rho, dtype=complex)
    return {"dim": int(rho.shape[0]), "matrix": matrix_to_json(rho)}


def state_from_json(obj, tol=qstate.TOL_HERM):
    if not isinstance(obj, dict) or "matrix" not in obj or "dim" not in obj:
        raise FormatError('state must be an object with "dim" and "matrix"')
    M = matrix_from_json(obj["matrix"])
    if M.shape != (obj["dim"], obj["dim"]):
        raise FormatError(f'declared dim {obj["dim"]} does not match matrix shape {M.shape}')
    return qstate.make_density(M, tol)


def save_state(rho, path):
    write_json(state_to_json(rho), path)


def load_state(path, tol=qstate.TOL_HERM):
    return state_from_json(_read_json(path), tol)


def map_to_json(phi, kind="kraus"):
    phi = np.asarray(phi, dtype=complex)
    if kind == "kraus":
        if phi.ndim == 2:
            phi = phi[None]
        return {"dim": int(phi.shape[1]), "kraus": [matrix_to_json(K) for K in phi]}
    if kind == "choi":
        return {"dim": int(round(np.sqrt(phi.shape[0]))), "choi": matrix_to_json(phi)}
    raise ValueError(f"unknown map kind {kind!r}")


def map_from_json(obj):
    """Return ``("kraus", (N, n, n) array)`` or ``("choi", (n^2, n^2) array)``."""
    if not isinstance(obj, dict) or "dim" not in obj:
        raise FormatError('map must be an object with "dim" and "kraus" or "choi"')
    n = obj["dim"]
    if not isinstance(n, int) or n < 1:
        raise FormatError(f"map dim must be a positive integer, got {n!r}")
    if "kraus" in obj:
        if not obj["kraus"]:
            raise FormatError("kraus list is empty")
        K = np.array([matrix_from_json(m) for m in obj["kraus"]])
        if K.shape[1:] != (n, n):
            raise FormatError(f"Kraus operators have shape {K.shape[1:]}, expected ({n}, {n})")
        return "kraus", K
    if "choi" in obj:
        C = matrix_from_json(obj["choi"])
        if C.shape != (n * n, n * n):
            raise FormatError(f"Choi matrix has shape {C.shape}, expected ({n * n}, {n * n})")
        return "choi", C
    raise FormatError('map needs a "kraus" or "choi" entry')


def save_map(phi, path, kind="kraus"):
    write_json(map_to_json(phi, kind), path)


def load_map(path):
    return map_from_json(_read_json(path))


def experiment_to_json(exp):
    transforms = []
    for K, C in zip(exp.kraus, exp.chois):
        transforms.append(map_to_json(K, "kraus") if K is not None else map_to_json(C, "choi"))
    return {"outcomes": list(exp.labels), "transforms": transforms}


def experiment_from_json(obj):
    if not isinstance(obj, dict) or "outcomes" not in obj or "transforms" not in obj:
        raise FormatError('experiment must be an object with "outcomes" and "transforms"')
    maps = [map_from_json(t)[1] for t in obj["transforms"]]
    return DiscreteExperiment(obj["outcomes"], maps)


def load_experiment(path):
    return experiment_from_json(_read_json(path))


def save_experiment(exp, path):
    write_json(experiment_to_json(exp), path)


def load_json(path):
    return _read_json(path)


def write_samples_csv(path, points, densities, factor_dims=None, start_index=0):
    """One row per sample: trial index, interleaved (re, im) vector components, density.

    With `factor_dims` the columns are grouped per factor
    (``f0_re0, f0_im0, ..., f1_re0, ...``).
    """
    points = np.asarray(points, dtype=complex)
    if factor_dims is None:
        groups = [("", points.shape[1])]
    else:
        groups = [(f"f{i}_", d) for i, d in enumerate(factor_dims)]
    header = ["trial_index"]
    for prefix, d in groups:
        for k in range(d):
            header += [f"{prefix}re{k}", f"{prefix}im{k}"]
    header.append("density")
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for i, (z, dens) in enumerate(zip(points, densities)):
            row = [start_index + i]
            for c in z:
                row += [repr(float(c.real)), repr(float(c.imag))]
            row.append(repr(float(dens)))
            wr.writerow(row)


def read_samples_csv(path):
    """Inverse of :func:`write_samples_csv`; returns ``(trial_index, points, densities)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float)
    if data.size == 0:
        return np.zeros(0, dtype=int), np.zeros((0, (len(rows[0]) - 2) // 2), dtype=complex), np.zeros(0)
    vals = data[:, 1:-1]
    return data[:, 0].astype(int), vals[:, 0::2] + 1j * vals[:, 1::2], data[:, -1]
