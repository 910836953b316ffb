"""JSON forms of states, ensembles and reports.

Complex numbers are ``[re, im]`` pairs and matrices are flattened row-major.
A state file is ``{"dims": [...], "matrix": [[re, im], ...]}``; an ensemble
file is ``{"dims", "model", "weights", "terms": [{"components": [...]}]}``
where each component is a flattened matrix (general) or a vector (pure).
"""
import json
from dataclasses import asdict, dataclass, field
from math import prod

import numpy as np

from .errors import ArgumentError
from .herm import TOL_HERM, SystemShape, check_hermitian
from .mixing import GeneralEnsemble, PureEnsemble


def complex_to_pairs(a):
    a = np.asarray(a, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in a]


def pairs_to_complex(pairs, shape=None):
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ArgumentError("expected a list of [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ArgumentError("expected a list of [re, im] pairs")
    out = arr[:, 0] + 1j * arr[:, 1]
    if shape is not None:
        if out.size != prod(shape):
            raise ArgumentError(f"expected {prod(shape)} entries, got {out.size}")
        out = out.reshape(shape)
    return out


def state_to_dict(matrix, shape):
    return {"dims": list(shape.dims), "matrix": complex_to_pairs(matrix)}


def state_from_dict(data):
    if "matrix" not in data and "payload" in data:
        data = data["payload"].get("state", data["payload"])
    try:
        shape = SystemShape(tuple(data["dims"]))
        N = shape.N
        M = pairs_to_complex(data["matrix"], (N, N))
    except KeyError as exc:
        raise ArgumentError(f"state file missing field {exc}") from exc
    return check_hermitian(M, TOL_HERM, name="state"), shape


def ensemble_to_dict(ens):
    if isinstance(ens, PureEnsemble):
        terms = [{"components": [complex_to_pairs(v) for v in row]} for row in ens.vectors]
    else:
        terms = [{"components": [complex_to_pairs(A) for A in row]} for row in ens.components]
    return {
        "dims": list(ens.shape.dims),
        "model": ens.model,
        "weights": [float(w) for w in ens.weights],
        "terms": terms,
    }


def ensemble_from_dict(data):
    if "terms" not in data and "payload" in data:
        data = data["payload"]["ensemble"]
    try:
        shape = SystemShape(tuple(data["dims"]))
        model = data.get("model", "general")
        weights = np.asarray(data["weights"], dtype=float)
        terms = data["terms"]
    except KeyError as exc:
        raise ArgumentError(f"ensemble file missing field {exc}") from exc
    rows = []
    for term in terms:
        comps = term["components"]
        if len(comps) != shape.p:
            raise ArgumentError("term has the wrong number of components")
        if model == "pure":
            rows.append([pairs_to_complex(c, (n,)) for c, n in zip(comps, shape.dims)])
        else:
            rows.append([pairs_to_complex(c, (n, n)) for c, n in zip(comps, shape.dims)])
    if model == "pure":
        ens = PureEnsemble(shape, weights, rows)
    elif model == "general":
        ens = GeneralEnsemble(shape, weights, rows)
    else:
        raise ArgumentError(f"unknown model {model!r}")
    return ens.validate()


@dataclass
class Report:
    command: str
    parameters: dict
    seed: int | None
    version: str
    payload: dict
    wall_time: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        if d["wall_time"] is None:
            del d["wall_time"]
        if not d["extra"]:
            del d["extra"]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            command=d["command"],
            parameters=d["parameters"],
            seed=d.get("seed"),
            version=d["version"],
            payload=d["payload"],
            wall_time=d.get("wall_time"),
            extra=d.get("extra", {}),
        )


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
