"""JSON wire formats for matrices, tuples, models, pencils and certificates.

Matrices are stored as separate real and imaginary row-major arrays.  Floats
go through the standard shortest round-trip representation, which is lossless
for float64 and byte-deterministic, so serialized reports diff cleanly.
Canonical dumps sort keys.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .extreme import (
    DilationCertificate,
    EscapeRow,
    RefutationCertificate,
    RefutationReasons,
)
from .hull import HullPoint
from .linalg import SelfAdjointTuple
from .model import CompactTupleModel, FiniteInteriorWitness
from .pencils import LinearPencil

__all__ = [
    "dumps_canonical",
    "matrix_to_json",
    "matrix_from_json",
    "tuple_to_json",
    "tuple_from_json",
    "vector_to_json",
    "vector_from_json",
    "model_to_json",
    "model_from_json",
    "witness_to_json",
    "witness_from_json",
    "pencil_to_json",
    "pencil_from_json",
    "hull_point_to_json",
    "hull_point_from_json",
    "dilation_to_json",
    "refutation_to_json",
    "refutation_from_json",
    "escape_row_to_json",
]


def dumps_canonical(obj) -> str:
    """Deterministic single-line JSON with sorted keys."""
    return json.dumps(obj, sort_keys=True)


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "re": [[float(x) for x in row] for row in m.real],
        "im": [[float(x) for x in row] for row in m.imag],
    }


def matrix_from_json(data: dict) -> np.ndarray:
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    if re.shape != im.shape:
        raise ValueError("re and im blocks have different shapes")
    return re + 1j * im


def vector_to_json(v: np.ndarray) -> dict:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return {
        "re": [float(x) for x in v.real],
        "im": [float(x) for x in v.imag],
    }


def vector_from_json(data: dict) -> np.ndarray:
    return np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)


def tuple_to_json(t: SelfAdjointTuple) -> dict:
    return {
        "g": t.g,
        "dim": t.dim,
        "matrices": [matrix_to_json(m) for m in t],
    }


def tuple_from_json(data: dict) -> SelfAdjointTuple:
    t = SelfAdjointTuple(tuple(matrix_from_json(m) for m in data["matrices"]))
    if t.g != data["g"] or t.dim != data["dim"]:
        raise ValueError("tuple payload is inconsistent with its declared shape")
    return t


def model_to_json(model: CompactTupleModel) -> dict:
    out = {
        "kind": model.kind,
        "g": model.g,
        "lambda": list(model.lam),
        "w": list(model.w),
        "alpha": list(model.alpha) if model.alpha is not None else None,
        "max_level": model.max_level,
    }
    if model.kind == "custom_sequence":
        out["sequences"] = [list(s) for s in model.sequences]
    return out


def model_from_json(data: dict) -> CompactTupleModel:
    model = CompactTupleModel(
        kind=data["kind"],
        max_level=data["max_level"],
        lam=tuple(data.get("lambda") or ()),
        w=tuple(data.get("w") or ()),
        alpha=tuple(data["alpha"]) if data.get("alpha") is not None else None,
        sequences=tuple(tuple(s) for s in data.get("sequences") or ()),
    )
    if model.g != data["g"]:
        raise ValueError("model payload is inconsistent with its declared g")
    return model


def witness_to_json(w: FiniteInteriorWitness) -> dict:
    return {
        "d": w.d,
        "level": w.level,
        "vector": vector_to_json(w.vector),
        "residual": w.residual,
    }


def witness_from_json(data: dict) -> FiniteInteriorWitness:
    return FiniteInteriorWitness(
        d=data["d"],
        level=data["level"],
        vector=vector_from_json(data["vector"]),
        residual=data["residual"],
    )


def pencil_to_json(p: LinearPencil) -> dict:
    return {
        "g": p.g,
        "d": p.d,
        "A0": matrix_to_json(p.A0),
        "A": [matrix_to_json(a) for a in p.A],
        "monic": p.monic,
        "symmetric": p.symmetric,
    }


def pencil_from_json(data: dict) -> LinearPencil:
    p = LinearPencil(
        matrix_from_json(data["A0"]),
        tuple(matrix_from_json(a) for a in data["A"]),
    )
    if p.g != data["g"] or p.d != data["d"]:
        raise ValueError("pencil payload is inconsistent with its declared shape")
    if p.monic != data["monic"] or p.symmetric != data["symmetric"]:
        raise ValueError("pencil flags do not match the coefficient data")
    return p


def hull_point_to_json(point: HullPoint, include_model: bool = True) -> dict:
    out = tuple_to_json(point.Y)
    out.update(
        {
            "level": point.level,
            "multiplicity": point.multiplicity,
            "V": matrix_to_json(point.V),
            "witness_residual": point.witness_residual,
        }
    )
    if point.weakly_proper is not None:
        out["weakly_proper"] = point.weakly_proper
    if include_model:
        out["model"] = model_to_json(point.model)
    return out


def hull_point_from_json(data: dict, model: CompactTupleModel | None = None) -> HullPoint:
    if model is None:
        if "model" not in data:
            raise ValueError("payload has no embedded model; pass one explicitly")
        model = model_from_json(data["model"])
    return HullPoint(
        model=model,
        Y=tuple_from_json(data),
        level=data["level"],
        multiplicity=data["multiplicity"],
        V=matrix_from_json(data["V"]),
        witness_residual=data["witness_residual"],
        weakly_proper=data.get("weakly_proper"),
    )


def dilation_to_json(cert: DilationCertificate) -> dict:
    return {
        "point": hull_point_to_json(cert.point),
        "dilation": tuple_to_json(cert.dilation),
        "U": matrix_to_json(cert.U),
        "compression_residual": cert.compression_residual,
        "equivalence_to_ambient": cert.equivalence_to_ambient,
    }


def refutation_to_json(cert: RefutationCertificate) -> dict:
    reasons = asdict(cert.reasons)
    reasons["base_block_dims"] = list(cert.reasons.base_block_dims)
    if cert.reasons.ambient_block_dims is not None:
        reasons["ambient_block_dims"] = list(cert.reasons.ambient_block_dims)
    return {
        "point": hull_point_to_json(cert.point),
        "verdict": cert.verdict,
        "reasons": reasons,
    }


def refutation_from_json(data: dict) -> RefutationCertificate:
    r = dict(data["reasons"])
    r["base_block_dims"] = tuple(r["base_block_dims"])
    if r.get("ambient_block_dims") is not None:
        r["ambient_block_dims"] = tuple(r["ambient_block_dims"])
    return RefutationCertificate(
        point=hull_point_from_json(data["point"]),
        verdict=data["verdict"],
        reasons=RefutationReasons(**r),
    )


def escape_row_to_json(row: EscapeRow) -> dict:
    return {
        "level": row.level,
        "seed": row.seed,
        "verdict": row.verdict,
        "min_reducing_dim": row.min_reducing_dim,
    }
