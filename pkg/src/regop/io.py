"""File formats and report documents.

Matrices travel as JSON text with fields ``rows``, ``cols`` and ``data``
(row-major list of [re, im] pairs); floats are serialized with Python's
shortest round-trip repr, so any value representable in 17 significant
digits survives a write/read cycle exactly.  Block matrices, linear maps,
pairing tensors and subspace problems wrap the same matrix document.

Reports are JSON documents with a schema version field; every numeric
result is printed with 12 significant digits, and serialization is fully
deterministic (sorted keys, fixed separators), so identical inputs produce
byte-identical reports.
"""

from __future__ import annotations

import json

import numpy as np

from .linalg import BlockMatrix, PExp
from .cpmaps import LinearMap
from .rho import PairingElement

SCHEMA = "regop-report/1"


class FileFormatError(ValueError):
    """Malformed input document; the message carries the field location."""


def _require(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise FileFormatError(f"{where}: missing field {key!r}")
    return doc[key]


def matrix_doc(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(v.real), float(v.imag)] for v in m.ravel()],
    }


def matrix_from_doc(doc, where="matrix") -> np.ndarray:
    rows = _require(doc, "rows", where)
    cols = _require(doc, "cols", where)
    data = _require(doc, "data", where)
    if not isinstance(rows, int) or not isinstance(cols, int) or rows <= 0 or cols <= 0:
        raise FileFormatError(f"{where}: rows/cols must be positive integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise FileFormatError(
            f"{where}.data: expected {rows * cols} entries, got "
            f"{len(data) if isinstance(data, list) else type(data).__name__}")
    out = np.empty(rows * cols, dtype=complex)
    for k, pair in enumerate(data):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)):
            raise FileFormatError(f"{where}.data[{k}]: expected [re, im] pair")
        out[k] = complex(pair[0], pair[1])
    return out.reshape(rows, cols)


def block_doc(x: BlockMatrix) -> dict:
    d = matrix_doc(x.body)
    d.update(outer_dim=x.outer_dim, inner_dim=x.inner_dim,
             factor_order=x.factor_order)
    return d


def block_from_doc(doc, where="block") -> BlockMatrix:
    body = matrix_from_doc(doc, where)
    outer = _require(doc, "outer_dim", where)
    inner = _require(doc, "inner_dim", where)
    order = doc.get("factor_order", "outer-inner")
    try:
        return BlockMatrix(int(outer), int(inner), body, order)
    except Exception as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def map_doc(u: LinearMap) -> dict:
    return {"in_dim": u.in_dim, "out_dim": u.out_dim, "choi": matrix_doc(u.choi)}


def map_from_doc(doc, where="map") -> LinearMap:
    n = _require(doc, "in_dim", where)
    m = _require(doc, "out_dim", where)
    choi = matrix_from_doc(_require(doc, "choi", where), where + ".choi")
    try:
        return LinearMap(int(n), int(m), choi)
    except Exception as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def pairing_doc(a: PairingElement) -> dict:
    return {"n": a.n, "m": a.m, "p": str(a.p), "block": block_doc(a.block)}


def pairing_from_doc(doc, where="pairing") -> PairingElement:
    n = _require(doc, "n", where)
    m = _require(doc, "m", where)
    p = _require(doc, "p", where)
    blk = block_from_doc(_require(doc, "block", where), where + ".block")
    try:
        return PairingElement(int(n), int(m), PExp.parse(p), blk)
    except Exception as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def subspace_doc(ambient: int, basis, images) -> dict:
    return {
        "ambient": int(ambient),
        "basis": [matrix_doc(b) for b in basis],
        "images": [matrix_doc(v) for v in images],
    }


def subspace_from_doc(doc, where="subspace"):
    ambient = _require(doc, "ambient", where)
    basis = _require(doc, "basis", where)
    images = _require(doc, "images", where)
    if not isinstance(basis, list) or not basis:
        raise FileFormatError(f"{where}.basis: need a nonempty list")
    if not isinstance(images, list) or len(images) != len(basis):
        raise FileFormatError(f"{where}.images: need one image per basis matrix")
    mats = [matrix_from_doc(b, f"{where}.basis[{k}]") for k, b in enumerate(basis)]
    imgs = [matrix_from_doc(v, f"{where}.images[{k}]") for k, v in enumerate(images)]
    return int(ambient), mats, imgs


def load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def save(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


# -- reports ----------------------------------------------------------------

def fmt(value) -> str:
    """12-significant-digit rendering used for every number in a report."""
    if isinstance(value, complex):
        return f"{value.real:.12g}{value.imag:+.12g}j"
    return f"{float(value):.12g}"


def report_doc(command: str, result: dict, inputs: dict | None = None) -> dict:
    doc = {"schema": SCHEMA, "command": command, "result": result}
    if inputs:
        doc["inputs"] = inputs
    return doc


def render_report(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
