"""Binary persistence for trained embeddings.

Layout: magic ``GDEMB1\\n``, kind byte, dim / n_ent / n_rel as little-endian
uint32, matrix count byte, then per matrix a name (length byte + ascii),
dtype byte (0 = float32, 1 = uint32), row/col uint32 pair and the row-major
little-endian payload.  A JSON sidecar carries the originating config.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .config import ModelConfig, ModelKind
from .models import EmbeddingModel

_MAGIC = b"GDEMB1\n"
_KIND_CODES = {k: i for i, k in enumerate(ModelKind)}
_CODE_KINDS = {i: k for k, i in _KIND_CODES.items()}
WALK_KIND_CODE = 255  # entity table produced by the walk-based path


def _write_matrix(fh, name: str, mat: np.ndarray) -> None:
    data = mat.astype("<u4" if mat.dtype.kind in "iu" else "<f4")
    fh.write(struct.pack("<B", len(name)))
    fh.write(name.encode("ascii"))
    fh.write(struct.pack("<B", 1 if data.dtype.kind == "u" else 0))
    fh.write(struct.pack("<II", data.shape[0], data.shape[1]))
    fh.write(data.tobytes(order="C"))


def _read_matrix(fh) -> tuple[str, np.ndarray]:
    (name_len,) = struct.unpack("<B", fh.read(1))
    name = fh.read(name_len).decode("ascii")
    (dtype_code,) = struct.unpack("<B", fh.read(1))
    rows, cols = struct.unpack("<II", fh.read(8))
    dtype = "<u4" if dtype_code == 1 else "<f4"
    raw = fh.read(rows * cols * 4)
    return name, np.frombuffer(raw, dtype=dtype).reshape(rows, cols)


def save_model(model: EmbeddingModel, config: ModelConfig, path: str | Path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<B", _KIND_CODES[model.kind]))
        fh.write(struct.pack("<III", model.dim, model.num_entities, model.num_relations))
        mats = [("entities", model.entities), ("relations", model.relations)]
        mats += sorted(model.aux.items())
        fh.write(struct.pack("<B", len(mats)))
        for name, mat in mats:
            _write_matrix(fh, name, mat)
    sidecar = {k: (v.value if isinstance(v, ModelKind) else v) for k, v in asdict(config).items()}
    with open(path.with_suffix(path.suffix + ".json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ParseError(f"{path}: not an embedding file")
        (kind_code,) = struct.unpack("<B", fh.read(1))
        _dim, _n_ent, _n_rel = struct.unpack("<III", fh.read(12))
        (n_mats,) = struct.unpack("<B", fh.read(1))
        mats = dict(_read_matrix(fh) for _ in range(n_mats))
    entities = mats.pop("entities").astype(float)
    relations = mats.pop("relations").astype(float)
    aux = {k: v.astype(float) for k, v in mats.items()}
    return EmbeddingModel(kind=_CODE_KINDS[kind_code], entities=entities, relations=relations, aux=aux)


def save_entity_table(table: dict[int, np.ndarray], config_dict: dict, path: str | Path) -> None:
    """Persist a walk-based entity table (subset of entities, by id)."""
    path = Path(path)
    ids = np.array(sorted(table), dtype=np.uint32).reshape(-1, 1)
    vecs = np.stack([table[int(i)] for i in ids[:, 0]]) if len(ids) else np.zeros((0, 0))
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<B", WALK_KIND_CODE))
        dim = vecs.shape[1] if len(ids) else 0
        fh.write(struct.pack("<III", dim, len(ids), 0))
        fh.write(struct.pack("<B", 2))
        _write_matrix(fh, "ids", ids)
        _write_matrix(fh, "vectors", vecs)
    with open(path.with_suffix(path.suffix + ".json"), "w", encoding="utf-8") as fh:
        json.dump(config_dict, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_entity_table(path: str | Path) -> dict[int, np.ndarray]:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ParseError(f"{path}: not an embedding file")
        (kind_code,) = struct.unpack("<B", fh.read(1))
        if kind_code != WALK_KIND_CODE:
            raise ParseError(f"{path}: not an entity-table file")
        fh.read(12)
        (n_mats,) = struct.unpack("<B", fh.read(1))
        mats = dict(_read_matrix(fh) for _ in range(n_mats))
    ids = mats["ids"][:, 0]
    vecs = mats["vectors"].astype(float)
    return {int(i): vecs[k] for k, i in enumerate(ids)}
