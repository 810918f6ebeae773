"""File formats: schema-checked JSON inputs, CSV trajectories, run manifests."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .pauli import PauliSum, ZPolynomial


class SchemaError(ValueError):
    """A JSON input does not match its schema."""


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    text = resources.files("falqon_factor").joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def validate(data, name: str) -> None:
    try:
        jsonschema.validate(data, schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{name}: {where}: {exc.message}") from None


def load_json_validated(path, name: str):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    validate(data, name)
    return data


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def zpoly_document(h: ZPolynomial, **extra) -> dict:
    return {"format": "falqon-factor-zpoly", "version": 1, **h.to_json(), **extra}


def paulisum_document(c: PauliSum, **extra) -> dict:
    return {"format": "falqon-factor-paulisum", "version": 1, **c.to_json(), **extra}


def read_zpoly(path) -> ZPolynomial:
    data = load_json_validated(path, "hamiltonian")
    if data["format"] != "falqon-factor-zpoly":
        raise SchemaError(f"{path}: expected a Z-polynomial term list")
    return ZPolynomial.from_json(data)


def hamiltonian_digest(h: ZPolynomial) -> str:
    return hashlib.sha256(json.dumps(h.to_json(), sort_keys=True).encode()).hexdigest()[:16]


def manifest(kind: str, config: dict, data_files: dict, **extra) -> dict:
    from . import __version__

    return {
        "artifact": kind,
        "library_version": __version__,
        "config": config,
        "data_files": data_files,
        **extra,
        "metadata": {"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")},
    }


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
