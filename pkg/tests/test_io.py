import json

import pytest

from falqon_factor.encoder import catalog_hamiltonian, load_catalog
from falqon_factor.io import (
    SchemaError,
    dumps,
    hamiltonian_digest,
    load_json_validated,
    manifest,
    paulisum_document,
    read_zpoly,
    validate,
    zpoly_document,
)
from falqon_factor.pauli import PauliSum, commutator_with_drive
from falqon_factor.runner import resolve_config


def test_zpoly_document_round_trip(tmp_path):
    h, rule = catalog_hamiltonian(9167, "truncated")
    doc = zpoly_document(h, n=9167, variant="truncated", decoding=rule.to_json())
    validate(doc, "hamiltonian")
    path = tmp_path / "h.json"
    path.write_text(dumps(doc))
    assert read_zpoly(path) == h


def test_paulisum_document_is_not_a_zpoly(tmp_path):
    h, _ = catalog_hamiltonian(551)
    c = commutator_with_drive(h)
    doc = paulisum_document(c)
    validate(doc, "hamiltonian")
    assert PauliSum.from_json(doc) == c
    path = tmp_path / "c.json"
    path.write_text(dumps(doc))
    with pytest.raises(SchemaError, match="Z-polynomial"):
        read_zpoly(path)


def test_bad_json_is_a_schema_error(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{nope")
    with pytest.raises(SchemaError, match="not valid JSON"):
        load_json_validated(path, "hamiltonian")
    path.write_text(json.dumps({"format": "falqon-factor-zpoly", "version": 2, "n_qubits": 1, "terms": []}))
    with pytest.raises(SchemaError, match="version"):
        load_json_validated(path, "hamiltonian")


def test_catalog_schema_rejects_malformed_files(tmp_path):
    path = tmp_path / "cat.json"
    path.write_text("{}")
    with pytest.raises(SchemaError):
        load_catalog(path)


def test_config_rejects_unknown_keys():
    with pytest.raises(SchemaError, match="Additional properties"):
        resolve_config({"falqon": {"gain": 1.0}})
    with pytest.raises(SchemaError):
        resolve_config({"instance": {"n": "551"}})


def test_resolved_config_is_a_fixed_point():
    cfg = resolve_config({"instance": {"n": 9167, "variant": "truncated"}}, "sweep-noise")
    assert resolve_config(cfg) == cfg
    assert cfg["seeds"] == list(range(20)) and cfg["falqon"]["max_iters"] == 22


def test_digest_and_manifest_are_stable():
    h, _ = catalog_hamiltonian(551)
    assert hamiltonian_digest(h) == hamiltonian_digest(h.scaled(1.0))
    assert len(hamiltonian_digest(h)) == 16
    m = manifest("factor", {"a": 1}, {"f.csv": "00"}, rows=3)
    assert m["artifact"] == "factor" and m["rows"] == 3 and "generated_at" in m["metadata"]
    assert dumps({"b": 1, "a": 2}).startswith('{\n  "a": 2')
