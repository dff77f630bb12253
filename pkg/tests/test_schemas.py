from __future__ import annotations

import importlib.util
import json
from pathlib import Path
from typing import Any

import pytest
from conftest import DATA, two_clusters
from typer.testing import CliRunner

from adaptdim.cli import app
from adaptdim.ingest import write_points

ROOT = Path(__file__).resolve().parents[1]
SCHEMA_DIR = ROOT / "schemas"

_spec = importlib.util.spec_from_file_location(
    "generate_schemas", ROOT / "scripts" / "generate_schemas.py"
)
assert _spec is not None and _spec.loader is not None
generate_schemas = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(generate_schemas)

runner = CliRunner()


def _committed(name: str) -> dict[str, Any]:
    return json.loads((SCHEMA_DIR / name).read_text(encoding="utf-8"))


def _kind(prop: dict[str, Any]) -> Any:
    if "anyOf" in prop:
        return tuple(_kind(alt) for alt in prop["anyOf"])
    return prop.get("$ref") or prop.get("type")


def _shape(schema: dict[str, Any]) -> dict[str, Any]:
    """Per object: property kinds, required fields and extra-field policy."""
    objects = {"": schema, **schema.get("$defs", {})}
    return {
        name: (
            {key: _kind(prop) for key, prop in node.get("properties", {}).items()},
            node.get("required", []),
            node.get("additionalProperties", True),
        )
        for name, node in objects.items()
    }


def _conforms(value: Any, node: dict[str, Any], defs: dict[str, Any]) -> bool:
    if "$ref" in node:
        node = defs[node["$ref"].rsplit("/", 1)[-1]]
    if "anyOf" in node:
        return any(_conforms(value, alt, defs) for alt in node["anyOf"])
    kind = node.get("type")
    if kind == "object":
        props = node.get("properties", {})
        return (
            isinstance(value, dict)
            and set(node.get("required", [])) <= set(value)
            and set(value) <= set(props)
            and all(_conforms(v, props[k], defs) for k, v in value.items())
        )
    if kind == "array":
        return isinstance(value, list) and all(
            _conforms(v, node.get("items", {}), defs) for v in value
        )
    if kind == "string":
        return isinstance(value, str) and value in node.get("enum", [value])
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "number":
        return isinstance(value, int | float) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "null":
        return value is None
    return True


def _assert_valid(doc: Any, name: str) -> None:
    schema = _committed(name)
    assert _conforms(doc, schema, schema.get("$defs", {})), name
    generate_schemas.SCHEMAS[name].model_validate(doc)


def test_every_registered_schema_is_committed() -> None:
    assert {p.name for p in SCHEMA_DIR.glob("*.schema.json")} == set(generate_schemas.SCHEMAS)


@pytest.mark.parametrize("name", sorted(generate_schemas.SCHEMAS))
def test_committed_schema_matches_the_models(name: str) -> None:
    committed = _committed(name)
    generated = generate_schemas.build_schema(generate_schemas.SCHEMAS[name])
    assert committed["$schema"] == generated["$schema"]
    assert committed["title"] == generated["title"]
    assert _shape(committed) == _shape(generated)


def test_validate_outputs_follow_their_schemas(tmp_path) -> None:
    ok = tmp_path / "ok.json"
    result = runner.invoke(
        app, ["validate", "-i", str(DATA / "seg8.csv"), "--ddim", "-o", str(ok)]
    )
    assert result.exit_code == 0, result.output
    _assert_valid(json.loads(ok.read_text(encoding="utf-8")), "inspect.schema.json")

    bad = tmp_path / "bad.json"
    result = runner.invoke(
        app, ["validate", "-i", str(DATA / "triangle_violation.csv"), "-o", str(bad)]
    )
    assert result.exit_code == 2
    report = json.loads(bad.read_text(encoding="utf-8"))
    assert report["violation"] is not None
    _assert_valid(report, "validation.schema.json")


def test_hierarchy_and_reduce_outputs_follow_their_schemas(tmp_path) -> None:
    seg8 = str(DATA / "seg8.csv")
    cases = [
        (["hierarchy", "-i", seg8], "hierarchy.schema.json"),
        (["reduce", "-i", seg8, "--D", "1", "--stats", "--oracle"], "reduce-result.schema.json"),
        (["reduce", "-i", seg8, "--sweep"], "reduce-sweep.schema.json"),
    ]
    for k, (args, name) in enumerate(cases):
        out = tmp_path / f"out{k}.json"
        result = runner.invoke(app, [*args, "-o", str(out)])
        assert result.exit_code == 0, result.output
        _assert_valid(json.loads(out.read_text(encoding="utf-8")), name)


def test_learning_outputs_follow_their_schemas(tmp_path) -> None:
    data = tmp_path / "train.csv"
    write_points(data, two_clusters(1, 16))

    summary = tmp_path / "summary.json"
    result = runner.invoke(app, ["pca-cutoff", "-i", str(data), "-o", str(summary)])
    assert result.exit_code == 0, result.output
    _assert_valid(json.loads(summary.read_text(encoding="utf-8")), "cutoff-summary.schema.json")

    model = tmp_path / "model.json"
    result = runner.invoke(app, ["train", "-i", str(data), "-o", str(model)])
    assert result.exit_code == 0, result.output
    _assert_valid(json.loads(model.read_text(encoding="utf-8")), "model.schema.json")


def test_bounds_outputs_follow_their_schemas() -> None:
    result = runner.invoke(app, ["bounds", "euclid", "--k", "1", "--eta", "0", "--n", "289"])
    assert result.exit_code == 0, result.output
    _assert_valid(json.loads(result.output), "bounds-euclid.schema.json")

    result = runner.invoke(
        app, ["bounds", "metric", "--D", "2", "--n", "4624", "--gamma", "0.5", "--L", "1"]
    )
    assert result.exit_code == 0, result.output
    _assert_valid(json.loads(result.output), "bounds-metric.schema.json")
