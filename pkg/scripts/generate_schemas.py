from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from adaptdim.models import (
    CutoffSummary,
    EuclidBoundReport,
    HierarchyReport,
    InspectReport,
    MetricBoundReport,
    ModelFile,
    ReduceResult,
    ReduceSweep,
    ValidationReport,
)

SCHEMAS: dict[str, type[BaseModel]] = {
    "inspect.schema.json": InspectReport,
    "validation.schema.json": ValidationReport,
    "hierarchy.schema.json": HierarchyReport,
    "reduce-result.schema.json": ReduceResult,
    "reduce-sweep.schema.json": ReduceSweep,
    "cutoff-summary.schema.json": CutoffSummary,
    "model.schema.json": ModelFile,
    "bounds-euclid.schema.json": EuclidBoundReport,
    "bounds-metric.schema.json": MetricBoundReport,
}


def build_schema(model: type[BaseModel]) -> dict[str, Any]:
    schema = model.model_json_schema()
    schema.setdefault("$schema", "https://json-schema.org/draft/2020-12/schema")
    schema.setdefault("title", model.__name__)
    return schema


def main() -> None:
    root = Path(__file__).resolve().parents[1]
    out_dir = root / "schemas"
    out_dir.mkdir(exist_ok=True)

    for name, model in SCHEMAS.items():
        out_path = out_dir / name
        text = json.dumps(build_schema(model), indent=2, sort_keys=True) + "\n"
        out_path.write_text(text, encoding="utf-8")
        print(f"Wrote: {out_path}")


if __name__ == "__main__":
    main()
