"""Plain-JSON persistence for computed hierarchies."""
from __future__ import annotations

import json

from . import __version__
from .dsl import expr_from_data, expr_to_data
from .errors import SchemaError, SchemaVersionError
from .oracle import ZeroTestConfig

CACHE_SCHEMA = "ddkp.hierarchy"
CACHE_VERSION = 1


def dump_hierarchy(h, cfg: ZeroTestConfig) -> str:
    """Serialize a :class:`~ddkp.symmetries.Hierarchy` with its verdicts."""
    checks = {c.label: c.to_data() for c in h.report.checks}
    records = []
    for i, member in enumerate(h.members, 1):
        verdicts = {
            label: data
            for label, data in checks.items()
            if label.startswith(f"H{i} ") or f"H{i}," in label or f",H{i}]" in label
        }
        records.append(
            {
                "index": i,
                "expression": expr_to_data(member),
                "terms": len(member),
                "verdicts": verdicts,
            }
        )
    doc = {
        "schema": CACHE_SCHEMA,
        "version": CACHE_VERSION,
        "engine_version": __version__,
        "orientation": h.orientation,
        "config": cfg.to_data(),
        "passed": h.report.passed,
        "records": records,
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def load_hierarchy(text: str) -> list[dict]:
    """Records of a cache file, with ``expression`` decoded."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != CACHE_SCHEMA:
        raise SchemaError("not a ddkp hierarchy document")
    if doc.get("version") != CACHE_VERSION:
        raise SchemaVersionError(f"unsupported cache version {doc.get('version')!r}")
    out = []
    for rec in doc.get("records", []):
        rec = dict(rec)
        rec["expression"] = expr_from_data(rec["expression"])
        out.append(rec)
    return out
