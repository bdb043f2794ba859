"""Report serialization shared by the CLI: JSON documents and aligned text.

Report files are a single JSON object {"meta": ..., "rows": [...]} with
sorted keys and no timestamps, so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from typing import Mapping

from idsel.errors import FormatError


def render_report(meta: Mapping, rows: list[dict]) -> str:
    return json.dumps({"meta": dict(meta), "rows": rows}, sort_keys=True, indent=1) + "\n"


def write_report(path: str, meta: Mapping, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(render_report(meta, rows))


def read_report(path: str) -> tuple[dict, list[dict]]:
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid report JSON: {exc}") from None
    if not isinstance(payload, dict) or "rows" not in payload or "meta" not in payload:
        raise FormatError(f"{path}: report must contain meta and rows")
    return payload["meta"], payload["rows"]


def format_table(rows: list[dict]) -> str:
    """Rows as aligned columns for terminal display; floats to 4 places."""
    if not rows:
        return "(no rows)"
    columns = list(rows[0])

    def cell(value) -> str:
        if isinstance(value, float):
            return f"{value:.4f}"
        return str(value)

    table = [[cell(row.get(col, "")) for col in columns] for row in rows]
    widths = [
        max(len(col), *(len(line[i]) for line in table))
        for i, col in enumerate(columns)
    ]
    out = ["  ".join(col.ljust(widths[i]) for i, col in enumerate(columns))]
    for line in table:
        out.append("  ".join(line[i].ljust(widths[i]) for i in range(len(columns))))
    return "\n".join(out)
