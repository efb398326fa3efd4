"""Deterministic CSV emission with a provenance comment line.

Files are byte-identical across runs of the same config: floats print with
17 significant digits, row order is the caller's, and the provenance line
carries no wall-clock data.
"""

from __future__ import annotations

import csv
from pathlib import Path


def fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit_csv(records, schema, path, provenance: str = "") -> Path:
    """Write rows under a header; `# provenance` comes first when given.

    records: iterable of sequences matching the schema column count.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(schema)
        for rec in records:
            if len(rec) != len(schema):
                raise ValueError(f"record width {len(rec)} != schema width {len(schema)}")
            writer.writerow([fmt(v) for v in rec])
    return path
