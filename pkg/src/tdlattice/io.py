"""CSV and JSON writers with round-trip float formatting."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .analysis.report import _clean


def fmt(v) -> str:
    """Shortest round-trip text for floats; plain str for everything else."""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else repr(v))
    if hasattr(v, "item"):
        return fmt(v.item())
    return str(v)


def csv_text(header, rows, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(doc) -> str:
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


PARTITION_HEADER = ["n", "t_n", "dt_n", "sigma_n", "r_n", "q_n", "rho_n", "eta_n"]
LATTICE_HEADER = ["n", "t_n", "j", "S_j", "V", "is_exercise"]
SURFACE_HEADER = ["n", "t_n", "j", "x_j", "S_j", "U", "is_exercise"]


def partition_csv(partition) -> str:
    return csv_text(PARTITION_HEADER, partition.rows())


def lattice_csv(sol) -> str:
    return csv_text(LATTICE_HEADER, sol.lattice_rows())


def surface_csv(sol) -> str:
    return csv_text(SURFACE_HEADER, sol.surface_rows())


def boundary_csv(boundary) -> str:
    """Tree boundaries list (t, S); grid boundaries list (t, x, S). A missing boundary
    yields only the header under a comment line naming the reason."""
    if boundary.interp == "S":
        header = ["t", "S_boundary"]
        rows = ((t, s) for _, t, _, _, s in boundary.levels())
    else:
        header = ["t", "x_boundary", "S_boundary"]
        rows = ((t, x, s) for _, t, _, x, s in boundary.levels())
    if not boundary.exists:
        return csv_text(header, [], comment=boundary.reason)
    return csv_text(header, rows)


def table_csv(table) -> str:
    if not table:
        return ""
    header = []
    for row in table:
        for k in row:
            if k not in header:
                header.append(k)
    return csv_text(header, ([row.get(k, "") for k in header] for row in table))
