from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pyarrow as pa
import pyarrow.csv as pacsv
import pyarrow.parquet as pq


# ---------------- Cell formatting ----------------


def format_float(x: float, decimals: int) -> str:
    """Fixed-decimal text; NaN/None become empty cells and -0.0 prints as 0.0."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{round(float(x), decimals) + 0.0:.{decimals}f}"


def _format_column(values: Any, decimals: int) -> List[str]:
    arr = np.asarray(values)
    if np.issubdtype(arr.dtype, np.datetime64):
        return [str(s) for s in np.datetime_as_string(arr.astype("datetime64[s]"), unit="s")]
    if arr.dtype == bool:
        return ["true" if v else "false" for v in arr]
    if np.issubdtype(arr.dtype, np.integer):
        return [str(int(v)) for v in arr]
    if np.issubdtype(arr.dtype, np.floating):
        return [format_float(float(v), decimals) for v in arr]
    out: List[str] = []
    for v in arr:
        if v is None:
            out.append("")
        elif isinstance(v, (bool, np.bool_)):
            out.append("true" if v else "false")
        elif isinstance(v, (int, np.integer)):
            out.append(str(int(v)))
        elif isinstance(v, (float, np.floating)):
            out.append(format_float(float(v), decimals))
        else:
            out.append(str(v))
    return out


# ---------------- Writers ----------------


class TableWriter:
    """
    Column tables to CSV (pyarrow.csv, every cell pre-rendered so the bytes
    are stable) or Parquet (typed columns).
    """

    def __init__(
        self,
        *,
        decimals: int = 6,
        column_decimals: Optional[Mapping[str, int]] = None,
        compression: str = "zstd",
    ) -> None:
        self.decimals = decimals
        self.column_decimals = dict(column_decimals or {})
        self.compression = compression

    def _rendered(self, columns: Mapping[str, Any]) -> pa.Table:
        lengths = {name: len(np.asarray(v)) for name, v in columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"columns differ in length: {lengths}")
        arrays = {
            name: pa.array(
                _format_column(values, self.column_decimals.get(name, self.decimals)),
                type=pa.string(),
            )
            for name, values in columns.items()
        }
        return pa.table(arrays)

    def write_csv(self, columns: Mapping[str, Any], path: str | Path) -> Path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        pacsv.write_csv(
            self._rendered(columns),
            str(out),
            write_options=pacsv.WriteOptions(quoting_style="none"),
        )
        return out

    def write_rows(
        self, rows: Sequence[Mapping[str, Any]], columns: Sequence[str], path: str | Path
    ) -> Path:
        """Row dicts to CSV in the given column order (missing keys -> empty cells)."""
        table = {c: np.array([r.get(c) for r in rows], dtype=object) for c in columns}
        return self.write_csv(table, path)

    def write_parquet(self, columns: Mapping[str, Any], path: str | Path) -> Path:
        """Typed columns; timestamps as timestamp[s], floats unrounded."""
        arrays = {}
        for name, values in columns.items():
            arr = np.asarray(values)
            if np.issubdtype(arr.dtype, np.datetime64):
                arrays[name] = pa.array(arr.astype("datetime64[s]"), type=pa.timestamp("s"))
            else:
                arrays[name] = pa.array(arr)
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        pq.write_table(pa.table(arrays), str(out), compression=self.compression)
        return out


def write_json(doc: Dict[str, Any] | List[Any], path: str | Path) -> Path:
    """Sorted keys, two-space indent, trailing newline."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
