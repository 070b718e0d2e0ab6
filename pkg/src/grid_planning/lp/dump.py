from __future__ import annotations

from pathlib import Path
from typing import AbstractSet, Optional

import numpy as np

from grid_planning.lp.model import LinearProgram


def _num(v: float) -> str:
    if np.isposinf(v):
        return "inf"
    if np.isneginf(v):
        return "-inf"
    return repr(float(v))


def write_lp(
    lp: LinearProgram, path: str | Path, integer_vars: Optional[AbstractSet[int]] = None
) -> Path:
    """
    Plain-text dump for cross-checking with external solvers.

    Layout, one item per line::

        objective
          <j> <name> <c_j>
        constraints
          r<i> <sense> <rhs> : <j>:<a_ij> ...
        bounds
          <j> <lb> <ub>
        integers
          <j> ...
    """
    names = list(lp.names) if lp.names is not None else [f"x{j}" for j in range(lp.n_vars)]
    a = lp.a.tocsr()
    lines = [f"# minimize, {lp.n_vars} variables, {lp.n_rows} rows", "objective"]
    for j in np.flatnonzero(lp.c):
        lines.append(f"  {j} {names[j]} {_num(lp.c[j])}")
    lines.append("constraints")
    for i in range(lp.n_rows):
        start, end = a.indptr[i], a.indptr[i + 1]
        terms = " ".join(
            f"{j}:{_num(v)}" for j, v in zip(a.indices[start:end], a.data[start:end])
        )
        lines.append(f"  r{i} {lp.senses[i].value} {_num(lp.b[i])} : {terms}")
    lines.append("bounds")
    for j in range(lp.n_vars):
        lines.append(f"  {j} {_num(lp.lb[j])} {_num(lp.ub[j])}")
    lines.append("integers")
    if integer_vars:
        lines.append("  " + " ".join(str(j) for j in sorted(integer_vars)))

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out
