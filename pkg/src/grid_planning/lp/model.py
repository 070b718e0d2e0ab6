from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, List, Literal, Optional, Sequence

import numpy as np
from scipy import sparse

Backend = Literal["simplex", "highs"]


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class SolverSettings:
    feasibility_tol: float = 1e-7
    optimality_tol: float = 1e-7
    pivot_tol: float = 1e-9
    max_iterations: int = 50_000
    refactor_every: int = 64
    integrality_tol: float = 1e-6
    gap_tolerance: float = 1e-6
    node_limit: int = 5_000
    backend: Backend = "simplex"

    def __post_init__(self) -> None:
        if self.backend not in ("simplex", "highs"):
            raise ValueError(f"unknown solver backend {self.backend!r}")
        if self.max_iterations < 1 or self.node_limit < 1:
            raise ValueError("iteration and node limits must be >= 1")


@dataclass(frozen=True)
class LinearProgram:
    """minimize c @ x  s.t.  rows (A x  sense  b),  lb <= x <= ub."""

    c: np.ndarray
    a: sparse.csr_matrix
    senses: Sequence[Sense]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: Optional[Sequence[str]] = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float)
        a = sparse.csr_matrix(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        senses = tuple(Sense(s) for s in self.senses)
        n = c.size
        if a.shape != (b.size, n) and not (b.size == 0 and a.shape[0] == 0):
            raise ValueError(f"constraint matrix {a.shape} does not match {b.size} rows x {n} vars")
        if len(senses) != b.size:
            raise ValueError(f"{len(senses)} senses for {b.size} rows")
        if lb.shape != (n,) or ub.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if (lb > ub).any():
            j = int(np.argmax(lb > ub))
            raise ValueError(f"variable {j}: lower bound {lb[j]} above upper bound {ub[j]}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        object.__setattr__(self, "senses", senses)

    @property
    def n_vars(self) -> int:
        return int(self.c.size)

    @property
    def n_rows(self) -> int:
        return int(self.b.size)

    @classmethod
    def from_dense(
        cls,
        c: Sequence[float],
        a: Sequence[Sequence[float]] | np.ndarray,
        senses: Sequence[str],
        b: Sequence[float],
        lb: Optional[Sequence[float]] = None,
        ub: Optional[Sequence[float]] = None,
    ) -> "LinearProgram":
        c_arr = np.asarray(c, dtype=float)
        a_arr = np.asarray(a, dtype=float).reshape(len(b), c_arr.size)
        return cls(
            c=c_arr,
            a=sparse.csr_matrix(a_arr),
            senses=[Sense(s) for s in senses],
            b=np.asarray(b, dtype=float),
            lb=np.zeros(c_arr.size) if lb is None else np.asarray(lb, dtype=float),
            ub=np.full(c_arr.size, np.inf) if ub is None else np.asarray(ub, dtype=float),
        )

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "LinearProgram":
        return LinearProgram(self.c, self.a, self.senses, self.b, lb, ub, self.names)

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Constraint violation per row (0 when satisfied)."""
        ax = self.a @ x
        out = np.zeros(self.n_rows)
        for i, s in enumerate(self.senses):
            if s is Sense.LE:
                out[i] = max(0.0, ax[i] - self.b[i])
            elif s is Sense.GE:
                out[i] = max(0.0, self.b[i] - ax[i])
            else:
                out[i] = abs(ax[i] - self.b[i])
        return out


@dataclass(frozen=True)
class MixedIntegerProgram:
    base: LinearProgram
    integer_vars: FrozenSet[int]

    def __post_init__(self) -> None:
        ints = frozenset(int(j) for j in self.integer_vars)
        for j in ints:
            if not 0 <= j < self.base.n_vars:
                raise ValueError(f"integer variable index {j} out of range")
            if self.base.lb[j] < 0 or self.base.ub[j] > 1:
                raise ValueError(f"integer variable {j} must be binary (bounds within [0, 1])")
        object.__setattr__(self, "integer_vars", ints)


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    x: Optional[np.ndarray]
    objective: float
    gap: float = 0.0
    iterations: int = 0
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


# ---------------- Builder ----------------


@dataclass
class ProgramBuilder:
    """Incremental construction of a sparse (mixed-integer) linear program."""

    _c: List[float] = field(default_factory=list)
    _lb: List[float] = field(default_factory=list)
    _ub: List[float] = field(default_factory=list)
    _names: List[str] = field(default_factory=list)
    _ints: List[int] = field(default_factory=list)
    _rows: List[int] = field(default_factory=list)
    _cols: List[int] = field(default_factory=list)
    _vals: List[float] = field(default_factory=list)
    _senses: List[Sense] = field(default_factory=list)
    _rhs: List[float] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return len(self._c)

    @property
    def n_rows(self) -> int:
        return len(self._rhs)

    def add_var(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = np.inf,
        cost: float = 0.0,
        binary: bool = False,
    ) -> int:
        j = len(self._c)
        self._c.append(float(cost))
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._names.append(name)
        if binary:
            self._ints.append(j)
        return j

    def add_row(
        self, cols: Iterable[int], vals: Iterable[float], sense: Sense | str, rhs: float
    ) -> int:
        i = len(self._rhs)
        for j, v in zip(cols, vals):
            if v != 0.0:
                self._rows.append(i)
                self._cols.append(int(j))
                self._vals.append(float(v))
        self._senses.append(Sense(sense))
        self._rhs.append(float(rhs))
        return i

    def build_lp(self) -> LinearProgram:
        a = sparse.csr_matrix(
            (self._vals, (self._rows, self._cols)), shape=(self.n_rows, self.n_vars)
        )
        return LinearProgram(
            c=np.array(self._c),
            a=a,
            senses=list(self._senses),
            b=np.array(self._rhs),
            lb=np.array(self._lb),
            ub=np.array(self._ub),
            names=list(self._names),
        )

    def build(self) -> MixedIntegerProgram:
        return MixedIntegerProgram(self.build_lp(), frozenset(self._ints))
