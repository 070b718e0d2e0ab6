from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np

from grid_planning.costs import GridCostBook, annualize, line_capex
from grid_planning.network import GridNetwork, LineSegment

ActionKind = Literal["replace", "add_parallel"]

MAX_PARALLEL = 3
MAX_NEW_CABLES = 3


@dataclass(frozen=True)
class ReinforcementAction:
    """
    One corridor upgrade. ``line_type``/``n_parallel`` describe the corridor
    after the action; ``n_new`` is the number of cables laid.
    """

    segment: int
    from_bus: int
    to_bus: int
    kind: ActionKind
    line_type: str
    n_parallel: int
    n_new: int
    length_km: float
    capex: float

    @property
    def key(self) -> Tuple[int, str, str, int]:
        return (self.segment, self.kind, self.line_type, self.n_parallel)

    @property
    def shared_trench(self) -> bool:
        return self.kind == "add_parallel"

    def resulting_segment(self) -> LineSegment:
        return LineSegment(
            self.from_bus, self.to_bus, self.length_km, self.line_type, self.n_parallel
        )

    def apply(self, grid: GridNetwork) -> GridNetwork:
        return grid.with_segment(self.segment, self.resulting_segment())

    def reprice(self, book: GridCostBook) -> float:
        return line_capex(self.line_type, self.length_km, self.n_new, self.shared_trench, book)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "from": self.from_bus,
            "to": self.to_bus,
            "n_parallel": self.n_parallel,
            "type": self.line_type,
            "cost_eur": round(self.capex, 2),
            "action": self.kind,
            "n_new": self.n_new,
            "length_km": self.length_km,
            "segment": self.segment,
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "ReinforcementAction":
        return cls(
            segment=int(raw["segment"]),
            from_bus=int(raw["from"]),
            to_bus=int(raw["to"]),
            kind=raw["action"],
            line_type=str(raw["type"]),
            n_parallel=int(raw["n_parallel"]),
            n_new=int(raw["n_new"]),
            length_km=float(raw["length_km"]),
            capex=float(raw["cost_eur"]),
        )


def candidate_actions(
    grid: GridNetwork, segment: int, book: GridCostBook = GridCostBook()
) -> List[ReinforcementAction]:
    """
    Every upgrade of one corridor: rebuilding it with 1..3 cables of a type
    with lower per-km resistance (new route) whenever that lowers the
    effective resistance, and adding 1..3 cables of the existing type in the
    existing trench. The parallel cap is not applied here.
    """
    if not 0 <= segment < len(grid.segments):
        raise KeyError(f"unknown segment index {segment}")
    book = book.covering(grid.catalog)
    seg = grid.segments[segment]
    current = grid.line_type(seg.line_type)
    r_now = seg.resistance_ohm(current)

    out: List[ReinforcementAction] = []
    for lt in grid.catalog:
        if lt.r_per_km >= current.r_per_km:
            continue
        for n in range(1, MAX_NEW_CABLES + 1):
            if lt.r_per_km * seg.length_km / n >= r_now:
                continue
            out.append(
                ReinforcementAction(
                    segment=segment,
                    from_bus=seg.from_bus,
                    to_bus=seg.to_bus,
                    kind="replace",
                    line_type=lt.name,
                    n_parallel=n,
                    n_new=n,
                    length_km=seg.length_km,
                    capex=line_capex(lt.name, seg.length_km, n, False, book),
                )
            )
    for k in range(1, MAX_NEW_CABLES + 1):
        out.append(
            ReinforcementAction(
                segment=segment,
                from_bus=seg.from_bus,
                to_bus=seg.to_bus,
                kind="add_parallel",
                line_type=current.name,
                n_parallel=seg.n_parallel + k,
                n_new=k,
                length_km=seg.length_km,
                capex=line_capex(current.name, seg.length_km, k, True, book),
            )
        )
    return out


# ---------------- Plan ----------------


@dataclass(frozen=True)
class ReinforcementPlan:
    actions: Tuple[ReinforcementAction, ...] = ()
    transformer_replaced: bool = False
    transformer_rating_kva: Optional[float] = None  # rating after replacement
    transformer_cost: float = 0.0
    total_capex: float = 0.0
    annual_cost: float = 0.0
    final_max_voltage: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def from_actions(
        cls,
        actions: List[ReinforcementAction],
        book: GridCostBook,
        transformer_rating_kva: Optional[float] = None,
        final_max_voltage: Optional[np.ndarray] = None,
        transformer_cost: Optional[float] = None,
    ) -> "ReinforcementPlan":
        """``transformer_cost`` overrides the book price of a replacement."""
        cable = sum(a.capex for a in actions)
        replaced = transformer_rating_kva is not None
        price = book.transformer_cost if transformer_cost is None else transformer_cost
        trafo = price if replaced else 0.0
        annual = annualize(cable, book.cable_lifetime) if cable else 0.0
        if replaced:
            annual += annualize(trafo, book.transformer_lifetime)
        return cls(
            actions=tuple(actions),
            transformer_replaced=replaced,
            transformer_rating_kva=transformer_rating_kva,
            transformer_cost=trafo,
            total_capex=cable + trafo,
            annual_cost=annual,
            final_max_voltage=(
                np.zeros(0) if final_max_voltage is None else np.asarray(final_max_voltage)
            ),
        )

    @property
    def empty(self) -> bool:
        return not self.actions and not self.transformer_replaced

    def touched_segments(self) -> List[int]:
        return sorted({a.segment for a in self.actions})

    def apply(self, grid: GridNetwork) -> GridNetwork:
        out = grid
        for action in self.actions:
            out = action.apply(out)
        if self.transformer_replaced and self.transformer_rating_kva is not None:
            out = out.with_transformer(
                dataclasses.replace(out.transformer, rating_kva=self.transformer_rating_kva)
            )
        return out

    def reprice(
        self, book: GridCostBook, transformer_cost: Optional[float] = None
    ) -> "ReinforcementPlan":
        """Same plan with every cost recomputed from ``book`` (and the grid's transformer price)."""
        actions = [dataclasses.replace(a, capex=a.reprice(book)) for a in self.actions]
        return ReinforcementPlan.from_actions(
            actions,
            book,
            self.transformer_rating_kva if self.transformer_replaced else None,
            self.final_max_voltage,
            transformer_cost,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "actions": [a.to_dict() for a in self.actions],
            "transformer_replaced": self.transformer_replaced,
            "transformer_rating_kva": self.transformer_rating_kva,
            "transformer_cost_eur": round(self.transformer_cost, 2),
            "total_capex_eur": round(self.total_capex, 2),
            "annual_cost_eur": round(self.annual_cost, 2),
            "final_max_voltage": [round(float(v), 6) for v in self.final_max_voltage],
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], book: GridCostBook) -> "ReinforcementPlan":
        actions = [ReinforcementAction.from_dict(a) for a in raw.get("actions", [])]
        rating = raw.get("transformer_rating_kva") if raw.get("transformer_replaced") else None
        return cls.from_actions(
            actions,
            book,
            None if rating is None else float(rating),
            np.asarray(raw.get("final_max_voltage", []), dtype=float),
            raw.get("transformer_cost_eur") if rating is not None else None,
        )


def upgrade_everything_cost(
    grid: GridNetwork, segments: List[int], book: GridCostBook = GridCostBook()
) -> float:
    """Cost of rebuilding every listed corridor with one cable of the largest catalog type."""
    book = book.covering(grid.catalog)
    largest = min(grid.catalog, key=lambda lt: lt.r_per_km)
    return sum(
        line_capex(largest.name, grid.segments[k].length_km, 1, False, book) for k in segments
    )
