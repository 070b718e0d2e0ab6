from __future__ import annotations

import numpy as np

from grid_planning.costs.book import BatteryCostBook, GridCostBook


def battery_capex(
    capacity_kwh: float, power_kw: float, book: BatteryCostBook = BatteryCostBook()
) -> float:
    """Energy-dependent + power-dependent + fixed installation cost, euro."""
    if capacity_kwh < 0 or power_kw < 0:
        raise ValueError(
            f"battery size must be >= 0 (capacity={capacity_kwh}, power={power_kw})"
        )
    return (
        book.energy_cost * capacity_kwh
        + book.power_electronics_cost * power_kw
        + book.installation_cost
    )


def line_capex(
    line_type: str,
    length_km: float,
    n_new_parallel: int,
    shared_trench: bool,
    book: GridCostBook = GridCostBook(),
) -> float:
    """
    Cost of laying ``n_new_parallel`` cables of one type along a corridor.

    Each cable beyond the first in a trench adds ``parallel_surcharge`` of the
    installation cost; on an existing corridor (shared trench) every new cable
    is such an addition.
    """
    if n_new_parallel < 1:
        raise ValueError(f"n_new_parallel must be >= 1 (got {n_new_parallel})")
    lc = book.line_cost(line_type)
    if shared_trench:
        install = lc.installation * book.parallel_surcharge * n_new_parallel
    else:
        install = lc.installation * (1.0 + book.parallel_surcharge * (n_new_parallel - 1))
    return length_km * (install + lc.acquisition * n_new_parallel)


def annualize(capex: float, lifetime: float) -> float:
    """Straight-line annual cost, no discounting."""
    if lifetime <= 0:
        raise ValueError(f"lifetime must be > 0 (got {lifetime})")
    return capex / lifetime


def _discount_factors(rate: float, years: int) -> np.ndarray:
    if years < 1:
        raise ValueError(f"years must be >= 1 (got {years})")
    t = np.arange(1, years + 1, dtype=float)
    return 1.0 / (1.0 + rate) ** t


def lcoe(
    capex: float,
    annual_om: float,
    annual_energy: float,
    discount_rate: float = 0.0,
    years: int = 20,
) -> float:
    """Levelized cost of electricity, euro/kWh."""
    if annual_energy <= 0:
        raise ValueError("annual energy must be > 0")
    df = _discount_factors(discount_rate, years)
    return float((capex + annual_om * df.sum()) / (annual_energy * df.sum()))


def lcoes(
    capex: float,
    annual_om: float,
    annual_charging_cost: float,
    annual_discharged: float,
    discount_rate: float = 0.0,
    years: int = 10,
) -> float:
    """
    Levelized cost of energy storage, euro per discharged kWh: charging cost
    takes the place of fuel, discharged energy the place of generation.
    """
    if annual_discharged <= 0:
        raise ValueError("annual discharged energy must be > 0")
    return lcoe(capex, annual_om + annual_charging_cost, annual_discharged, discount_rate, years)
