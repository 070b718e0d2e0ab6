"""Backward/forward sweep load flow on the branch-to-bus incidence matrix."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from grid_planning.network.model import GridNetwork

log = logging.getLogger(__name__)

MISMATCH_TOL = 1e-8  # p.u. power
MAX_ITERATIONS = 100


class LoadFlowDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class VoltageSolution:
    v: np.ndarray  # |V| per bus id, p.u.
    line_currents: np.ndarray  # per segment, A
    losses: float  # kW
    converged: bool
    iterations: int
    source_power: complex  # p.u. supplied by the slack into the grid
    transformer_loading: float  # fraction of rating


@dataclass(frozen=True)
class SeriesSolution:
    """Sweep results for every hour of a window (hours x buses / segments)."""

    v: np.ndarray
    line_currents: np.ndarray
    losses: np.ndarray  # kW per hour
    converged: np.ndarray  # bool per hour
    iterations: int
    source_power: np.ndarray
    transformer_loading: np.ndarray

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())

    def snapshot(self, hour: int) -> VoltageSolution:
        return VoltageSolution(
            v=self.v[hour],
            line_currents=self.line_currents[hour],
            losses=float(self.losses[hour]),
            converged=bool(self.converged[hour]),
            iterations=self.iterations,
            source_power=complex(self.source_power[hour]),
            transformer_loading=float(self.transformer_loading[hour]),
        )

    def require_converged(self) -> "SeriesSolution":
        if not self.all_converged:
            bad = np.flatnonzero(~self.converged).tolist()
            raise LoadFlowDivergedError(f"load flow diverged at hours {bad[:10]}")
        return self


def loadflow_series(
    grid: GridNetwork,
    injections: np.ndarray,
    slack_v: float = 1.0,
    *,
    tol: float = MISMATCH_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> SeriesSolution:
    """
    Solve every row of ``injections`` (hours x buses, complex p.u., generation
    positive) at once. Slack-bus injections are ignored.
    """
    topo = grid.topology
    s_all = np.atleast_2d(np.asarray(injections, dtype=complex))
    if s_all.shape[1] != grid.n_buses:
        raise ValueError(
            f"injections have {s_all.shape[1]} bus columns, grid has {grid.n_buses}"
        )
    s = s_all[:, topo.nonslack]
    k_mat = topo.incidence
    z = topo.edge_impedance
    hours = s.shape[0]

    v = np.full(s.shape, complex(slack_v))
    converged = np.zeros(hours, dtype=bool)
    it = 0
    j = np.zeros((hours, k_mat.shape[0]), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for it in range(1, max_iterations + 1):
            i_inj = np.conj(s / v)
            j = -i_inj @ k_mat.T  # downstream branch currents
            v_new = slack_v - (j * z) @ k_mat
            mismatch = np.abs(v_new * np.conj(i_inj) - s).max(axis=1, initial=0.0)
            v = v_new
            converged = mismatch < tol
            if converged.all() or not np.isfinite(v).all():
                break

    if not converged.all():
        log.warning(
            "[loadflow] not converged hours=%d/%d iterations=%d",
            int((~converged).sum()),
            hours,
            it,
        )

    v_full = np.full((hours, grid.n_buses), float(slack_v))
    v_full[:, topo.nonslack] = np.abs(v)

    seg_pos = topo.segment_edges()
    currents = np.abs(j[:, seg_pos]) * grid.i_base
    loss_pu = (np.abs(j) ** 2 * z).sum(axis=1)
    root_edges = [e for e, edge in enumerate(topo.edges) if edge.upstream == topo.slack]
    source = slack_v * np.conj(j[:, root_edges].sum(axis=1))

    return SeriesSolution(
        v=v_full,
        line_currents=currents,
        losses=loss_pu.real * grid.s_base_kva,
        converged=converged,
        iterations=it,
        source_power=source,
        transformer_loading=np.abs(source),
    )


def nonlinear_loadflow(
    grid: GridNetwork, injections: np.ndarray, slack_v: float = 1.0
) -> VoltageSolution:
    """Single-snapshot sweep; ``injections`` is a per-bus complex p.u. vector."""
    inj = np.asarray(injections, dtype=complex).reshape(1, -1)
    return loadflow_series(grid, inj, slack_v).snapshot(0)
