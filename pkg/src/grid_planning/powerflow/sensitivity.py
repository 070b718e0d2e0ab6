"""
Linearized (LinDistFlow) voltage model.

For a radial feeder the voltage at bus j responds to active injection at bus i
through the resistance of the path the two buses share with the slack:
s_p[j, i] = sum(R_k for k on common path) / (v0_i * v0_j), likewise s_q with X.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from grid_planning.network.model import GridNetwork
from grid_planning.powerflow.sweep import LoadFlowDivergedError, nonlinear_loadflow


@dataclass(frozen=True)
class SensitivityModel:
    s_p: np.ndarray  # (n, n) over non-slack buses
    s_q: np.ndarray
    v0: np.ndarray  # (n,) p.u. at the operating point
    p_op: np.ndarray  # (n,) p.u.
    q_op: np.ndarray  # (n,) p.u.
    bus_ids: np.ndarray  # bus id of each row/column
    slack_v: float = 1.0

    @property
    def size(self) -> int:
        return int(self.bus_ids.size)

    def columns(self, buses: np.ndarray | list[int]) -> np.ndarray:
        """Positions of the given bus ids within the model dimension."""
        pos = {int(b): i for i, b in enumerate(self.bus_ids)}
        return np.array([pos[int(b)] for b in buses], dtype=int)


def build_sensitivity(
    grid: GridNetwork,
    operating_point: Optional[np.ndarray] = None,
    slack_v: float = 1.0,
) -> SensitivityModel:
    """
    Linearize around ``operating_point`` (per-bus complex p.u. injections, all
    buses; ``None`` is the zero-injection flat start).
    """
    topo = grid.topology
    op = (
        np.zeros(grid.n_buses, dtype=complex)
        if operating_point is None
        else np.asarray(operating_point, dtype=complex)
    )
    base = nonlinear_loadflow(grid, op, slack_v)
    if not base.converged:
        raise LoadFlowDivergedError(
            f"operating point did not converge after {base.iterations} iterations"
        )
    v0 = base.v[topo.nonslack]

    k_mat = topo.incidence
    r = topo.edge_impedance.real
    x = topo.edge_impedance.imag
    scale = np.outer(1.0 / v0, 1.0 / v0)
    s_p = (k_mat.T * r) @ k_mat * scale
    s_q = (k_mat.T * x) @ k_mat * scale
    # exact symmetry; the products above can differ in the last bit
    s_p = 0.5 * (s_p + s_p.T)
    s_q = 0.5 * (s_q + s_q.T)
    for arr in (s_p, s_q, v0):
        arr.setflags(write=False)

    return SensitivityModel(
        s_p=s_p,
        s_q=s_q,
        v0=v0,
        p_op=op.real[topo.nonslack].copy(),
        q_op=op.imag[topo.nonslack].copy(),
        bus_ids=topo.nonslack.copy(),
        slack_v=slack_v,
    )


def linear_voltages(
    model: SensitivityModel,
    p: np.ndarray,
    q: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Affine voltage map v = v0 + s_p (p - p_op) + s_q (q - q_op).

    ``p``/``q`` are p.u. injections over the model's buses, either one vector
    or an (hours x n) array; the result has the same shape.
    """
    p_arr = np.asarray(p, dtype=float)
    if p_arr.shape[-1] != model.size:
        raise ValueError(
            f"injection dimension {p_arr.shape[-1]} does not match model size {model.size}"
        )
    v = model.v0 + (p_arr - model.p_op) @ model.s_p
    if q is not None:
        q_arr = np.asarray(q, dtype=float)
        if q_arr.shape != p_arr.shape:
            raise ValueError(f"q shape {q_arr.shape} does not match p shape {p_arr.shape}")
        v = v + (q_arr - model.q_op) @ model.s_q
    else:
        v = v - model.q_op @ model.s_q
    return v


def full_bus_voltages(model: SensitivityModel, v_model: np.ndarray, n_buses: int) -> np.ndarray:
    """Scatter model-dimension voltages back onto all bus ids (slack at setpoint)."""
    v = np.asarray(v_model)
    out = np.full(v.shape[:-1] + (n_buses,), model.slack_v)
    out[..., model.bus_ids] = v
    return out
