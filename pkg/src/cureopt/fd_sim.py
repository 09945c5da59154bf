"""Reference finite-difference solver for the coupled tool/part cure problem.

Crank-Nicolson conduction on a two-block 1D grid (tool below, part above)
with convective (Robin) boundaries at both outer surfaces, a shared
zero-capacity interface node enforcing one-sided flux matching (equivalent to
a series/harmonic-mean conductance across the interface), and the exothermic
cure reaction handled by Strang splitting with adaptively sub-cycled explicit
kinetics. This solver is the ground-truth oracle for the operator surrogate.
"""

from dataclasses import dataclass, field
import csv
import json
import math
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .cure_cycle import CELSIUS_OFFSET, DesignVector, air_temperature, build_cycle
from .material import MaterialCard, card_to_dict, cure_rate


class SimulationError(RuntimeError):
    """Raised when the time integration diverges or produces non-finite values."""


@dataclass
class Geometry:
    """Grid description for the tool/part stack.

    Tool thickness normally comes from the design vector; ``L_t`` overrides it
    when set. Node counts default to a nominal spacing of ``dz_nominal``.
    """

    L_part: float = 0.020        # part thickness (m)
    L_t: float | None = None     # tool thickness override (m); None -> design value
    n_z_tool: int | None = None  # tool node count (including both ends)
    n_z_part: int | None = None  # part node count (including both ends)
    dz_nominal: float = 0.002    # target node spacing (m) when counts are None

    def resolve(self, u: DesignVector):
        """Return (L_t, L_part, n_tool, n_part) for design ``u``."""
        L_t = self.L_t if self.L_t is not None else u.L_t / 100.0
        if L_t <= 0.0 or self.L_part <= 0.0:
            raise ValueError("thicknesses must be positive")
        n_tool = self.n_z_tool or max(3, round(L_t / self.dz_nominal) + 1)
        n_part = self.n_z_part or max(3, round(self.L_part / self.dz_nominal) + 1)
        if n_tool < 3 or n_part < 3:
            raise ValueError("node counts must be >= 3")
        return L_t, self.L_part, int(n_tool), int(n_part)


@dataclass
class SimResult:
    """Spatiotemporal fields from one simulation (SI units, Kelvin)."""

    times: np.ndarray       # (n_times,) s
    z_nodes: np.ndarray     # (n_nodes,) m, global coordinates from tool bottom
    T: np.ndarray           # (n_nodes, n_times) K
    alpha: np.ndarray       # (n_part, n_times) degree of cure on part nodes
    interface_index: int    # global index of the tool/part interface node
    L_t: float              # tool thickness (m)
    L_part: float           # part thickness (m)
    t_obj: float            # end of second hold (s)
    meta: dict = field(default_factory=dict)

    @property
    def part_z(self) -> np.ndarray:
        return self.z_nodes[self.interface_index:]

    @property
    def part_midpoint(self) -> float:
        return self.L_t + 0.5 * self.L_part


def _react(T_part, alpha, duration, card: MaterialCard, max_dalpha, skip_heat_index=0):
    """Adiabatic reaction sub-step: advance alpha and add exotherm heat to T.

    Explicit sub-cycling caps the per-sub-step cure increment at
    ``max_dalpha``. The interface node (index ``skip_heat_index``) carries no
    heat capacity in the conduction scheme, so its temperature is not kicked.
    """
    kin = card.kinetics
    remaining = duration
    while remaining > 1e-12:
        rate = cure_rate(alpha, T_part, kin)
        peak = float(np.max(rate))
        h = remaining if peak * remaining <= max_dalpha else max_dalpha / peak
        dalpha = np.minimum(rate * h, 1.0 - alpha)
        alpha = alpha + dalpha
        kick = card.b_c * dalpha
        kick[skip_heat_index] = 0.0
        T_part = T_part + kick
        remaining -= h
    return T_part, alpha


def simulate(card: MaterialCard, geom: Geometry, u: DesignVector, dt=1.0,
             T0=20.0, alpha0=0.05, cooldown_rate=2.0, max_dalpha=0.005,
             cycle=None) -> SimResult:
    """Run the coupled conduction/cure simulation for design ``u``.

    Parameters
    ----------
    dt : nominal time step (s); the actual step divides the cycle duration
        evenly and never exceeds ``dt``.
    T0 : initial and ambient start temperature (degC).
    alpha0 : uniform initial degree of cure.
    cycle : optional pre-built air program overriding the one derived from
        ``u`` (verification hook for canonical solutions).

    Returns a :class:`SimResult`; raises :class:`SimulationError` on
    divergence.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if cycle is None:
        cycle = build_cycle(u, T0=T0, cooldown_rate=cooldown_rate)
    L_t, L_part, n_tool, n_part = geom.resolve(u)
    dz_t = L_t / (n_tool - 1)
    dz_c = L_part / (n_part - 1)
    n_nodes = n_tool + n_part - 1
    i_f = n_tool - 1
    z = np.concatenate([np.linspace(0.0, L_t, n_tool),
                        L_t + np.linspace(0.0, L_part, n_part)[1:]])

    n_steps = max(1, math.ceil(cycle.t_end / dt))
    dt_eff = cycle.t_end / n_steps
    times = np.linspace(0.0, cycle.t_end, n_steps + 1)

    # conduction operator K (dT/dt = K T + c_f * T_a), rows in K as diagonals
    lo = np.zeros(n_nodes)   # sub-diagonal coefficient (on T_{i-1})
    di = np.zeros(n_nodes)   # diagonal
    up = np.zeros(n_nodes)   # super-diagonal (on T_{i+1})
    c_f = np.zeros(n_nodes)  # forcing coefficient on T_a
    r_t = card.a_t / dz_t**2
    r_c = card.a_c / dz_c**2
    # tool bottom, Robin via ghost-node elimination (second order)
    di[0] = -2.0 * r_t - 2.0 * card.a_t * u.h_bot / (card.k_t * dz_t)
    up[0] = 2.0 * r_t
    c_f[0] = 2.0 * card.a_t * u.h_bot / (card.k_t * dz_t)
    # tool interior
    lo[1:i_f] = r_t
    di[1:i_f] = -2.0 * r_t
    up[1:i_f] = r_t
    # part interior
    lo[i_f + 1:n_nodes - 1] = r_c
    di[i_f + 1:n_nodes - 1] = -2.0 * r_c
    up[i_f + 1:n_nodes - 1] = r_c
    # part top, Robin
    lo[-1] = 2.0 * r_c
    di[-1] = -2.0 * r_c - 2.0 * card.a_c * u.h_top / (card.k_c * dz_c)
    c_f[-1] = 2.0 * card.a_c * u.h_top / (card.k_c * dz_c)

    # Crank-Nicolson matrices A T^{n+1} = B T^n + forcing
    half = 0.5 * dt_eff
    A_lo, A_di, A_up = -half * lo, 1.0 - half * di, -half * up
    B_lo, B_di, B_up = half * lo, 1.0 + half * di, half * up
    # interface: zero-capacity flux-matching constraint, fully implicit
    g_t, g_c = card.k_t / dz_t, card.k_c / dz_c
    scale = g_t + g_c
    A_lo[i_f], A_di[i_f], A_up[i_f] = -g_t / scale, 1.0, -g_c / scale
    B_lo[i_f] = B_di[i_f] = B_up[i_f] = 0.0
    ab = np.zeros((3, n_nodes))
    ab[0, 1:] = A_up[:-1]
    ab[1, :] = A_di
    ab[2, :-1] = A_lo[1:]

    T = np.full(n_nodes, T0 + CELSIUS_OFFSET)
    alpha = np.full(n_part, float(alpha0))
    T_hist = np.empty((n_nodes, n_steps + 1))
    a_hist = np.empty((n_part, n_steps + 1))
    T_hist[:, 0] = T
    a_hist[:, 0] = alpha

    Ta_all = air_temperature(cycle, times)
    for step in range(n_steps):
        T_part, alpha = _react(T[i_f:], alpha, 0.5 * dt_eff, card, max_dalpha)
        T = T.copy()
        T[i_f:] = T_part
        rhs = B_di * T
        rhs[:-1] += B_up[:-1] * T[1:]
        rhs[1:] += B_lo[1:] * T[:-1]
        rhs += half * c_f * (Ta_all[step] + Ta_all[step + 1])
        rhs[i_f] = 0.0
        T = solve_banded((1, 1), ab, rhs)
        T_part, alpha = _react(T[i_f:], alpha, 0.5 * dt_eff, card, max_dalpha)
        T[i_f:] = T_part
        # exotherm kicks moved the interface neighbours; restore the
        # zero-capacity flux-matching constraint before storing
        T[i_f] = (g_t * T[i_f - 1] + g_c * T[i_f + 1]) / scale
        if not np.all(np.isfinite(T)):
            raise SimulationError(
                f"non-finite temperature at step {step + 1} (t={times[step + 1]:.1f} s, "
                f"dt={dt_eff:.3g} s, dz_t={dz_t:.3g} m, dz_c={dz_c:.3g} m)")
        T_hist[:, step + 1] = T
        a_hist[:, step + 1] = alpha

    meta = {
        "design": list(u.as_array()),
        "material": card_to_dict(card),
        "geometry": {"L_t": L_t, "L_part": L_part,
                     "n_z_tool": n_tool, "n_z_part": n_part},
        "scheme": {"method": "crank-nicolson + strang-split explicit kinetics",
                   "dt": dt_eff, "dz_tool": dz_t, "dz_part": dz_c,
                   "max_dalpha": max_dalpha},
        "initial": {"T0_degC": T0, "alpha0": alpha0},
        "cycle": {"t_obj": cycle.t_obj, "t_end": cycle.t_end,
                  "cooldown_rate": cooldown_rate},
    }
    return SimResult(times=times, z_nodes=z, T=T_hist, alpha=a_hist,
                     interface_index=i_f, L_t=L_t, L_part=L_part,
                     t_obj=cycle.t_obj, meta=meta)


def probe(res: SimResult, z: float, t: float):
    """Bilinear interpolation of (T, alpha) at position ``z`` (m), time ``t`` (s).

    alpha is None for probes below the tool/part interface.
    """
    if not (res.z_nodes[0] - 1e-12 <= z <= res.z_nodes[-1] + 1e-12):
        raise ValueError(f"z={z} outside [0, {res.z_nodes[-1]}] m")
    if not (res.times[0] - 1e-9 <= t <= res.times[-1] + 1e-9):
        raise ValueError(f"t={t} outside [0, {res.times[-1]}] s")
    j = int(np.clip(np.searchsorted(res.times, t) - 1, 0, len(res.times) - 2))
    w = (t - res.times[j]) / (res.times[j + 1] - res.times[j])
    w = float(np.clip(w, 0.0, 1.0))
    T_col = (1.0 - w) * res.T[:, j] + w * res.T[:, j + 1]
    T_val = float(np.interp(z, res.z_nodes, T_col))
    alpha_val = None
    if z >= res.L_t - 1e-12:
        a_col = (1.0 - w) * res.alpha[:, j] + w * res.alpha[:, j + 1]
        alpha_val = float(np.interp(z, res.part_z, a_col))
    return T_val, alpha_val


def end_state(res: SimResult, t_obj: float):
    """(alpha profile over part nodes, T profile over all nodes) at ``t_obj`` (s)."""
    if not (res.times[0] - 1e-9 <= t_obj <= res.times[-1] + 1e-9):
        raise ValueError(f"t_obj={t_obj} outside stored time range")
    j = int(np.clip(np.searchsorted(res.times, t_obj) - 1, 0, len(res.times) - 2))
    w = (t_obj - res.times[j]) / (res.times[j + 1] - res.times[j])
    w = float(np.clip(w, 0.0, 1.0))
    alpha_profile = (1.0 - w) * res.alpha[:, j] + w * res.alpha[:, j + 1]
    T_profile = (1.0 - w) * res.T[:, j] + w * res.T[:, j + 1]
    return alpha_profile, T_profile


def midpoint_trajectory(res: SimResult):
    """(times, T, alpha) at the part midpoint, linearly interpolated in z."""
    z_mid = res.part_midpoint
    T = np.array([np.interp(z_mid, res.z_nodes, res.T[:, j])
                  for j in range(len(res.times))])
    a = np.array([np.interp(z_mid, res.part_z, res.alpha[:, j])
                  for j in range(len(res.times))])
    return res.times.copy(), T, a


def _write_field_csv(path, z, times, field_values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z"] + [f"{t:.9g}" for t in times])
        for zi, row in zip(z, field_values):
            writer.writerow([f"{zi:.9g}"] + [f"{v:.9g}" for v in row])


def export(res: SimResult, outdir) -> list:
    """Write T.csv / alpha.csv (rows = z, columns = t) plus meta.json.

    Values use 9 significant digits; returns the written paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t_path = outdir / "T.csv"
    a_path = outdir / "alpha.csv"
    m_path = outdir / "meta.json"
    _write_field_csv(t_path, res.z_nodes, res.times, res.T)
    _write_field_csv(a_path, res.part_z, res.times, res.alpha)
    meta = dict(res.meta)
    meta["t_obj"] = res.t_obj
    m_path.write_text(json.dumps(meta, indent=2) + "\n")
    return [t_path, a_path, m_path]
