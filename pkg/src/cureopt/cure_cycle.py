"""Two-hold autoclave air-temperature profiles and design-space handling."""

from dataclasses import dataclass
import json
from pathlib import Path

import numpy as np

CELSIUS_OFFSET = 273.15

DESIGN_FIELDS = ("r1", "r2", "hd1", "hd2", "ht1", "ht2", "h_top", "h_bot", "L_t")

_DATA_DIR = Path(__file__).parent / "data"


class InvalidDesignError(ValueError):
    """Raised when a design vector cannot form a physical cure cycle."""


@dataclass(frozen=True)
class DesignVector:
    """The nine cure-cycle / tool / equipment design variables (paper units)."""

    r1: float     # first heating rate (degC/min)
    r2: float     # second heating rate (degC/min)
    hd1: float    # first hold duration (min)
    hd2: float    # second hold duration (min)
    ht1: float    # first hold temperature (degC)
    ht2: float    # second hold temperature (degC)
    h_top: float  # top-surface convective HTC (W/m^2 K)
    h_bot: float  # bottom-surface convective HTC (W/m^2 K)
    L_t: float    # tool thickness (cm)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in DESIGN_FIELDS], dtype=float)

    @classmethod
    def from_array(cls, values) -> "DesignVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (9,):
            raise ValueError("design vector must have exactly 9 components")
        return cls(*(float(v) for v in values))


@dataclass
class DesignBounds:
    """Per-variable (lower, upper) bounds, ordered as DESIGN_FIELDS.

    Equal lower/upper pins a variable (used by reduced design spaces);
    normalization maps pinned components to 0.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != (9,) or self.upper.shape != (9,):
            raise ValueError("bounds must have 9 components")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def halfwidth(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def contains(self, u: DesignVector, tol=1e-9) -> bool:
        x = u.as_array()
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def to_dict(self) -> dict:
        return {f: [float(lo), float(hi)]
                for f, lo, hi in zip(DESIGN_FIELDS, self.lower, self.upper)}

    @classmethod
    def from_dict(cls, data: dict) -> "DesignBounds":
        lower = [data[f][0] for f in DESIGN_FIELDS]
        upper = [data[f][1] for f in DESIGN_FIELDS]
        return cls(np.array(lower), np.array(upper))


def default_bounds() -> DesignBounds:
    """The shipped full design-space bounds."""
    data = json.loads((_DATA_DIR / "design_bounds.json").read_text())
    return DesignBounds.from_dict(data)


@dataclass(frozen=True)
class Segment:
    """One linear piece of the air-temperature program (seconds / Kelvin)."""

    name: str
    t_start: float
    t_end: float
    T_start: float
    T_end: float


@dataclass(frozen=True)
class CureCycle:
    """Piecewise-linear air-temperature program.

    ``t_obj`` marks the end of the second hold, where end-of-cure objectives
    are evaluated; the cooldown after it only closes out the program.
    """

    segments: tuple
    t_end: float  # total duration (s)
    t_obj: float  # objective-evaluation time = end of second hold (s)

    def breakpoints(self):
        times = [self.segments[0].t_start] + [s.t_end for s in self.segments]
        temps = [self.segments[0].T_start] + [s.T_end for s in self.segments]
        return np.array(times), np.array(temps)


def build_cycle(u: DesignVector, T0=20.0, cooldown_rate=2.0) -> CureCycle:
    """Construct the two-hold cycle for design ``u`` starting from ``T0`` (degC).

    Ramp durations follow from the heating rates; a cooldown back to ``T0``
    at ``cooldown_rate`` (degC/min) is appended after the second hold.
    """
    if u.r1 <= 0.0 or u.r2 <= 0.0 or cooldown_rate <= 0.0:
        raise InvalidDesignError("heating/cooling rates must be positive")
    if u.ht1 <= T0:
        raise InvalidDesignError(f"ht1 ({u.ht1} degC) must exceed T0 ({T0} degC)")
    if u.ht2 <= u.ht1:
        raise InvalidDesignError(f"ht2 ({u.ht2} degC) must exceed ht1 ({u.ht1} degC)")
    T0_K = T0 + CELSIUS_OFFSET
    ht1_K = u.ht1 + CELSIUS_OFFSET
    ht2_K = u.ht2 + CELSIUS_OFFSET
    ramp1 = 60.0 * (u.ht1 - T0) / u.r1
    ramp2 = 60.0 * (u.ht2 - u.ht1) / u.r2
    hold1 = 60.0 * u.hd1
    hold2 = 60.0 * u.hd2
    cool = 60.0 * (u.ht2 - T0) / cooldown_rate
    t1 = ramp1
    t2 = t1 + hold1
    t3 = t2 + ramp2
    t4 = t3 + hold2
    t5 = t4 + cool
    segments = (
        Segment("ramp1", 0.0, t1, T0_K, ht1_K),
        Segment("hold1", t1, t2, ht1_K, ht1_K),
        Segment("ramp2", t2, t3, ht1_K, ht2_K),
        Segment("hold2", t3, t4, ht2_K, ht2_K),
        Segment("cooldown", t4, t5, ht2_K, T0_K),
    )
    return CureCycle(segments=segments, t_end=t5, t_obj=t4)


def air_temperature(cycle: CureCycle, t):
    """Autoclave air temperature (K) at time ``t`` (s, scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-9) or np.any(t_arr > cycle.t_end + 1e-9):
        raise ValueError(f"time outside [0, {cycle.t_end}] s")
    times, temps = cycle.breakpoints()
    out = np.interp(t_arr, times, temps)
    return out if out.ndim else float(out)


def clip_design(u: DesignVector, b: DesignBounds) -> DesignVector:
    """Project each component onto its bounds; idempotent."""
    return DesignVector.from_array(np.clip(u.as_array(), b.lower, b.upper))


def normalize_design(u: DesignVector, b: DesignBounds) -> np.ndarray:
    """Affine map of ``u`` into [-1, 1]^9; pinned components map to 0."""
    half = b.halfwidth
    safe = np.where(half > 0.0, half, 1.0)
    return np.where(half > 0.0, (u.as_array() - b.midpoint) / safe, 0.0)


def denormalize_design(x, b: DesignBounds) -> DesignVector:
    """Inverse of :func:`normalize_design`."""
    x = np.asarray(x, dtype=float)
    return DesignVector.from_array(b.midpoint + x * b.halfwidth)


def sample_designs(b: DesignBounds, count: int, seed: int) -> list:
    """``count`` independent uniform samples of the design space."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(b.lower, b.upper, size=(count, 9))
    return [DesignVector.from_array(row) for row in draws]


def max_objective_time(b: DesignBounds, T0=20.0) -> float:
    """Largest t_obj (s) over the design space (the slowest admissible cycle)."""
    r1_min, r2_min = b.lower[0], b.lower[1]
    hd1_max, hd2_max = b.upper[2], b.upper[3]
    ht2_max = b.upper[5]
    # total ramp time (ht1-T0)/r1 + (ht2-ht1)/r2 is linear in ht1
    slope = 1.0 / r1_min - 1.0 / r2_min
    ht1 = b.upper[4] if slope > 0.0 else b.lower[4]
    ramps = (ht1 - T0) / r1_min + (ht2_max - ht1) / r2_min
    return 60.0 * (ramps + hd1_max + hd2_max)
