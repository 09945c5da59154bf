"""Thermophysical material constants and the resin cure-kinetics rate law."""

from dataclasses import dataclass, asdict
import json
from pathlib import Path

import numpy as np

from .autodiff import Var, exp, clip

GAS_CONSTANT = 8.314  # J/(mol K)

# Clamp used by the derivative/graph paths: keeps alpha^(m-1) finite at the
# boundaries when m, n < 1 and guards against slightly out-of-range network
# predictions. The plain rate keeps its exact zeros at alpha = 0 and 1.
ALPHA_EPS = 1e-9

_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class KineticsConstants:
    """Arrhenius / diffusion-sigmoid cure-kinetics constants."""

    A: float   # pre-exponential factor (1/s)
    dE: float  # activation energy (J/mol)
    m: float   # autocatalytic exponent on alpha (-)
    n: float   # exponent on (1 - alpha) (-)
    C: float   # diffusion-sigmoid steepness (-)
    C0: float  # sigmoid offset (-)
    CT: float  # sigmoid temperature coefficient (1/K)
    R: float = GAS_CONSTANT  # gas constant (J/mol K)


@dataclass(frozen=True)
class MaterialCard:
    """Thermal constants for the tool/composite pair plus resin kinetics."""

    name: str
    a_t: float  # tool thermal diffusivity (m^2/s)
    a_c: float  # composite through-thickness thermal diffusivity (m^2/s)
    b_c: float  # exotherm coefficient (K): adiabatic temperature rise per unit cure
    k_t: float  # tool thermal conductivity (W/m K)
    k_c: float  # composite through-thickness conductivity (W/m K)
    kinetics: KineticsConstants


def cure_rate(alpha, T, k: KineticsConstants):
    """Cure rate d(alpha)/dt in 1/s for degree of cure ``alpha`` at temperature ``T`` (K).

    Accepts scalars or numpy arrays. Exactly zero at alpha = 0 and alpha = 1
    (for m, n > 0). Raises ValueError outside the physical domain.
    """
    alpha = np.asarray(alpha, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(alpha < 0.0) or np.any(alpha > 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    if np.any(T <= 0.0):
        raise ValueError("T must be positive (Kelvin)")
    arrhenius = k.A * np.exp(-k.dE / (k.R * T))
    w = np.exp(k.C * (alpha - (k.C0 + k.CT * T)))
    rate = arrhenius * alpha**k.m * (1.0 - alpha) ** k.n / (1.0 + w)
    return rate if rate.ndim else float(rate)


def cure_rate_expr(alpha, T, k: KineticsConstants):
    """Unvalidated cure rate usable inside autodiff graphs.

    Same algebra as :func:`cure_rate` but clamps alpha to
    [ALPHA_EPS, 1 - ALPHA_EPS] so that out-of-range intermediate predictions
    and fractional-power derivatives stay finite. Accepts floats, numpy
    arrays, or autodiff :class:`~cureopt.autodiff.Var` values.
    """
    a = clip(alpha, ALPHA_EPS, 1.0 - ALPHA_EPS)
    arrhenius = k.A * exp(-k.dE / k.R / T)
    w = exp(k.C * (a - (k.C0 + k.CT * T)))
    return arrhenius * a**k.m * (1.0 - a) ** k.n / (1.0 + w)


def cure_rate_partials(alpha, T, k: KineticsConstants):
    """Analytic (d rate/d alpha, d rate/d T) at ``alpha``, ``T`` (K).

    alpha is clamped to [ALPHA_EPS, 1 - ALPHA_EPS] internally so the partials
    stay finite at the domain boundaries.
    """
    alpha_arr = np.asarray(alpha, dtype=float)
    T_arr = np.asarray(T, dtype=float)
    if np.any(alpha_arr < 0.0) or np.any(alpha_arr > 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    if np.any(T_arr <= 0.0):
        raise ValueError("T must be positive (Kelvin)")
    a = np.clip(alpha_arr, ALPHA_EPS, 1.0 - ALPHA_EPS)
    E = np.exp(-k.dE / (k.R * T_arr))
    w = np.exp(k.C * (a - (k.C0 + k.CT * T_arr)))
    S = 1.0 / (1.0 + w)
    P = a**k.m * (1.0 - a) ** k.n
    rate = k.A * E * S * P
    dP_da = P * (k.m / a - k.n / (1.0 - a))
    dS_da = -k.C * w * S * S
    d_alpha = k.A * E * (dS_da * P + S * dP_da)
    dE_dT = E * k.dE / (k.R * T_arr**2)
    dS_dT = k.C * k.CT * w * S * S
    d_T = k.A * P * (dE_dT * S + E * dS_dT)
    if alpha_arr.ndim or T_arr.ndim:
        return d_alpha, d_T
    return float(d_alpha), float(d_T)


def validate_card(card: MaterialCard) -> list[str]:
    """Return a list of violated invariants; empty list means the card is valid."""
    violations = []
    for attr in ("a_t", "a_c", "k_t", "k_c"):
        value = getattr(card, attr)
        if not (np.isfinite(value) and value > 0.0):
            violations.append(f"{attr} > 0")
    if not (np.isfinite(card.b_c) and card.b_c >= 0.0):
        violations.append("b_c >= 0")
    kin = card.kinetics
    if not (np.isfinite(kin.A) and kin.A > 0.0):
        violations.append("A > 0")
    if not (np.isfinite(kin.dE) and kin.dE >= 0.0):
        violations.append("dE >= 0")
    if not (np.isfinite(kin.R) and kin.R > 0.0):
        violations.append("R > 0")
    if not (np.isfinite(kin.m) and kin.m > 0.0):
        violations.append("m > 0")
    if not (np.isfinite(kin.n) and kin.n > 0.0):
        violations.append("n > 0")
    for attr in ("C", "C0", "CT"):
        if not np.isfinite(getattr(kin, attr)):
            violations.append(f"{attr} finite")
    return violations


def card_to_dict(card: MaterialCard) -> dict:
    d = asdict(card)
    d["kinetics"] = asdict(card.kinetics)
    return d


def card_from_dict(data: dict) -> MaterialCard:
    kin = KineticsConstants(**data["kinetics"])
    fields = {key: data[key] for key in ("name", "a_t", "a_c", "b_c", "k_t", "k_c")}
    return MaterialCard(kinetics=kin, **fields)


def save_card(card: MaterialCard, path) -> None:
    Path(path).write_text(json.dumps(card_to_dict(card), indent=2) + "\n")


def load_card(path) -> MaterialCard:
    data = json.loads(Path(path).read_text())
    return card_from_dict(data)


def default_card() -> MaterialCard:
    """The shipped AS4/8552-on-aluminium-tool card."""
    return load_card(_DATA_DIR / "as4_8552.json")


def synthetic_card() -> MaterialCard:
    """Synthetic unit test-card (A=1, dE=0, C=0, m=n=1) for deterministic tests."""
    return load_card(_DATA_DIR / "test_card.json")
