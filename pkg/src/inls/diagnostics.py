"""Run observables: energy, virial quantities, localized cutoffs, the
threshold function, and the blow-up classifier."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .dynamics import SimConfig
from .grids import (
    Field,
    boundary_mass_fraction,
    hs_norm,
    mass,
    variance,
    weighted_potential_integral,
    weighted_quadratic,
)
from .ground_state import GroundStateQuantities

SYMMETRY_CLASSES = ("finite_variance", "radial", "cylindrical", "none")

CSV_COLUMNS = (
    "t",
    "mass",
    "energy",
    "h1dot_sq",
    "weighted_potential",
    "variance",
    "virial_rhs",
    "localized_virial",
    "boundary_mass_fraction",
    "dt",
    "max_amp",
)


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    h1dot_sq: float
    weighted_potential: float
    variance: Optional[float]
    virial_rhs: float
    localized_virial: Optional[float]
    boundary_mass_fraction: float
    dt: float
    max_amp: float

    def csv_row(self):
        def cell(x):
            return "" if x is None else f"{x:.17g}"

        return [cell(getattr(self, name)) for name in CSV_COLUMNS]


def energy(u: Field, cfg: SimConfig) -> float:
    """Conserved energy: |u|_H1^2 / 2 + (lambda/(sigma+2)) * weighted potential."""
    h1 = hs_norm(u, 1)
    pot = weighted_potential_integral(u, cfg.weight, cfg.sigma)
    return 0.5 * h1 * h1 + cfg.lam / (cfg.sigma + 2.0) * pot


def virial_rhs(u: Field, cfg: SimConfig) -> float:
    """Second time derivative of the variance predicted by the virial
    identity, with the run's regularized weight:

        8 |u|_H1^2 + 4 lam (n sigma + 2 b)/(sigma + 2) * weighted potential

    (for lam = -1 this is the focusing identity; lam = 0 drops the term)."""
    h1sq = hs_norm(u, 1) ** 2
    return _virial_rhs_from(h1sq, weighted_potential_integral(u, cfg.weight, cfg.sigma), cfg)


def _virial_rhs_from(h1sq: float, pot: float, cfg: SimConfig) -> float:
    n = cfg.grid.n
    sig = cfg.sigma
    b = float(cfg.params.b)
    return 8.0 * h1sq + 4.0 * cfg.lam * (n * sig + 2.0 * b) / (sig + 2.0) * pot


def theta_cutoff(r):
    """C1 cutoff: r^2 on [0,1], -r^2+4r-2 on [1,2], plateau 2 beyond.

    Returns (value, first derivative, second derivative); the second
    derivative takes values {2, -2, 0}, so theta'' <= 2 everywhere.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    if np.any(r < 0):
        raise ValueError("theta is defined for r >= 0")
    value = np.where(r <= 1.0, r**2, np.where(r <= 2.0, -(r**2) + 4.0 * r - 2.0, 2.0))
    deriv = np.where(r <= 1.0, 2.0 * r, np.where(r <= 2.0, -2.0 * r + 4.0, 0.0))
    second = np.where(r <= 1.0, 2.0, np.where(r <= 2.0, -2.0, 0.0))
    if scalar:
        return float(value[0]), float(deriv[0]), float(second[0])
    return value, deriv, second


def phi_R_weight(x_norm, R: float):
    """Radial localized weight R^2 theta(|x|/R); equals |x|^2 inside |x| <= R
    and plateaus at 2 R^2 beyond 2R."""
    if not R > 1:
        raise ValueError("cutoff radius R must exceed 1")
    value, _, _ = theta_cutoff(np.asarray(x_norm, dtype=float) / R)
    return R**2 * value


def cylindrical_phi_R(y_norm, x_last, R: float):
    """Cylindrical localized weight R^2 theta(|y|/R) + x_n^2 on the split
    x = (y, x_n)."""
    return phi_R_weight(y_norm, R) + np.asarray(x_last, dtype=float) ** 2


def localized_virial(u: Field, R: float) -> float:
    """Integral of phi_R(x) |u|^2."""
    if u.grid.kind == "radial":
        return weighted_quadratic(u, lambda r: phi_R_weight(r, R))
    return weighted_quadratic(
        u, lambda *coords: phi_R_weight(np.sqrt(sum(c**2 for c in coords)), R)
    )


def g_threshold(y: float, gs: GroundStateQuantities) -> float:
    """Threshold function g(y) = y^2/2 - (C^(sigma1+2)/(sigma1+2)) y^(sigma1+2)
    built from the sharp embedding constant; its maximizer is the bubble's
    H1 seminorm and the maximum equals the bubble's energy."""
    if y < 0:
        raise ValueError("argument must be >= 0")
    sig1 = gs.profile.sigma1
    return 0.5 * y**2 - gs.c_hs ** (sig1 + 2.0) / (sig1 + 2.0) * y ** (sig1 + 2.0)


def make_record(
    u: Field, cfg: SimConfig, dt: float, h1sq: Optional[float] = None
) -> DiagnosticsRecord:
    if h1sq is None:
        h1 = hs_norm(u, 1)
        h1sq = h1 * h1
    pot = weighted_potential_integral(u, cfg.weight, cfg.sigma)
    return DiagnosticsRecord(
        t=u.time_tag,
        mass=mass(u),
        energy=0.5 * h1sq + cfg.lam / (cfg.sigma + 2.0) * pot,
        h1dot_sq=h1sq,
        weighted_potential=pot,
        variance=variance(u),
        virial_rhs=_virial_rhs_from(h1sq, pot, cfg),
        localized_virial=None,
        boundary_mass_fraction=boundary_mass_fraction(u),
        dt=dt,
        max_amp=float(np.max(np.abs(u.values))),
    )


@dataclass(frozen=True)
class ScaledGroundState:
    """Initial data c * W described exactly by its scale factor; the
    classifier then uses the scaling algebra instead of grid quadrature
    (uniform grids cannot resolve the bubble's slow r^-(n-2) tail)."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("scale factor must be positive")


@dataclass
class ThresholdReport:
    e0: float
    h1_0: float
    e_w: float
    h1_w: float
    case: str  # negative_energy | below_ground_state_above_norm | no_verdict
    symmetry: str
    delta: Optional[float]


def classify_blowup(
    u0: Union[Field, ScaledGroundState],
    cfg: SimConfig,
    gs: GroundStateQuantities,
    symmetry: str = "none",
) -> ThresholdReport:
    """Compare the data's energy and H1 seminorm against the bubble's.

    Cases: ``negative_energy`` when E(u0) < 0;
    ``below_ground_state_above_norm`` when 0 <= E(u0) < E(W) and
    |u0|_H1 > |W|_H1 (reporting the largest admissible energy gap
    delta = 1 - E(u0)/E(W)); otherwise ``no_verdict``.

    Restricted to the focusing energy-critical configuration; a cylindrical
    symmetry claim additionally needs b >= 4 - n.
    """
    params = cfg.params
    n = params.n
    if n < 3:
        raise ValueError("the blow-up classifier requires n >= 3")
    if params.sigma_value != (4 - 2 * params.b) / Fraction(n - 2):
        raise ValueError("classifier requires the energy-critical power (4-2b)/(n-2)")
    if not cfg.lam < 0:
        raise ValueError("classifier requires a focusing coupling (lam < 0)")
    if symmetry not in SYMMETRY_CLASSES:
        raise ValueError(f"symmetry must be one of {SYMMETRY_CLASSES}")
    if symmetry == "cylindrical" and params.b < 4 - n:
        raise ValueError(
            f"cylindrical symmetry needs b >= 4-n = {4 - n}, got b = {params.b}"
        )

    e_w = gs.energy
    h1_w = gs.h1dot
    if isinstance(u0, ScaledGroundState):
        c = u0.c
        sig1 = gs.profile.sigma1
        e0 = (0.5 * c**2 - c ** (sig1 + 2.0) / (sig1 + 2.0)) * gs.h1dot_sq
        h1_0 = c * h1_w
    else:
        e0 = energy(u0, cfg)
        h1_0 = hs_norm(u0, 1)

    delta = None
    if e0 < 0.0:
        case = "negative_energy"
    elif e0 < e_w and h1_0 > h1_w:
        case = "below_ground_state_above_norm"
        delta = 1.0 - e0 / e_w
    else:
        case = "no_verdict"
    return ThresholdReport(
        e0=e0, h1_0=h1_0, e_w=e_w, h1_w=h1_w, case=case, symmetry=symmetry, delta=delta
    )


def second_difference(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Three-point second time derivative on a possibly nonuniform grid;
    exact for quadratics.  Endpoints are NaN."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.full_like(v, np.nan)
    dt_fwd = t[2:] - t[1:-1]
    dt_bwd = t[1:-1] - t[:-2]
    slope_fwd = (v[2:] - v[1:-1]) / dt_fwd
    slope_bwd = (v[1:-1] - v[:-2]) / dt_bwd
    out[1:-1] = 2.0 * (slope_fwd - slope_bwd) / (t[2:] - t[:-2])
    return out
