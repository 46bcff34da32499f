"""Time integration of i u_t + Lap u = lambda w(x) |u|^sigma u.

Tensor grids: Strang splitting with an exact spectral free propagator and
pointwise nonlinear phases (both substeps preserve the discrete mass to
roundoff).  Radial grids: linearly implicit Crank-Nicolson with a relaxed
nonlinear density (two-level update of phi ~ w |u|^sigma), which keeps the
one-step map a Cayley transform of a self-adjoint operator and therefore
conserves the discrete mass exactly up to the tridiagonal solve.

Step size is adapted so the nonlinear phase rotation per step stays below
``safety`` radians; blow-up is detected (never proven) from the growth of
the H1 seminorm, with dt underflow and non-finite values as the other early
terminations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.fft
import scipy.linalg

from .exponents import CriticalityParams
from .grids import (
    Field,
    GridSpec,
    PotentialWeight,
    hs_norm,
    radial_laplacian_bands,
    thread_count,
    wavenumber_sq_values,
    weight_values,
)

TERMINATIONS = ("completed", "blowup_detected", "dt_underflow", "non_finite")


@dataclass
class SimConfig:
    """One run's configuration.

    ``lam`` is the signed real coupling of the evolution equation
    (+1 repulsive/defocusing, -1 attractive/focusing, 0 free); the exact
    parameter tuple stays rational inside ``params``.
    """

    params: CriticalityParams
    grid: GridSpec
    weight: PotentialWeight
    lam: float
    dt_init: float
    t_end: float
    dt_min: float
    blowup_ratio: float = 1e3
    safety: float = 0.5
    record_every: int = 1
    dealias: bool = False

    def __post_init__(self):
        if self.dt_init <= 0 or self.t_end <= 0:
            raise ValueError("dt_init and t_end must be positive")
        if not self.dt_min < self.dt_init:
            raise ValueError("dt_min must be smaller than dt_init")
        if not self.blowup_ratio > 1:
            raise ValueError("blowup_ratio must exceed 1")
        if not 0 < self.safety < 1:
            raise ValueError("safety must lie in (0, 1)")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        # keep the weight evaluable on this grid (raises on bad delta)
        weight_values(self.grid, self.weight)

    @property
    def sigma(self) -> float:
        return float(self.params.sigma_value)


@dataclass
class RunOutcome:
    termination: str
    t_final: float
    series: List
    final_field: Field
    steps: int = 0


def _dealias_mask(grid: GridSpec):
    k1 = scipy.fft.fftfreq(grid.points) * grid.points
    keep1 = np.abs(k1) <= grid.points / 3.0
    meshes = np.meshgrid(*([keep1] * grid.n), indexing="ij")
    keep = np.ones(grid.shape, dtype=bool)
    for m in meshes:
        keep &= m
    return keep


def strang_step(u: Field, cfg: SimConfig, dt: float) -> Field:
    """One Strang step on a tensor grid: half nonlinear phase, exact spectral
    free flight, half nonlinear phase."""
    if u.grid.kind != "tensor":
        raise ValueError("strang_step runs on tensor grids")
    grid = u.grid
    w = weight_values(grid, cfg.weight)
    sig = cfg.sigma
    v = u.values
    if cfg.lam != 0.0:
        v = v * np.exp(-0.5j * dt * cfg.lam * w * np.abs(v) ** sig)
    vhat = scipy.fft.fftn(v, workers=thread_count())
    vhat *= np.exp(-1j * dt * wavenumber_sq_values(grid))
    if cfg.dealias:
        vhat *= _dealias_mask(grid)
    v = scipy.fft.ifftn(vhat, workers=thread_count())
    if cfg.lam != 0.0:
        v = v * np.exp(-0.5j * dt * cfg.lam * w * np.abs(v) ** sig)
    return Field(grid=grid, values=v, time_tag=u.time_tag + dt)


def radial_cn_step(
    u: Field, cfg: SimConfig, dt: float, phi: Optional[np.ndarray] = None
):
    """One relaxed Crank-Nicolson step on a radial grid.

    The nonlinear density phi ~ w |u|^sigma is advanced by the two-level
    relaxation update phi_next = 2 w |u|^sigma - phi, then the linear system
    (1 - i dt/2 (Lap - lam phi_next)) u_next = (1 + i dt/2 (Lap - lam phi_next)) u
    is solved by a tridiagonal solve.  ``phi`` is the previous half-step
    density; a cold start uses w |u|^sigma.

    Returns ``(field, phi_next)``; thread phi_next into the following call.
    """
    if u.grid.kind != "radial":
        raise ValueError("radial_cn_step runs on radial grids")
    grid = u.grid
    w = weight_values(grid, cfg.weight)
    sig = cfg.sigma
    density = w * np.abs(u.values) ** sig
    if phi is None:
        phi = density
    phi_next = 2.0 * density - phi

    lower, diag, upper = radial_laplacian_bands(grid)
    m_diag = diag - cfg.lam * phi_next
    half = 0.5j * dt
    v = u.values
    # rhs = (1 + i dt/2 M) u with M = Lap - lam*phi
    rhs = v + half * (m_diag * v)
    rhs[:-1] += half * upper[:-1] * v[1:]
    rhs[1:] += half * lower[1:] * v[:-1]
    # banded matrix for (1 - i dt/2 M)
    ab = np.zeros((3, grid.points), dtype=np.complex128)
    ab[0, 1:] = -half * upper[:-1]
    ab[1, :] = 1.0 - half * m_diag
    ab[2, :-1] = -half * lower[1:]
    try:
        v_next = scipy.linalg.solve_banded((1, 1), ab, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise FloatingPointError(f"tridiagonal solve failed: {exc}") from exc
    return Field(grid=grid, values=v_next, time_tag=u.time_tag + dt), phi_next


def adapt_dt(u: Field, cfg: SimConfig, dt_prev: float) -> float:
    """Next step size: cap the nonlinear phase rotation per step at
    ``safety`` radians, clamped to [dt_min, dt_init]."""
    if cfg.lam == 0.0:
        return cfg.dt_init
    w = weight_values(u.grid, cfg.weight)
    rate = abs(cfg.lam) * float(np.max(w * np.abs(u.values) ** cfg.sigma))
    if rate <= 0.0:
        return cfg.dt_init
    dt = min(cfg.dt_init, cfg.safety / rate)
    return max(cfg.dt_min, dt)


def run(cfg: SimConfig, u0: Field) -> RunOutcome:
    """Advance from t = 0 to t_end with the grid-appropriate stepper.

    Early terminations: ``blowup_detected`` when the H1 seminorm grows by
    ``blowup_ratio``; ``dt_underflow`` when the adaptive step pins at dt_min
    for 10 consecutive steps; ``non_finite`` on NaN/Inf.
    """
    from .diagnostics import make_record

    if u0.grid != cfg.grid:
        raise ValueError("initial field lives on a different grid")
    u = Field(grid=u0.grid, values=u0.values.copy(), time_tag=0.0)
    h1_0 = hs_norm(u, 1)
    records = [make_record(u, cfg, dt=cfg.dt_init)]
    t = 0.0
    steps = 0
    pinned = 0
    dt_prev = cfg.dt_init
    phi = None
    termination = "completed"
    t_stop = cfg.t_end * (1.0 - 1e-12)

    while t < t_stop:
        dt = adapt_dt(u, cfg, dt_prev)
        if dt <= cfg.dt_min:
            pinned += 1
            if pinned >= 10:
                termination = "dt_underflow"
                break
        else:
            pinned = 0
        dt_step = min(dt, cfg.t_end - t)
        try:
            if cfg.grid.kind == "tensor":
                u = strang_step(u, cfg, dt_step)
            else:
                u, phi = radial_cn_step(u, cfg, dt_step, phi)
        except FloatingPointError:
            termination = "non_finite"
            break
        if not np.all(np.isfinite(u.values.view(np.float64))):
            termination = "non_finite"
            break
        t += dt_step
        steps += 1
        dt_prev = dt
        h1 = hs_norm(u, 1)
        recorded = False
        if steps % cfg.record_every == 0:
            records.append(make_record(u, cfg, dt=dt_step, h1sq=h1 * h1))
            recorded = True
        if h1_0 > 0.0 and h1 >= cfg.blowup_ratio * h1_0:
            termination = "blowup_detected"
            if not recorded:
                records.append(make_record(u, cfg, dt=dt_step, h1sq=h1 * h1))
            break

    if termination == "completed" and records[-1].t < t:
        records.append(make_record(u, cfg, dt=dt_prev))
    return RunOutcome(
        termination=termination,
        t_final=t,
        series=records,
        final_field=u,
        steps=steps,
    )
