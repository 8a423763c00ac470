"""Inverse design: element synthesis, width search, and curve fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple

import numpy as np

from .analysis import (
    FrequencyGrid,
    ResponseCurve,
    extract_metrics,
    network_smatrix,
    passband_freq,
    sweep_response,
    zero_freq,
)
from .builder import (
    CalibrationConstants,
    CircuitParams,
    GeometryParams,
    build_network,
    geometry_with_width,
    grid_inductance,
    params_from_geometry,
)
from .errors import DomainError, InfeasibleSpecError, InfeasibleTargetError
from .twoport import NORMAL


@dataclass(frozen=True)
class DesignSpec:
    """Target passband and transmission-zero frequencies with a pinned C1.

    Two equations fix three unknowns, so the capacitance (the value hardest
    to tune physically) is chosen by the caller.
    """

    f_passband: float
    f_zero: float
    c1: float
    q_target: float | None = None
    fbw_target: float | None = None

    def __post_init__(self):
        if not 0 < self.f_passband:
            raise DomainError("passband target must be positive")
        if not self.c1 > 0:
            raise DomainError("pinned capacitance must be positive")
        if not self.f_passband < self.f_zero:
            raise InfeasibleSpecError(
                f"passband target {self.f_passband} must lie below the "
                f"transmission-zero target {self.f_zero}"
            )


class SynthesizedLC(NamedTuple):
    l: float
    l1: float
    c1: float


def synthesize_lc(spec: DesignSpec) -> SynthesizedLC:
    """Invert the resonance formulas for (L, L1) given targets and C1.

    l1 = 1 / ((2 pi f_zero)^2 c1);  l = 1 / ((2 pi f_passband)^2 c1) - l1.
    f_passband < f_zero guarantees l > 0.
    """
    w_z = 2.0 * math.pi * spec.f_zero
    w_p = 2.0 * math.pi * spec.f_passband
    l1 = 1.0 / (w_z * w_z * spec.c1)
    l = 1.0 / (w_p * w_p * spec.c1) - l1
    return SynthesizedLC(l=l, l1=l1, c1=spec.c1)


def loss_budget_for_q(q_target: float, l: float, l1: float, c1: float) -> float:
    """Total series loss R + R1 that yields the requested quality factor."""
    if not q_target > 0:
        raise DomainError("quality-factor target must be positive")
    if l < 0 or l1 <= 0 or c1 <= 0:
        raise DomainError("loss budget requires l >= 0, l1 > 0, c1 > 0")
    return math.sqrt((l + l1) / c1) / q_target


def _auto_grid(
    geometry: GeometryParams,
    cal: CalibrationConstants,
    l1: float,
    c1: float,
    w_range: tuple[float, float],
) -> FrequencyGrid:
    """Grid bracketing the passband over the whole width range."""
    f_low = passband_freq(grid_inductance(w_range[0], geometry.period, cal.l_scale), l1, c1)
    f_z = zero_freq(l1, c1)
    return FrequencyGrid(0.35 * f_low, 1.2 * f_z, 2001)


def _fbw_at_width(
    w: float,
    geometry: GeometryParams,
    cal: CalibrationConstants,
    l1: float,
    c1: float,
    grid: FrequencyGrid,
) -> float:
    params = params_from_geometry(geometry_with_width(geometry, w), cal, l1, c1)
    curve = sweep_response(build_network(params), grid, NORMAL)
    return extract_metrics(curve).fbw


def width_for_bandwidth(
    fbw_target: float,
    geometry: GeometryParams,
    cal: CalibrationConstants,
    l1: float,
    c1: float,
    w_range: tuple[float, float],
    *,
    grid: FrequencyGrid | None = None,
    fbw_tol: float = 1e-3,
    w_tol: float = 1e-6,
) -> float:
    """Bisect the grid strip width until the simulated FBW meets the target.

    Relies on the fractional bandwidth being strictly decreasing in w.
    Raises InfeasibleTargetError (reporting the achievable range) when the
    target lies outside [fbw(w_max), fbw(w_min)].
    """
    w_lo, w_hi = w_range
    if not 0 < w_lo <= w_hi < geometry.period:
        raise DomainError("width range must satisfy 0 < w_min <= w_max < period")
    if grid is None:
        grid = _auto_grid(geometry, cal, l1, c1, w_range)

    fbw_max = _fbw_at_width(w_lo, geometry, cal, l1, c1, grid)
    if w_lo == w_hi:
        if abs(fbw_max - fbw_target) < fbw_tol:
            return w_lo
        raise InfeasibleTargetError(
            f"degenerate width bracket: fbw({w_lo}) = {fbw_max:.6f} misses the "
            f"target {fbw_target:.6f}",
            achievable=(fbw_max, fbw_max),
        )
    fbw_min = _fbw_at_width(w_hi, geometry, cal, l1, c1, grid)
    if not fbw_min - fbw_tol <= fbw_target <= fbw_max + fbw_tol:
        raise InfeasibleTargetError(
            f"bandwidth target {fbw_target:.6f} outside the achievable range "
            f"[{fbw_min:.6f}, {fbw_max:.6f}] for widths [{w_lo}, {w_hi}]",
            achievable=(fbw_min, fbw_max),
        )

    while w_hi - w_lo > w_tol:
        w_mid = 0.5 * (w_lo + w_hi)
        fbw_mid = _fbw_at_width(w_mid, geometry, cal, l1, c1, grid)
        if abs(fbw_mid - fbw_target) < fbw_tol:
            return w_mid
        if fbw_mid > fbw_target:
            w_lo = w_mid
        else:
            w_hi = w_mid
    return 0.5 * (w_lo + w_hi)


#: Circuit fields that fit_circuit may treat as free.
FITTABLE = ("L", "L1", "C1", "R", "R1")


@dataclass(frozen=True)
class FitProblem:
    """Least-squares match of a model |s21| curve to observed samples.

    base supplies the fixed parameters and the network order; free names
    the CircuitParams fields to adjust.  Bounds are hard box constraints.
    """

    observed: ResponseCurve
    base: CircuitParams
    free: tuple[str, ...]
    initial: Mapping[str, float]
    bounds: Mapping[str, tuple[float, float]]
    max_iterations: int = 500
    step_tol: float = 1e-8
    improvement_tol: float = 1e-12
    mirrored: bool = True

    def __post_init__(self):
        if not self.free:
            raise DomainError("fit requires at least one free parameter")
        for name in self.free:
            if name not in FITTABLE:
                raise DomainError(f"unknown fit parameter {name!r}; choose from {FITTABLE}")
            if name not in self.initial:
                raise DomainError(f"missing initial guess for {name!r}")
            if name not in self.bounds:
                raise DomainError(f"missing bounds for {name!r}")
            lo, hi = self.bounds[name]
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise DomainError(f"bounds for {name!r} must be finite with lo < hi")
            if name in ("L", "L1", "C1") and lo <= 0:
                raise DomainError(f"reactive element {name!r} needs positive bounds")
            if not lo <= self.initial[name] <= hi:
                raise DomainError(f"initial guess for {name!r} lies outside its bounds")


@dataclass(frozen=True)
class FitResult:
    params: dict[str, float]
    residual_norm: float
    iterations: int
    converged: bool
    message: str
    #: residual norm after each accepted step (never increasing)
    residual_history: tuple[float, ...] = ()


def _s21_on(net, observed: ResponseCurve) -> np.ndarray:
    """Model s21 evaluated on the observed (possibly non-uniform) grid."""
    return network_smatrix(net, observed.freqs, observed.incidence).s21


def fit_circuit(problem: FitProblem) -> FitResult:
    """Damped least squares on |s21| residuals with a finite-difference Jacobian.

    Levenberg damping: steps that increase the residual are rejected and
    the damping grows; accepted steps shrink it.  The Jacobian uses central
    differences with a relative step of 1e-6 in a scaled parameter space.
    A singular normal matrix only increases the damping, never aborts.
    """
    obs = np.abs(problem.observed.s21)
    scale = np.array([abs(problem.initial[n]) for n in problem.free])
    lo = np.array([problem.bounds[n][0] for n in problem.free]) / scale
    hi = np.array([problem.bounds[n][1] for n in problem.free]) / scale
    u = np.clip(np.ones(len(problem.free)), lo, hi)

    def residual(u_vec: np.ndarray) -> np.ndarray:
        mags = np.abs(_s21_on(
            build_network(
                replace(problem.base, **dict(zip(problem.free, u_vec * scale))),
                mirrored=problem.mirrored,
            ),
            problem.observed,
        ))
        return mags - obs

    def jacobian(u_vec: np.ndarray) -> np.ndarray:
        cols = []
        for k in range(u_vec.size):
            step = 1e-6 * max(abs(u_vec[k]), 1e-3)
            up = u_vec.copy()
            dn = u_vec.copy()
            up[k] = min(u_vec[k] + step, hi[k])
            dn[k] = max(u_vec[k] - step, lo[k])
            span = up[k] - dn[k]
            cols.append((residual(up) - residual(dn)) / span)
        return np.column_stack(cols)

    r = residual(u)
    cost = float(r @ r)
    lam = 1e-3
    iterations = 0
    message = "iteration cap reached without convergence"
    converged = False
    history = [math.sqrt(cost)]

    for iterations in range(1, problem.max_iterations + 1):
        jac = jacobian(u)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        diag = np.maximum(np.diag(jtj), 1e-30)
        accepted = False
        while lam < 1e14:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            u_new = np.clip(u + step, lo, hi)
            r_new = residual(u_new)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            message = "damping exhausted without an accepting step"
            break

        rel_step = float(np.max(np.abs(u_new - u) / np.maximum(np.abs(u), 1e-30)))
        improvement = cost - cost_new
        u, r, cost = u_new, r_new, cost_new
        history.append(math.sqrt(cost))
        lam = max(lam / 3.0, 1e-12)
        if rel_step < problem.step_tol:
            converged = True
            message = f"converged: relative step {rel_step:.2e} below tolerance"
            break
        if improvement < problem.improvement_tol:
            converged = True
            message = f"converged: residual improvement {improvement:.2e} below tolerance"
            break

    values = dict(zip(problem.free, (u * scale).tolist()))
    return FitResult(
        params=values,
        residual_norm=float(math.sqrt(cost)),
        iterations=iterations,
        converged=converged,
        message=message,
        residual_history=tuple(history),
    )
