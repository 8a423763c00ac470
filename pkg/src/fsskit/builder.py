"""Mapping from unit-cell geometry to circuit values and ladder assembly.

A single FSS layer is modeled as three cascaded elements: a shunt
series-RLC branch for the ring-resonator sheet, a short dielectric line
for the spacer, and a shunt RL branch for the backing wire grid.  The
second-order variant joins two such layers with an air line.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import DomainError
from .twoport import (
    IDENTITY,
    NORMAL,
    IncidenceCondition,
    TwoPortMatrix,
    abcd_shunt,
    abcd_tline,
    cascade,
    shunt_rl_admittance,
    shunt_series_rlc_admittance,
)

#: Default ring-branch element values used when no fitted values are supplied.
DEFAULT_RING_INDUCTANCE = 1.61e-9
DEFAULT_RING_CAPACITANCE = 0.6e-12

#: Spacer laminate defaults (PTFE-glass, 10 mil).
DEFAULT_EPS_R = 2.2
DEFAULT_LOSS_TANGENT = 0.0009


@dataclass(frozen=True)
class GeometryParams:
    """Unit-cell dimensions, all in meters.

    period      square cell pitch (same in both directions)
    ring_side   outer side of the square ring
    arm_width   ring arm width
    strip_width back-layer grid strip width (the bandwidth knob)
    spacer      dielectric spacer thickness between the two metal layers
    eps_r       spacer relative permittivity
    """

    period: float
    ring_side: float
    arm_width: float
    strip_width: float
    spacer: float
    eps_r: float = DEFAULT_EPS_R

    def __post_init__(self):
        if not 0 < self.strip_width < self.period:
            raise DomainError("strip width must satisfy 0 < w < period")
        if not 0 < self.arm_width < self.ring_side / 2:
            raise DomainError("arm width must satisfy 0 < t < ring_side/2")
        if not self.ring_side < self.period:
            raise DomainError("ring side must be smaller than the cell period")
        if not self.spacer > 0:
            raise DomainError("spacer thickness must be positive")
        if not self.eps_r >= 1:
            raise DomainError("spacer permittivity must be >= 1")


#: Reference cell used throughout the examples and CLI defaults (w = 2.6 mm).
DEFAULT_GEOMETRY = GeometryParams(
    period=10.2e-3,
    ring_side=9.8e-3,
    arm_width=0.4e-3,
    strip_width=2.6e-3,
    spacer=0.254e-3,
)


@dataclass(frozen=True)
class CalibrationConstants:
    """Scale factors pinning the grid proportionalities to absolute values.

    l_scale     grid inductance scale, H (multiplies the log term)
    r_scale     grid resistance scale, ohm*m (divided by strip width)
    r1_default  ring branch loss assigned by params_from_geometry, ohm
    """

    l_scale: float
    r_scale: float
    r1_default: float = 0.1

    def __post_init__(self):
        if not self.l_scale > 0:
            raise DomainError("inductance scale must be positive")
        if self.r_scale < 0 or self.r1_default < 0:
            raise DomainError("resistance scales must be nonnegative")


@dataclass(frozen=True)
class CircuitParams:
    """Lumped element values of one FSS layer (plus stacking info).

    L, R      wire-grid inductance (H) and loss (ohm)
    L1, C1, R1  ring-branch inductance (H), capacitance (F), loss (ohm)
    h         spacer length, m (0 collapses the layer to a single node)
    eps_r     spacer permittivity
    h1        air gap between layers, m; required when order = 2
    order     1 or 2
    loss_tangent  spacer dielectric loss
    """

    L: float
    L1: float
    C1: float
    R: float = 0.1
    R1: float = 0.1
    h: float = 0.254e-3
    eps_r: float = DEFAULT_EPS_R
    h1: float | None = None
    order: int = 1
    loss_tangent: float = DEFAULT_LOSS_TANGENT

    def __post_init__(self):
        if self.L <= 0 or self.L1 <= 0 or self.C1 <= 0:
            raise DomainError("L, L1 and C1 must be positive")
        if self.R < 0 or self.R1 < 0:
            raise DomainError("R and R1 must be nonnegative")
        if self.h < 0:
            raise DomainError("spacer length must be nonnegative")
        if self.order not in (1, 2):
            raise DomainError(f"order must be 1 or 2, got {self.order}")
        if self.order == 2 and self.h1 is None:
            raise DomainError("second-order parameters require the air gap h1")
        if self.h1 is not None and self.h1 < 0:
            raise DomainError("air gap must be nonnegative")


class BranchKind(enum.Enum):
    RING_RESONATOR = "ring-resonator"
    WIRE_GRID = "wire-grid"


@dataclass(frozen=True)
class ShuntBranch:
    """Grounded branch: series R-L-C for the ring sheet, series R-L for the grid."""

    kind: BranchKind
    resistance: float
    inductance: float
    capacitance: float | None = None

    def admittance(self, f):
        if self.kind is BranchKind.RING_RESONATOR:
            return shunt_series_rlc_admittance(
                self.resistance, self.inductance, self.capacitance, f
            )
        return shunt_rl_admittance(self.resistance, self.inductance, f)

    def abcd(self, f, inc: IncidenceCondition = NORMAL) -> TwoPortMatrix:
        return abcd_shunt(self.admittance(f))


@dataclass(frozen=True)
class LineSegment:
    """Dielectric slab section of the ladder."""

    eps_r: float
    length: float
    loss_tangent: float = 0.0

    def abcd(self, f, inc: IncidenceCondition = NORMAL) -> TwoPortMatrix:
        return abcd_tline(
            self.eps_r, self.length, f, inc, loss_tangent=self.loss_tangent
        )


@dataclass(frozen=True)
class LayeredNetwork:
    """Ordered ladder of shunt branches and line sections.

    The first element faces the incoming wave.  Immutable; safe to share
    across concurrent sweeps.
    """

    elements: tuple[ShuntBranch | LineSegment, ...]
    params: CircuitParams | None = None

    def abcd(self, f, inc: IncidenceCondition = NORMAL) -> TwoPortMatrix:
        if not self.elements:
            return IDENTITY
        return cascade([el.abcd(f, inc) for el in self.elements])


def grid_inductance(w: float, period: float, scale: float) -> float:
    """Wire-grid sheet inductance: scale * ln(1 / sin(pi w / (2 period))).

    Strictly decreasing in w; tends to 0 as w -> period and diverges as
    w -> 0.
    """
    if not 0 < w < period:
        raise DomainError(f"strip width must lie in (0, {period}), got {w}")
    return scale * math.log(1.0 / math.sin(math.pi * w / (2.0 * period)))


def grid_resistance(w: float, scale: float) -> float:
    """Wire-grid sheet loss: scale / w."""
    if not w > 0:
        raise DomainError(f"strip width must be positive, got {w}")
    if scale < 0:
        raise DomainError("resistance scale must be nonnegative")
    return scale / w


def calibrate_inductance_scale(w_ref: float, period: float, l_ref: float) -> float:
    """Pin the grid-inductance proportionality so L(w_ref) = l_ref."""
    if not 0 < w_ref < period:
        raise DomainError(f"reference width must lie in (0, {period}), got {w_ref}")
    if not l_ref > 0:
        raise DomainError("reference inductance must be positive")
    log_term = math.log(1.0 / math.sin(math.pi * w_ref / (2.0 * period)))
    if log_term == 0.0:
        raise DomainError("degenerate calibration: w_ref equals the period")
    return l_ref / log_term


#: Default calibration: L(2.6 mm) = 2.85 nH and R(2.6 mm) = 0.1 ohm on the
#: reference cell, ring loss 0.1 ohm.
DEFAULT_CALIBRATION = CalibrationConstants(
    l_scale=calibrate_inductance_scale(2.6e-3, DEFAULT_GEOMETRY.period, 2.85e-9),
    r_scale=2.6e-4,
    r1_default=0.1,
)


def params_from_geometry(
    g: GeometryParams,
    cal: CalibrationConstants = DEFAULT_CALIBRATION,
    l1: float = DEFAULT_RING_INDUCTANCE,
    c1: float = DEFAULT_RING_CAPACITANCE,
    *,
    h1: float | None = None,
    order: int = 1,
    loss_tangent: float = DEFAULT_LOSS_TANGENT,
) -> CircuitParams:
    """Derive circuit values from the cell geometry.

    The grid branch follows the calibrated width laws; the ring branch has
    no geometric formula here, so l1 and c1 are caller-supplied.
    """
    return CircuitParams(
        L=grid_inductance(g.strip_width, g.period, cal.l_scale),
        L1=l1,
        C1=c1,
        R=grid_resistance(g.strip_width, cal.r_scale),
        R1=cal.r1_default,
        h=g.spacer,
        eps_r=g.eps_r,
        h1=h1,
        order=order,
        loss_tangent=loss_tangent,
    )


def _layer_elements(p: CircuitParams) -> tuple[ShuntBranch, LineSegment, ShuntBranch]:
    ring = ShuntBranch(BranchKind.RING_RESONATOR, p.R1, p.L1, p.C1)
    grid = ShuntBranch(BranchKind.WIRE_GRID, p.R, p.L)
    line = LineSegment(p.eps_r, p.h, p.loss_tangent)
    return ring, line, grid


def build_first_order(p: CircuitParams) -> LayeredNetwork:
    """Single layer: [ring shunt, spacer line, grid shunt], ring facing the wave."""
    if p.order != 1:
        raise DomainError(f"first-order builder requires order = 1, got {p.order}")
    return LayeredNetwork(_layer_elements(p), params=p)


def build_second_order(p: CircuitParams, *, mirrored: bool = True) -> LayeredNetwork:
    """Two layers joined by an air line of length h1 (7 elements).

    By default the second layer is flipped (mirrored) so both wire grids
    face the air gap and the stack is symmetric; that arrangement keeps
    the passband center stable under oblique incidence.  mirrored=False
    orients both layers identically (ring facing the source), which shifts
    the upper coupled mode noticeably higher.
    """
    if p.order != 2:
        raise DomainError(f"second-order builder requires order = 2, got {p.order}")
    if p.h1 is None:
        raise DomainError("second-order build requires the air gap h1")
    first = _layer_elements(p)
    gap = LineSegment(1.0, p.h1, 0.0)
    second = tuple(reversed(first)) if mirrored else first
    return LayeredNetwork(first + (gap,) + second, params=p)


def build_network(p: CircuitParams, *, mirrored: bool = True) -> LayeredNetwork:
    """Dispatch on p.order."""
    if p.order == 1:
        return build_first_order(p)
    return build_second_order(p, mirrored=mirrored)


def geometry_with_width(g: GeometryParams, w: float) -> GeometryParams:
    """Copy of g with a different grid strip width."""
    return replace(g, strip_width=w)
