"""Complex two-port algebra for plane-wave circuit models.

Every network element is expressed as a 2x2 ABCD chain matrix relating
port voltages and currents.  Cascading is matrix multiplication with the
wave-arrival side on the left.  All functions accept either scalar
frequencies or 1-D numpy arrays and evaluate elementwise, so a full
frequency sweep is a single vectorized call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, EvanescentModeError, SingularNetworkError

#: Free-space wave impedance, ohm.
ETA0 = 376.730

#: Vacuum speed of light, m/s.
C0 = 299_792_458.0

#: Admittance substituted for a perfectly shorted shunt branch so that
#: cascades stay finite.  Large enough that the resulting |s21| is far
#: below any numeric tolerance used in this package.
SHORT_ADMITTANCE = 1e30


class Polarization(enum.Enum):
    """Plane-wave polarization relative to the plane of incidence."""

    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class IncidenceCondition:
    """Incidence angle (radians, 0 <= theta < pi/2) and polarization."""

    theta: float
    polarization: Polarization

    def __post_init__(self):
        if not 0.0 <= self.theta < math.pi / 2:
            raise DomainError(f"incidence angle must be in [0, pi/2), got {self.theta}")


#: Normal incidence.  TE and TM produce identical results at theta = 0.
NORMAL = IncidenceCondition(0.0, Polarization.TE)


@dataclass(frozen=True)
class TwoPortMatrix:
    """ABCD chain matrix.  b carries ohms, c carries siemens.

    Entries may be complex scalars or equally shaped numpy arrays
    (one entry per frequency).
    """

    a: complex | np.ndarray
    b: complex | np.ndarray
    c: complex | np.ndarray
    d: complex | np.ndarray

    def __matmul__(self, other: "TwoPortMatrix") -> "TwoPortMatrix":
        return TwoPortMatrix(
            a=self.a * other.a + self.b * other.c,
            b=self.a * other.b + self.b * other.d,
            c=self.c * other.a + self.d * other.c,
            d=self.c * other.b + self.d * other.d,
        )

    def det(self) -> complex | np.ndarray:
        """a*d - b*c; unity for reciprocal networks."""
        return self.a * self.d - self.b * self.c


IDENTITY = TwoPortMatrix(1.0 + 0j, 0.0 + 0j, 0.0 + 0j, 1.0 + 0j)


@dataclass(frozen=True)
class SMatrix:
    """Scattering parameters referenced to the same real impedance at both ports.

    Reciprocity is built in: s12 is constructed equal to s21.
    """

    s11: complex | np.ndarray
    s21: complex | np.ndarray
    s12: complex | np.ndarray
    s22: complex | np.ndarray
    z_ref: float


def wave_impedance(theta: float, pol: Polarization) -> float:
    """Free-space wave impedance seen by an obliquely incident plane wave.

    TE: eta0 / cos(theta);  TM: eta0 * cos(theta).  Both equal eta0 at
    normal incidence (bitwise: cos(0) is exactly 1.0).
    """
    if not 0.0 <= theta < math.pi / 2:
        raise DomainError(f"incidence angle must be in [0, pi/2), got {theta}")
    c = math.cos(theta)
    return ETA0 / c if pol is Polarization.TE else ETA0 * c


def abcd_shunt(admittance: complex | np.ndarray) -> TwoPortMatrix:
    """Chain matrix [[1, 0], [Y, 1]] of a shunt branch with admittance Y."""
    y = np.asarray(admittance, dtype=complex)
    if not np.all(np.isfinite(y)):
        raise DomainError("shunt admittance must be finite")
    y = y if y.ndim else complex(y)
    return TwoPortMatrix(a=1.0, b=0.0, c=y, d=1.0)


def shunt_series_rlc_admittance(r1, l1, c1, f):
    """Admittance of a grounded series R-L-C branch: Y = 1/(R + jwL + 1/(jwC)).

    At the branch resonance with r1 = 0 the impedance vanishes; the exact
    zero is clamped to SHORT_ADMITTANCE so downstream cascades stay finite.
    """
    if r1 < 0 or l1 <= 0 or c1 <= 0:
        raise DomainError("series RLC branch requires r1 >= 0, l1 > 0, c1 > 0")
    f = np.asarray(f, dtype=float)
    if not np.all(f > 0):
        raise DomainError("frequency must be positive (series capacitor blocks DC)")
    w = 2 * np.pi * f
    z = r1 + 1j * w * l1 + 1 / (1j * w * c1)
    shorted = z == 0
    y = np.where(shorted, SHORT_ADMITTANCE + 0j, 1.0 / np.where(shorted, 1.0, z))
    return y if y.ndim else complex(y)


def shunt_rl_admittance(r, l, f):
    """Admittance of a grounded series R-L branch: Y = 1/(R + jwL)."""
    if r < 0 or l <= 0:
        raise DomainError("RL branch requires r >= 0 and l > 0")
    f = np.asarray(f, dtype=float)
    if not np.all(f > 0):
        raise DomainError("frequency must be positive")
    y = 1.0 / (r + 1j * 2 * np.pi * f * l)
    return y if y.ndim else complex(y)


def abcd_tline(
    eps_r: float,
    length: float,
    f,
    inc: IncidenceCondition = NORMAL,
    *,
    eta: float = ETA0,
    loss_tangent: float = 0.0,
) -> TwoPortMatrix:
    """Chain matrix of a dielectric slab crossed at oblique incidence.

    The longitudinal phase is phi = (2 pi f / c0) * sqrt(eps_r - sin^2 theta)
    * length.  The effective impedance is eta / sqrt(eps_r - sin^2 theta)
    for TE and eta * sqrt(eps_r - sin^2 theta) / eps_r for TM; both reduce
    to eta / sqrt(eps_r) at normal incidence (the TM branch reuses the TE
    expression at theta = 0 so the two polarizations agree bitwise).

    A nonzero loss tangent adds dielectric attenuation via the complex
    propagation factor gamma*l = phi * (tan_delta / 2 + j).
    """
    if eps_r <= 0:
        raise DomainError(f"relative permittivity must be positive, got {eps_r}")
    if length < 0:
        raise DomainError(f"line length must be nonnegative, got {length}")
    if loss_tangent < 0:
        raise DomainError("loss tangent must be nonnegative")
    f = np.asarray(f, dtype=float)
    if not np.all(f > 0):
        raise DomainError("frequency must be positive")

    s2 = math.sin(inc.theta) ** 2
    if eps_r <= s2:
        raise EvanescentModeError(
            f"no propagating mode: eps_r = {eps_r} <= sin^2(theta) = {s2:.6f} "
            f"at theta = {inc.theta:.6f} rad"
        )
    q = math.sqrt(eps_r - s2)
    if inc.polarization is Polarization.TE or s2 == 0.0:
        z_eff = eta / q
    else:
        z_eff = eta * q / eps_r

    phi = (2 * np.pi * f / C0) * q * length
    if loss_tangent > 0.0:
        gl = phi * (0.5 * loss_tangent + 1j)
        cosh_gl = np.cosh(gl)
        sinh_gl = np.sinh(gl)
        a = cosh_gl if cosh_gl.ndim else complex(cosh_gl)
        b = z_eff * sinh_gl
        c = sinh_gl / z_eff
        return TwoPortMatrix(a=a, b=b if np.ndim(b) else complex(b),
                             c=c if np.ndim(c) else complex(c), d=a)
    cos_phi = np.cos(phi)
    sin_phi = np.sin(phi)
    a = cos_phi if cos_phi.ndim else float(cos_phi)
    return TwoPortMatrix(
        a=a,
        b=1j * z_eff * sin_phi if np.ndim(sin_phi) else 1j * z_eff * float(sin_phi),
        c=1j * sin_phi / z_eff if np.ndim(sin_phi) else 1j * float(sin_phi) / z_eff,
        d=a,
    )


def cascade(segments: Sequence[TwoPortMatrix] | Iterable[TwoPortMatrix]) -> TwoPortMatrix:
    """Left-to-right chain product; the leftmost segment faces the incoming wave."""
    segments = list(segments)
    if not segments:
        raise DomainError("cascade requires at least one segment")
    out = segments[0]
    for seg in segments[1:]:
        out = out @ seg
    return out


def abcd_to_s(m: TwoPortMatrix, z_ref: float) -> SMatrix:
    """Convert a chain matrix to scattering parameters.

    Both ports share the real reference impedance z_ref.  The conversion
    assumes a reciprocal network (everything this package builds) and
    constructs s12 = s21 = 2/Delta with Delta = a + b/z + c*z + d.
    """
    if not z_ref > 0:
        raise DomainError(f"reference impedance must be positive, got {z_ref}")
    delta = m.a + m.b / z_ref + m.c * z_ref + m.d
    if np.any(delta == 0):
        raise SingularNetworkError("singular network: a + b/z + c z + d = 0")
    s11 = (m.a + m.b / z_ref - m.c * z_ref - m.d) / delta
    s21 = 2.0 / delta
    s22 = (-m.a + m.b / z_ref - m.c * z_ref + m.d) / delta
    return SMatrix(s11=s11, s21=s21, s12=s21, s22=s22, z_ref=z_ref)
