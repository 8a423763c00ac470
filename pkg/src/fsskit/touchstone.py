"""Touchstone v1 two-port reader and writer.

The writer emits RI format in GHz with 12 significant digits and records
the incidence condition in comment lines so a round trip restores it.
The reader accepts RI, MA, and dB formats in any standard frequency unit.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .analysis import ResponseCurve
from .errors import TouchstoneError
from .twoport import IncidenceCondition, Polarization

TOOL_VERSION = "fsskit 0.1.0"

_UNIT_HZ = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}


def _fmt(x: float) -> str:
    return f"{x:.11e}"


def write_touchstone(curve: ResponseCurve, path: str | os.PathLike) -> None:
    """Write a two-port .s2p file: f_GHz then re/im pairs of s11 s21 s12 s22.

    s12 duplicates s21 (reciprocal network); s22 falls back to s11 when the
    curve does not carry it.
    """
    s22 = curve.s22 if curve.s22 is not None else curve.s11
    theta_deg = math.degrees(curve.incidence.theta)
    lines = [
        f"! {TOOL_VERSION}",
        f"! incidence theta_deg = {theta_deg:.12g}",
        f"! polarization = {curve.incidence.polarization.value}",
        "# GHz S RI R 376.73",
    ]
    for f, s11, s21, s22v in zip(curve.freqs, curve.s11, curve.s21, s22):
        fields = [f"{f / 1e9:.11e}"]
        for v in (s11, s21, s21, s22v):
            fields.append(_fmt(v.real))
            fields.append(_fmt(v.imag))
        lines.append(" ".join(fields))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_option_line(tokens: list[str], line_no: int) -> tuple[float, str, float]:
    """Return (unit multiplier, data format, reference impedance)."""
    unit, fmt, z_ref = "ghz", "ma", 50.0
    want_r_value = False
    for tok in tokens:
        t = tok.lower()
        if want_r_value:
            try:
                z_ref = float(tok)
            except ValueError as exc:
                raise TouchstoneError(f"bad reference impedance {tok!r}", line_no) from exc
            want_r_value = False
        elif t in _UNIT_HZ:
            unit = t
        elif t in ("ri", "ma", "db"):
            fmt = t
        elif t == "r":
            want_r_value = True
        elif t in ("y", "z", "g", "h"):
            raise TouchstoneError(f"unsupported parameter type {tok!r}", line_no)
        elif t == "s":
            pass
        else:
            raise TouchstoneError(f"unrecognized option token {tok!r}", line_no)
    if want_r_value:
        raise TouchstoneError("option line ends after 'R' without a value", line_no)
    return _UNIT_HZ[unit], fmt, z_ref


def _to_complex(fmt: str, a: float, b: float) -> complex:
    if fmt == "ri":
        return complex(a, b)
    if fmt == "ma":
        return a * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))
    mag = 10.0 ** (a / 20.0)
    return mag * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))


def read_touchstone(path: str | os.PathLike) -> ResponseCurve:
    """Read a two-port .s2p file into a ResponseCurve (Hz, complex RI).

    Comment lines are ignored except for the incidence annotations this
    package writes, which are restored when present.
    """
    theta_deg = 0.0
    pol = Polarization.TE
    mult = fmt = None
    freqs: list[float] = []
    rows: list[list[complex]] = []

    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("!"):
                body = line[1:].strip()
                if body.startswith("incidence theta_deg"):
                    try:
                        theta_deg = float(body.split("=", 1)[1])
                    except (IndexError, ValueError):
                        pass
                elif body.startswith("polarization"):
                    value = body.split("=", 1)[-1].strip().upper()
                    if value in ("TE", "TM"):
                        pol = Polarization[value]
                continue
            if line.startswith("#"):
                if mult is not None:
                    raise TouchstoneError("duplicate option line", line_no)
                mult, fmt, _ = _parse_option_line(line[1:].split(), line_no)
                continue
            if mult is None:
                raise TouchstoneError("data before the option line", line_no)
            tokens = line.split("!", 1)[0].split()
            if len(tokens) != 9:
                raise TouchstoneError(
                    f"expected 9 columns for a two-port record, got {len(tokens)}",
                    line_no,
                )
            try:
                values = [float(t) for t in tokens]
            except ValueError as exc:
                raise TouchstoneError(f"non-numeric field in {line!r}", line_no) from exc
            f_hz = values[0] * mult
            if freqs and f_hz <= freqs[-1]:
                raise TouchstoneError(
                    f"frequencies must be strictly increasing; {f_hz} follows {freqs[-1]}",
                    line_no,
                )
            freqs.append(f_hz)
            pairs = values[1:]
            rows.append([_to_complex(fmt, pairs[2 * k], pairs[2 * k + 1]) for k in range(4)])

    if mult is None:
        raise TouchstoneError("file has no option line", line_no=None)
    if not freqs:
        raise TouchstoneError("file holds no data records", line_no=None)

    data = np.asarray(rows, dtype=complex)
    return ResponseCurve(
        freqs=np.asarray(freqs),
        s11=data[:, 0],
        s21=data[:, 1],
        incidence=IncidenceCondition(math.radians(theta_deg), pol),
        s22=data[:, 3],
    )
