"""Deterministic SVG snapshots of a simulator state.

Patches are drawn as disks at the orthographic projection of their centers,
one disk per (cap, piece) membership, colored by piece.  Decisions never
depend on this module; floats appear only in the emitted coordinates, with
fixed formatting so identical states give byte-identical documents.
"""

from __future__ import annotations

from fractions import Fraction
from math import sqrt

PALETTE = (
    "#4477aa", "#ee6677", "#228833", "#ccbb44",
    "#66ccee", "#aa3377", "#bbbbbb", "#000000",
)

_AXES = {
    "x": (1, 2, 0),
    "y": (2, 0, 1),
    "z": (0, 1, 2),
}

SIZE = 640
SCALE = SIZE // 2 - 20


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _project(vec: tuple[Fraction, Fraction, Fraction], axis: str) -> tuple[float, float, float]:
    ix, iy, iz = _AXES[axis]
    return float(vec[ix]), float(vec[iy]), float(vec[iz])


def render_svg(snap: dict, axis: str = "z", overlay: bool = False) -> str:
    """Render a snapshot dict (see simulator.snapshot)."""
    if axis not in _AXES:
        raise ValueError("axis must be one of x, y, z")
    half = SIZE / 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<circle cx="{_fmt(half)}" cy="{_fmt(half)}" r="{_fmt(SCALE)}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    disks = []
    for stage in snap["stages"]:
        radius = sqrt(Fraction(stage["radius_sq"]))
        for placement in stage["placements"]:
            vec = tuple(Fraction(c) for c in placement["center"])
            px, py, pz = _project(vec, axis)
            for piece in placement["pieces"]:
                disks.append((piece, stage["stage"], px, py, pz, radius))
    disks.sort(key=lambda d: (d[0], d[1], d[2], d[3]))
    for piece, _stage, px, py, pz, radius in disks:
        color = PALETTE[(piece - 1) % len(PALETTE)]
        cx = half + px * SCALE
        cy = half - py * SCALE
        # back-hemisphere disks are outlined only
        fill = color if pz >= 0 else "none"
        rad = max(radius * SCALE, 1.5)
        parts.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(rad)}" fill="{fill}" '
            f'stroke="{color}" stroke-width="0.6" fill-opacity="0.75"/>'
        )
    if overlay:
        r = snap["r"]
        for tracked in snap["tracked"]:
            if len(tracked["mask"]) != r - 1:
                continue
            piece = next(k for k in range(1, r + 1) if k not in tracked["mask"])
            vec = tuple(Fraction(c) for c in tracked["point"])
            px, py, pz = _project(vec, axis)
            if pz < 0:
                continue
            color = PALETTE[(piece - 1) % len(PALETTE)]
            parts.append(
                f'<circle cx="{_fmt(half + px * SCALE)}" cy="{_fmt(half - py * SCALE)}" '
                f'r="2.5" fill="none" stroke="{color}" stroke-width="1.2"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
