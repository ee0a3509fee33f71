"""Minimal deterministic SVG output: set, level curves, roots, norm argmax."""

from __future__ import annotations

import math

import numpy as np

from .geometry import CompactSet, Disk

__all__ = ["write_svg"]


def _fmt(v: float) -> str:
    return format(v, ".4f")


def write_svg(path, K: CompactSet, curves=(), roots=None, argmax=None,
              size: int = 720) -> None:
    xs0, ys0, xs1, ys1 = K.bbox()
    for c in curves:
        xs0 = min(xs0, c.points.real.min())
        xs1 = max(xs1, c.points.real.max())
        ys0 = min(ys0, c.points.imag.min())
        ys1 = max(ys1, c.points.imag.max())
    w = max(xs1 - xs0, 1e-9)
    h = max(ys1 - ys0, 1e-9)
    pad = 0.06 * max(w, h)
    xs0, ys0, w, h = xs0 - pad, ys0 - pad, w + 2 * pad, h + 2 * pad
    scale = size / max(w, h)

    def sx(x):
        return (x - xs0) * scale

    def sy(y):
        return (ys0 + h - y) * scale  # flip: svg y grows downward

    def poly(points, color, width, close=False):
        coords = " ".join(f"{_fmt(sx(p.real))},{_fmt(sy(p.imag))}" for p in points)
        tag = "polygon" if close else "polyline"
        return (f'<{tag} points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="{width}"/>')

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{math.ceil(w * scale)}" '
        f'height="{math.ceil(h * scale)}" viewBox="0 0 {math.ceil(w * scale)} '
        f'{math.ceil(h * scale)}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for comp in K.components:
        if isinstance(comp, Disk):
            parts.append(
                f'<circle cx="{_fmt(sx(comp.center.real))}" cy="{_fmt(sy(comp.center.imag))}" '
                f'r="{_fmt(comp.radius * scale)}" fill="none" stroke="black" stroke-width="1.5"/>')
        else:
            pts, _ = comp.sample(512)
            parts.append(poly(pts, "black", 1.5, close=comp.is_closed))
    for curve in curves:
        parts.append(poly(curve.points, "#1f5fbf", 1.0))
    if roots is not None:
        for r in np.asarray(roots):
            parts.append(f'<circle cx="{_fmt(sx(r.real))}" cy="{_fmt(sy(r.imag))}" '
                         f'r="2.2" fill="#c92a2a"/>')
    if argmax is not None:
        cx, cy = sx(argmax.real), sy(argmax.imag)
        star = []
        for k in range(10):
            rad = 7.0 if k % 2 == 0 else 3.0
            ang = math.pi / 2 + k * math.pi / 5
            star.append(f"{_fmt(cx + rad * math.cos(ang))},{_fmt(cy - rad * math.sin(ang))}")
        parts.append(f'<polygon points="{" ".join(star)}" fill="#e8a500" '
                     f'stroke="black" stroke-width="0.6"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
