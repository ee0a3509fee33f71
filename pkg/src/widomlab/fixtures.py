"""Bundled test geometries used by the CLI check command and the test suite."""

from __future__ import annotations

import math

import numpy as np

from .geometry import CompactSet, Disk, PolylineArc, Segment

__all__ = ["unit_disk", "interval", "two_intervals", "two_disks", "spiral_arc",
           "FIXTURES", "QUASISMOOTH_FIXTURES"]


def unit_disk() -> CompactSet:
    return CompactSet((Disk(0j, 1.0),))


def interval() -> CompactSet:
    return CompactSet((Segment(-1 + 0j, 1 + 0j),))


def two_intervals(a: float = 0.5) -> CompactSet:
    return CompactSet((Segment(-1 + 0j, -a + 0j), Segment(a + 0j, 1 + 0j)))


def two_disks(gap: float = 6.0, radius: float = 0.5) -> CompactSet:
    return CompactSet((Disk(-gap + 0j, radius), Disk(gap + 0j, radius)))


def spiral_arc(turns: int = 4, points_per_turn: int = 160) -> CompactSet:
    """Inward spiral with turn gaps shrinking faster than the radius.

    The arclength between points on consecutive turns is a full turn while
    the chord is the turn gap, so the arclength-to-chord ratio grows with the
    number of turns: a truncation of a genuinely non-quasismooth arc.
    """
    theta = np.linspace(2 * math.pi, 2 * math.pi * (turns + 1),
                        turns * points_per_turn)
    r = 2 * math.pi / theta
    pts = tuple(r * np.exp(1j * theta))
    return CompactSet((PolylineArc(pts, quasismooth=False),))


FIXTURES = {
    "disk": unit_disk,
    "interval": interval,
    "two_intervals": two_intervals,
    "two_disks": two_disks,
    "spiral": spiral_arc,
}

QUASISMOOTH_FIXTURES = ("disk", "interval", "two_intervals", "two_disks")
