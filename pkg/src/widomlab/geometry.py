"""Planar compact sets assembled from disks, segments, and polylines.

Every shape is a value object: construction validates and normalizes it
(closed curves are oriented counterclockwise), after which instances are
immutable and safe to share across parallel workers.  Smooth primitives keep
their exact parametrization; polylines are the single downstream
representation for everything sampled or traced.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GeometryError, SchemaError
from .validation import as_complex_array, positive_int

TWO_PI = 2.0 * math.pi

__all__ = [
    "Disk",
    "Segment",
    "PolylineArc",
    "JordanPolyline",
    "CompactSet",
    "transform_set",
    "boundary_sample",
    "clustered_sample",
    "distance_to_set",
    "quasismooth_constant",
    "geometry_from_json",
    "geometry_to_json",
]


def _segment_distance(z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact distance from points ``z`` to each segment ``[a_k, b_k]``, minimized over k."""
    z = z[:, None]
    d = b - a
    lens2 = np.abs(d) ** 2
    t = ((z - a[None, :]).real * d.real + (z - a[None, :]).imag * d.imag) / lens2
    t = np.clip(t, 0.0, 1.0)
    foot = a[None, :] + t * d[None, :]
    return np.abs(z - foot).min(axis=1)


def _polyline_point_at(verts: np.ndarray, cum: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Point on the polyline at arclength ``s`` (clamped to [0, L])."""
    s = np.clip(s, 0.0, cum[-1])
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(verts) - 2)
    seg_len = cum[idx + 1] - cum[idx]
    frac = np.where(seg_len > 0, (s - cum[idx]) / np.where(seg_len > 0, seg_len, 1.0), 0.0)
    return verts[idx] + frac * (verts[idx + 1] - verts[idx])


def _dedupe(points) -> tuple[complex, ...]:
    pts = [complex(points[0])]
    for p in points[1:]:
        if abs(complex(p) - pts[-1]) > 0.0:
            pts.append(complex(p))
    return tuple(pts)


@dataclass(frozen=True)
class Disk:
    """Closed disk; its boundary circle is kept exact, never polygonized."""

    center: complex
    radius: float
    quasismooth: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0.0):
            raise GeometryError(f"disk radius must be positive, got {self.radius!r}")

    kind = "disk"
    is_closed = True

    @property
    def length(self) -> float:
        return TWO_PI * self.radius

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def reference_point(self) -> complex:
        return self.center

    def sample(self, m: int):
        ang = TWO_PI * np.arange(m) / m
        return self.center + self.radius * np.exp(1j * ang), self.radius * ang

    def point_at(self, s):
        s = np.asarray(s, dtype=float)
        return self.center + self.radius * np.exp(1j * s / self.radius)

    def distance(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(np.abs(z - self.center) - self.radius, 0.0)

    def bbox(self):
        c, r = self.center, self.radius
        return (c.real - r, c.imag - r, c.real + r, c.imag + r)


@dataclass(frozen=True)
class Segment:
    """Straight segment, an open arc with exact endpoints."""

    a: complex
    b: complex
    quasismooth: bool = True

    def __post_init__(self):
        if not abs(self.b - self.a) > 0.0:
            raise GeometryError("segment endpoints coincide")

    kind = "segment"
    is_closed = False

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    diameter = length

    @property
    def reference_point(self) -> complex:
        return 0.5 * (self.a + self.b)

    def sample(self, m: int):
        s = self.length * np.arange(m) / (m - 1)
        return self.a + (self.b - self.a) * np.arange(m) / (m - 1), s

    def point_at(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        return self.a + (self.b - self.a) * (s / self.length)

    def distance(self, z: np.ndarray) -> np.ndarray:
        return _segment_distance(z, np.array([self.a]), np.array([self.b]))

    def bbox(self):
        xs = (self.a.real, self.b.real)
        ys = (self.a.imag, self.b.imag)
        return (min(xs), min(ys), max(xs), max(ys))


class _PolylineMixin:
    @cached_property
    def _verts(self) -> np.ndarray:
        pts = self.points + (self.points[0],) if self.is_closed else self.points
        return np.asarray(pts, dtype=complex)

    @cached_property
    def _cum(self) -> np.ndarray:
        seg = np.abs(np.diff(self._verts))
        return np.concatenate(([0.0], np.cumsum(seg)))

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    @cached_property
    def diameter(self) -> float:
        v = np.asarray(self.points, dtype=complex)
        return float(np.abs(v[:, None] - v[None, :]).max())

    @property
    def reference_point(self) -> complex:
        return complex(np.mean(np.asarray(self.points)))

    def point_at(self, s):
        s = np.asarray(s, dtype=float)
        if self.is_closed:
            s = np.mod(s, self.length)
        return _polyline_point_at(self._verts, self._cum, s)

    def _edge_distance(self, z: np.ndarray) -> np.ndarray:
        return _segment_distance(z, self._verts[:-1], self._verts[1:])

    def bbox(self):
        v = self._verts
        return (v.real.min(), v.imag.min(), v.real.max(), v.imag.max())


@dataclass(frozen=True)
class PolylineArc(_PolylineMixin):
    """Open polyline arc given by its ordered vertices."""

    points: tuple[complex, ...]
    quasismooth: bool = True

    def __post_init__(self):
        object.__setattr__(self, "points", _dedupe(self.points))
        if len(self.points) < 2:
            raise GeometryError("arc needs at least two distinct points")

    kind = "arc"
    is_closed = False

    def sample(self, m: int):
        s = self.length * np.arange(m) / (m - 1)
        return self.point_at(s), s

    def distance(self, z: np.ndarray) -> np.ndarray:
        return self._edge_distance(z)


@dataclass(frozen=True)
class JordanPolyline(_PolylineMixin):
    """Closed Jordan domain bounded by a simple polygon (counterclockwise)."""

    points: tuple[complex, ...]
    quasismooth: bool = True

    def __post_init__(self):
        pts = _dedupe(self.points)
        if len(pts) > 1 and abs(pts[0] - pts[-1]) < 1e-12 * max(1.0, abs(pts[0])):
            pts = pts[:-1]
        if len(pts) < 3:
            raise GeometryError("closed polyline needs at least three distinct points")
        v = np.asarray(pts, dtype=complex)
        area2 = np.sum(v.real * np.roll(v.imag, -1) - np.roll(v.real, -1) * v.imag)
        if area2 == 0.0:
            raise GeometryError("closed polyline encloses zero area")
        if area2 < 0.0:
            pts = pts[:1] + pts[1:][::-1]
        object.__setattr__(self, "points", tuple(pts))

    kind = "jordan"
    is_closed = True

    def sample(self, m: int):
        s = self.length * np.arange(m) / m
        return self.point_at(s), s

    def _contains(self, z: np.ndarray) -> np.ndarray:
        x, y = z.real[:, None], z.imag[:, None]
        v = self._verts
        x0, y0 = v.real[None, :-1], v.imag[None, :-1]
        x1, y1 = v.real[None, 1:], v.imag[None, 1:]
        crosses = ((y0 <= y) & (y1 > y)) | ((y1 <= y) & (y0 > y))
        dy = np.where(y1 != y0, y1 - y0, 1.0)
        xc = x0 + (y - y0) / dy * (x1 - x0)
        return (np.sum(crosses & (xc > x), axis=1) % 2) == 1

    def distance(self, z: np.ndarray) -> np.ndarray:
        d = self._edge_distance(z)
        d[self._contains(z)] = 0.0
        return d


ComponentShape = Disk | Segment | PolylineArc | JordanPolyline


@dataclass(frozen=True)
class CompactSet:
    """Union of pairwise disjoint components with connected complement.

    Disjointness is validated at construction with a sampled separation;
    components closer than ``1e-6 * diam`` are rejected because near-touching
    sets break the level-curve topology every downstream step relies on.
    """

    components: tuple[ComponentShape, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise GeometryError("compact set needs at least one component")
        object.__setattr__(self, "components", comps)
        samples = [c.sample(256)[0] for c in comps]
        all_pts = np.concatenate(samples)
        diam = float(np.abs(all_pts[:, None] - all_pts[None, :]).max())
        sep = math.inf
        for i in range(len(comps)):
            for j in range(len(comps)):
                if i == j:
                    continue
                sep = min(sep, float(comps[j].distance(samples[i]).min()))
        if len(comps) > 1 and sep <= 1e-6 * diam:
            raise GeometryError(
                f"components are not clearly disjoint: sampled separation {sep:.3e} "
                f"is below 1e-6 * diameter ({diam:.3e})"
            )
        object.__setattr__(self, "separation", sep)
        object.__setattr__(self, "diameter", diam)

    def distance(self, z) -> np.ndarray:
        arr, scalar = as_complex_array(z)
        d = np.min(np.stack([c.distance(arr) for c in self.components]), axis=0)
        return float(d[0]) if scalar else d

    def component_distances(self, z) -> np.ndarray:
        arr, _ = as_complex_array(z)
        return np.stack([c.distance(arr) for c in self.components])

    def nearest_component(self, z) -> np.ndarray:
        return np.argmin(self.component_distances(z), axis=0)

    def bbox(self):
        boxes = [c.bbox() for c in self.components]
        return (
            min(b[0] for b in boxes),
            min(b[1] for b in boxes),
            max(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    @property
    def all_quasismooth(self) -> bool:
        return all(c.quasismooth for c in self.components)


def transform_set(k: CompactSet, rotation: complex = 1.0 + 0j,
                  translation: complex = 0j, scale: float = 1.0) -> CompactSet:
    """Image of the set under z -> scale * rotation * z + translation.

    ``rotation`` is normalized to unit modulus; use ``scale`` for dilation.
    """
    rot = rotation / abs(rotation)
    a = scale * rot

    def mv(z: complex) -> complex:
        return a * z + translation

    out = []
    for c in k.components:
        if isinstance(c, Disk):
            out.append(Disk(mv(c.center), scale * c.radius, c.quasismooth))
        elif isinstance(c, Segment):
            out.append(Segment(mv(c.a), mv(c.b), c.quasismooth))
        elif isinstance(c, PolylineArc):
            out.append(PolylineArc(tuple(mv(p) for p in c.points), c.quasismooth))
        else:
            out.append(JordanPolyline(tuple(mv(p) for p in c.points), c.quasismooth))
    return CompactSet(tuple(out))


def boundary_sample(shape: ComponentShape, m: int):
    """Sample the boundary of ``shape`` at ``m`` quasi-uniform arclength nodes.

    Closed shapes are traversed counterclockwise; open arcs include both
    endpoints.  Returns ``(points, arclengths)``.
    """
    m = positive_int(m, "m", minimum=4)
    if shape.diameter <= 0.0:
        raise GeometryError("degenerate shape with zero diameter")
    return shape.sample(m)


def clustered_sample(shape: ComponentShape, m: int):
    """Like :func:`boundary_sample` but with cosine clustering at arc endpoints.

    Closed shapes fall back to the uniform sampling; for open arcs the node
    density grows like 1/sqrt(distance-to-endpoint), which is where both the
    equilibrium density and minimax errors concentrate.
    """
    m = positive_int(m, "m", minimum=4)
    if shape.is_closed:
        return shape.sample(m)
    s = 0.5 * shape.length * (1.0 - np.cos(math.pi * np.arange(m) / (m - 1)))
    return shape.point_at(s), s


def distance_to_set(z, k: CompactSet | ComponentShape):
    """Distance from ``z`` (scalar or array) to the compact set."""
    if isinstance(k, CompactSet):
        return k.distance(z)
    arr, scalar = as_complex_array(z)
    d = k.distance(arr)
    return float(d[0]) if scalar else d


def quasismooth_constant(shape: ComponentShape, m: int = 512) -> float:
    """Lower estimate of the Lavrentiev constant: max shorter-arc/chord ratio.

    Sampled over all pairs of ``m`` boundary nodes; converges to the true
    constant from below as ``m`` grows.  Pairs whose chord is at machine-noise
    scale are skipped.
    """
    m = positive_int(m, "m", minimum=16)
    pts, s = shape.sample(m)
    chord = np.abs(pts[:, None] - pts[None, :])
    arc = np.abs(s[:, None] - s[None, :])
    if shape.is_closed:
        arc = np.minimum(arc, shape.length - arc)
    iu = np.triu_indices(m, k=1)
    chord, arc = chord[iu], arc[iu]
    keep = chord > 1e-12 * shape.diameter
    if not np.any(keep):
        raise GeometryError("all sampled chords are degenerate")
    return float(np.max(arc[keep] / chord[keep]))


# -- JSON ingestion (strict schema) ------------------------------------------

_KIND_FIELDS = {
    "disk": {"center", "radius"},
    "segment": {"a", "b"},
    "arc": {"points"},
    "jordan": {"points"},
}


def _want_pair(value, path: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in value)
    ):
        raise SchemaError(f"{path}: expected [x, y] with finite numbers, got {value!r}")
    return complex(value[0], value[1])


def _component_from_dict(obj, path: str) -> ComponentShape:
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    kind = obj.get("kind")
    if kind not in _KIND_FIELDS:
        raise SchemaError(f"{path}.kind: expected one of {sorted(_KIND_FIELDS)}, got {kind!r}")
    allowed = _KIND_FIELDS[kind] | {"kind", "quasismooth"}
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}: unknown field")
    for key in _KIND_FIELDS[kind]:
        if key not in obj:
            raise SchemaError(f"{path}.{key}: missing required field")
    qs = obj.get("quasismooth", True)
    if not isinstance(qs, bool):
        raise SchemaError(f"{path}.quasismooth: expected a boolean")
    try:
        if kind == "disk":
            radius = obj["radius"]
            if not isinstance(radius, (int, float)):
                raise SchemaError(f"{path}.radius: expected a number")
            return Disk(_want_pair(obj["center"], f"{path}.center"), float(radius), qs)
        if kind == "segment":
            return Segment(_want_pair(obj["a"], f"{path}.a"), _want_pair(obj["b"], f"{path}.b"), qs)
        pts = obj["points"]
        if not isinstance(pts, list) or len(pts) < 2:
            raise SchemaError(f"{path}.points: expected a list of at least two [x, y] pairs")
        points = tuple(_want_pair(p, f"{path}.points[{i}]") for i, p in enumerate(pts))
        if kind == "arc":
            return PolylineArc(points, qs)
        return JordanPolyline(points, qs)
    except GeometryError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{path}: {exc}") from exc


def geometry_from_json(doc) -> CompactSet:
    """Build a :class:`CompactSet` from a JSON string or already-parsed dict.

    The schema is strict: unknown fields are rejected with their path.
    Component order fixes the component index used everywhere downstream.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top level: expected an object")
    for key in doc:
        if key != "components":
            raise SchemaError(f"{key}: unknown field")
    comps = doc.get("components")
    if not isinstance(comps, list) or not comps:
        raise SchemaError("components: expected a nonempty list")
    shapes = tuple(_component_from_dict(c, f"components[{i}]") for i, c in enumerate(comps))
    return CompactSet(shapes)


def geometry_to_json(k: CompactSet) -> str:
    out = []
    for c in k.components:
        if isinstance(c, Disk):
            entry = {"kind": "disk", "center": [c.center.real, c.center.imag], "radius": c.radius}
        elif isinstance(c, Segment):
            entry = {"kind": "segment", "a": [c.a.real, c.a.imag], "b": [c.b.real, c.b.imag]}
        else:
            entry = {"kind": c.kind, "points": [[p.real, p.imag] for p in c.points]}
        if not c.quasismooth:
            entry["quasismooth"] = False
        out.append(entry)
    return json.dumps({"components": out}, sort_keys=True)
