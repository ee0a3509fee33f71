"""Command-line front end.

Subcommands: ``cap`` (capacity and masses), ``totik`` (centroid-root
polynomials), ``minimax`` (Lawson references), ``report`` (full degree
sweep), ``check`` (invariant suite on bundled fixtures).  All randomness
flows from the single --seed flag; identical configs reproduce identical
numeric output (row timings excepted).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import ExperimentConfig, run_experiment, thread_count
from .errors import WidomlabError
from .fixtures import interval, two_disks, unit_disk
from .geometry import CompactSet, geometry_from_json, transform_set
from .minimax import interval_oracle, lawson_chebyshev
from .partition import allocate_degrees, arc_masses_by_flux
from .polynomials import sup_norm, totik_polynomial, widom_factor
from .potential import solve_equilibrium, trace_level_curve
from .svgplot import write_svg

__all__ = ["main", "RunConfig"]


@dataclass(frozen=True)
class RunConfig:
    geometry: str | None
    command: str
    degrees: tuple[int, ...]
    c: float
    samples: int
    tol: float
    seed: int
    out: Path
    svg: bool
    phase: float

    def __post_init__(self):
        if self.command != "check":
            if not self.degrees or list(self.degrees) != sorted(set(self.degrees)):
                raise ValueError("degrees must be a nonempty ascending list")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.samples < 64:
            raise ValueError("samples must be at least 64")


def _parse_degrees(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad degree list {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="widomlab",
        description="capacities, level-curve polynomials, and norm-growth reports "
                    "for finite unions of continua")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, geometry=True):
        if geometry:
            p.add_argument("--geometry", required=True, help="path to geometry JSON")
        p.add_argument("--degrees", type=_parse_degrees, default=(8, 16, 32, 64))
        p.add_argument("--c", type=float, default=1.0,
                       help="level scale: curves are traced at c/degree")
        p.add_argument("--samples", type=int, default=1024,
                       help="solver charge nodes per component")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--svg", action="store_true", help="write an SVG overlay")
        p.add_argument("--phase", type=float, default=0.0,
                       help="rotational offset of the partition anchor (radians)")

    common(sub.add_parser("cap", help="capacity, masses, residual as JSON"))
    common(sub.add_parser("totik", help="centroid-root polynomials and norms"))
    common(sub.add_parser("minimax", help="Lawson reference polynomials"))
    common(sub.add_parser("report", help="full degree sweep as CSV/JSON"))
    common(sub.add_parser("check", help="invariant suite on bundled fixtures"),
           geometry=False)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        geometry=getattr(args, "geometry", None), command=args.command,
        degrees=tuple(args.degrees), c=args.c, samples=args.samples,
        tol=args.tol, seed=args.seed, out=args.out, svg=args.svg,
        phase=args.phase)


def _load_geometry(cfg: RunConfig) -> CompactSet:
    return geometry_from_json(Path(cfg.geometry).read_text(encoding="utf-8"))


def _fmt(v: float) -> str:
    return format(v, ".12g")


def cmd_cap(cfg: RunConfig) -> int:
    K = _load_geometry(cfg)
    model = solve_equilibrium(K, cfg.samples)
    print(json.dumps({
        "capacity": model.capacity(),
        "masses": model.masses_.tolist(),
        "residual": model.validation_residual_,
    }, sort_keys=True))
    return 0


def cmd_totik(cfg: RunConfig) -> int:
    K = _load_geometry(cfg)
    model = solve_equilibrium(K, cfg.samples)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "model.json").write_text(
        json.dumps(model.to_dict(), sort_keys=True), encoding="utf-8")
    failures = 0
    for n in cfg.degrees:
        try:
            poly = totik_polynomial(K, model, n, cfg.c, phase=cfg.phase)
            est = sup_norm(poly, K)
            w = widom_factor(poly, K, model, est)
            path = cfg.out / f"totik_roots_n{n:03d}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("re,im,j,k\n")
                for j, part in enumerate(poly.provenance.partitions):
                    for k, arc in enumerate(part.arcs):
                        z = arc.centroid
                        fh.write(f"{_fmt(z.real)},{_fmt(z.imag)},{j},{k}\n")
            print(f"n={n} norm_log10={_fmt(est.log_value / math.log(10.0))} widom={_fmt(w)}")
            if cfg.svg:
                write_svg(cfg.out / f"totik_n{n:03d}.svg", K,
                          curves=poly.provenance.curves, roots=poly.roots,
                          argmax=est.argmax)
        except WidomlabError as exc:
            failures += 1
            print(f"n={n} failed: {exc}", file=sys.stderr)
    return 1 if failures else 0


def cmd_minimax(cfg: RunConfig) -> int:
    K = _load_geometry(cfg)
    model = solve_equilibrium(K, cfg.samples)
    cfg.out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for n in cfg.degrees:
        try:
            res = lawson_chebyshev(K, n)
            w = math.exp(res.log_norm + n * model.robin_)
            path = cfg.out / f"minimax_coeffs_n{n:03d}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("k,re,im\n")
                for k, ck in enumerate(res.coefficients):
                    fh.write(f"{k},{_fmt(ck.real)},{_fmt(ck.imag)}\n")
            print(f"n={n} norm_log10={_fmt(res.log_norm / math.log(10.0))} widom={_fmt(w)}")
        except (WidomlabError, ValueError) as exc:
            failures += 1
            print(f"n={n} failed: {exc}", file=sys.stderr)
    return 1 if failures else 0


def cmd_report(cfg: RunConfig) -> int:
    K = _load_geometry(cfg)
    model = solve_equilibrium(K, cfg.samples)
    config = ExperimentConfig(solver_nodes=cfg.samples, seed=cfg.seed,
                              phase=cfg.phase, threads=thread_count())
    report = run_experiment(K, cfg.degrees, cfg.c, config, model=model,
                            geometry_id=Path(cfg.geometry).stem)
    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / "report.csv", "w", encoding="utf-8", newline="\n") as fh:
        report.write_csv(fh)
    (cfg.out / "report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True), encoding="utf-8")
    (cfg.out / "model.json").write_text(
        json.dumps(model.to_dict(), sort_keys=True), encoding="utf-8")
    if cfg.svg:
        n_max = max((r.n for r in report.records if r.error is None), default=None)
        if n_max is not None:
            poly = totik_polynomial(K, model, n_max, cfg.c, phase=cfg.phase)
            est = sup_norm(poly, K)
            write_svg(cfg.out / "report.svg", K, curves=poly.provenance.curves,
                      roots=poly.roots, argmax=est.argmax)
    for r in report.records:
        status = r.error or f"w_totik={_fmt(r.widom_totik)}"
        print(f"n={r.n} {status}")
    return 0 if report.ok else 1


# -- invariant suite -----------------------------------------------------------


def _check_allocation(rng) -> str | None:
    for _ in range(200):
        m = int(rng.integers(1, 5))
        w = rng.dirichlet(np.ones(m) * 2.0)
        w = np.maximum(w, 0.02)
        w /= w.sum()
        n = int(rng.integers(int(math.ceil(1.0 / w.min())) + 1, 200))
        alloc = allocate_degrees(w, n)
        parts = alloc.per_component
        if sum(parts) != n or min(parts) < 1:
            return f"allocation broken for {w}, n={n}"
        excess = parts[-1] - n * w[-1]
        if not (-1e-9 <= excess <= m - 1 + 1e-9):
            return f"remainder bound violated: {excess} for {w}, n={n}"
    return None


def _check_sandwich() -> str | None:
    for K, nodes in ((unit_disk(), 512), (interval(), 1024)):
        model = solve_equilibrium(K, nodes)
        for n in (4, 8, 16):
            poly = totik_polynomial(K, model, n, 1.0)
            tot = sup_norm(poly, K)
            law = lawson_chebyshev(K, n)
            capn = n * math.log(model.capacity())
            if law.log_norm < capn - 1e-6:
                return f"minimax norm below capacity power at n={n}"
            if law.log_norm > tot.log_value + 1e-3:
                return f"minimax norm above centroid-root norm at n={n}"
    return None


def _check_isometry() -> str | None:
    K = two_disks(3.0)
    moved = transform_set(K, rotation=complex(math.cos(0.7), math.sin(0.7)),
                          translation=0.3 - 0.2j)
    rot = complex(math.cos(0.7), math.sin(0.7))
    m1 = solve_equilibrium(K, 256)
    m2 = solve_equilibrium(moved, 256)
    n = 12
    p1 = totik_polynomial(K, m1, n, 1.0)
    p2 = totik_polynomial(moved, m2, n, 1.0)
    mapped = np.sort_complex(rot * p1.roots + (0.3 - 0.2j))
    if np.max(np.abs(mapped - np.sort_complex(p2.roots))) > 1e-8:
        return "roots do not map under the isometry"
    w1 = widom_factor(p1, K, m1)
    w2 = widom_factor(p2, moved, m2)
    if abs(w1 - w2) > 1e-8 * max(w1, 1.0):
        return f"widom factor moved under isometry: {w1} vs {w2}"
    return None


def _check_scaling() -> str | None:
    K = interval()
    lam = 2.5
    scaled = transform_set(K, scale=lam)
    m1 = solve_equilibrium(K, 512)
    m2 = solve_equilibrium(scaled, 512)
    if abs(m2.capacity() - lam * m1.capacity()) > 1e-8 * lam:
        return "capacity did not scale linearly"
    n = 10
    p1 = totik_polynomial(K, m1, n, 1.0)
    p2 = totik_polynomial(scaled, m2, n, 1.0)
    e1, e2 = sup_norm(p1, K), sup_norm(p2, scaled)
    if abs(e2.log_value - e1.log_value - n * math.log(lam)) > 1e-7:
        return "norm did not scale like lambda^n"
    w1 = widom_factor(p1, K, m1, e1)
    w2 = widom_factor(p2, scaled, m2, e2)
    if abs(w1 - w2) > 1e-7 * max(w1, 1.0):
        return f"widom factor not scale-invariant: {w1} vs {w2}"
    return None


def _check_equal_mass() -> str | None:
    K = interval()
    model = solve_equilibrium(K, 512)
    curve = trace_level_curve(model, 0, 0.1)
    from .partition import partition_level_curve
    part = partition_level_curve(curve, 8, K)
    flux = arc_masses_by_flux(model, part)
    if np.max(np.abs(flux - 1.0 / 8.0)) > 1e-4:
        return f"flux masses deviate: {flux}"
    if abs(part.masses.sum() - 1.0) > 1e-10:
        return "partition masses do not sum to the component mass"
    return None


def cmd_check(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    checks = [
        ("degree allocation remainder bounds", lambda: _check_allocation(rng)),
        ("equal-mass partition cross-validation", _check_equal_mass),
        ("minimality sandwich", _check_sandwich),
        ("isometry equivariance", _check_isometry),
        ("scaling covariance", _check_scaling),
    ]
    failures = 0
    for name, fn in checks:
        try:
            problem = fn()
        except Exception as exc:  # noqa: BLE001 - report, do not crash the suite
            problem = f"{type(exc).__name__}: {exc}"
        if problem is None:
            print(f"CHECK {name}: PASS")
        else:
            failures += 1
            print(f"CHECK {name}: FAIL ({problem})")
    return 1 if failures else 0


_COMMANDS = {
    "cap": cmd_cap,
    "totik": cmd_totik,
    "minimax": cmd_minimax,
    "report": cmd_report,
    "check": cmd_check,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return _COMMANDS[cfg.command](cfg)
    except (WidomlabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
