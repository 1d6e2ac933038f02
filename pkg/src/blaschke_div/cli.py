"""Command-line entry point ``blaschke-div``.

Each subcommand writes its outputs plus a run manifest (``<out>.manifest.json``)
recording the argument vector, input and output digests and the seed.
``blaschke-div --replay MANIFEST`` re-executes a manifest and checks that every
output is reproduced byte for byte.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 budget exhausted.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BudgetExceeded, NumericalFailure, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4


# ---- small helpers ----------------------------------------------------------

def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _angle(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational angle: {text!r}")


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON ({exc})") from exc


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_text(path: str, text: str) -> str:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _write_json(path: str, obj) -> str:
    return _write_text(path, _dump(obj))


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load_divisor(path: str):
    from .divisor import Divisor

    data = _read_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    try:
        return Divisor.from_dict(data)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _load_scheme_divisor(path: str):
    from .scheme import SchemeDivisor

    data = _read_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    return SchemeDivisor.from_dict(data)


# ---- subcommands ------------------------------------------------------------
# Each returns (input paths, output paths).

def cmd_psi(args):
    from .blaschke import ContinuationLog, psi_forward, psi_inverse
    from .divisor import matching_distance

    D = _load_divisor(args.divisor)
    log = ContinuationLog()
    if args.inverse:
        result = psi_inverse(D, tol=args.tol, log=log)
        residual = matching_distance(psi_forward(result), D)
    else:
        result = psi_forward(D)
        residual = matching_distance(psi_inverse(result, tol=args.tol, log=log), D)
    audit = {
        "direction": "inverse" if args.inverse else "forward",
        "round_trip_residual": residual,
        "continuation_steps": log.steps,
    }
    outs = [_write_json(args.out, result.to_dict()), _write_json(args.out + ".audit.json", audit)]
    return [args.divisor], outs


def cmd_degenerate(args):
    from .blaschke import degenerate_limit

    target = _load_divisor(args.target)
    if args.steps < 2:
        raise ValidationError("--steps must be at least 2")
    # n = 1 would put the escaping zeros at the origin
    ns = sorted({int(round(v)) for v in np.geomspace(2, args.steps, args.points)} | {args.steps})
    theta = 2 * np.pi * np.arange(args.k_points) / args.k_points
    K = args.k_radius * np.exp(1j * theta)
    report = degenerate_limit(target, ns, K, angular_tol=args.angular_tol)
    rows = ["n,sup_deviation,identity_bound"]
    rows += [f"{n},{dev:.17g},{bnd:.17g}" for n, dev, bnd in zip(report.ns, report.sup_deviation, report.identity_bound)]
    return [args.target], [_write_text(args.out, "\n".join(rows) + "\n")]


def _system_from_spec(spec: dict):
    from .dimension import RepellingSystem, cantor_system, linear_branch, linear_system

    kind = spec.get("type")
    if kind == "cantor":
        return cantor_system()
    if kind == "ratios":
        return linear_system(spec["ratios"], spec.get("radius", 1.0))
    if kind == "linear":
        branches = [linear_branch(complex(*b["ratio"]) if isinstance(b["ratio"], list) else b["ratio"],
                                  complex(*b["offset"]) if isinstance(b["offset"], list) else b["offset"])
                    for b in spec["branches"]]
        center = spec.get("center", [0, 0])
        return RepellingSystem(complex(*center) if isinstance(center, list) else complex(center), float(spec["radius"]), branches)
    raise ValidationError(f"unknown system type {kind!r} (expected cantor, ratios or linear)")


def cmd_dim(args):
    from .dimension import QuadraticJuliaSystem, moran_dimension, pressure_dimension
    from .polydyn import Polynomial

    inputs = []
    extra = {}
    if args.system:
        inputs.append(args.system)
        spec = _read_json(args.system)
        if not isinstance(spec, dict):
            raise ValidationError("system spec must be a JSON object")
        try:
            system = _system_from_spec(spec)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed system spec: {exc}") from exc
        if spec.get("type") == "ratios" or spec.get("type") == "cantor":
            ratios = spec.get("ratios", [1 / 3, 1 / 3])
            extra["moran"] = moran_dimension(ratios)
        extra["certificate"] = {
            "margin": system.certificate.margin,
            "min_gap": system.certificate.min_gap,
            "degrees": system.certificate.degrees,
        }
    else:
        f = Polynomial.parse(args.julia)
        if f.degree != 2:
            raise ValidationError("--julia expects a quadratic z^2 + c")
        c = complex(f.coeffs[-1])
        system = QuadraticJuliaSystem(c)
        extra["c"] = _pair(c)
    report = pressure_dimension(
        system, depth=args.depth, bracket=(args.s_min, args.s_max), refine_tol=args.refine_tol,
        max_depth=args.max_depth, tol=args.tol,
    )
    out = report.to_dict()
    out.update(extra)
    return inputs, [_write_json(args.out, out)]


def cmd_ray(args):
    from .polydyn import Polynomial, external_ray

    f = Polynomial.parse(args.poly)
    ray = external_ray(f, args.angle, g_min=args.g_min, max_steps=args.max_steps)
    audit = {
        "polynomial": str(f),
        "angle": str(args.angle),
        "landing": None if ray.landing is None else _pair(ray.landing),
        "landed": ray.landed,
        "samples": len(ray.points),
        "final_potential": float(ray.potentials[-1]),
    }
    return [], [_write_text(args.out, ray.to_csv()), _write_json(args.out + ".audit.json", audit)]


def _parabolic_model(name: str):
    from .parabolic import PerturbedParabolic, mobius_parabolic, odd_cubic_model, quadratic_family

    if name == "mobius":
        return PerturbedParabolic(mobius_parabolic())
    if name == "quadratic":
        return PerturbedParabolic(quadratic_family())
    if name == "cubic":
        return PerturbedParabolic(odd_cubic_model(), p=1, q=2)
    raise ValidationError(f"unknown model {name!r}")


def cmd_fatou(args):
    from .parabolic import (PerturbedParabolic, fatou_attracting, fatou_repelling, horn_map_samples,
                            quadratic_family, return_multiplier_check)

    if args.return_alpha is not None:
        alpha = args.return_alpha
        P = PerturbedParabolic(quadratic_family(alpha), alpha=alpha)
        report = return_multiplier_check(P, gate=args.gate, orbit_budget=args.orbit_budget)
        return [], [_write_json(args.out, report.to_dict())]
    P = _parabolic_model(args.model)
    if args.horn:
        if args.model == "cubic":
            raise ValidationError("horn maps are sampled for the q = 1 models only")
        horn = horn_map_samples(P, band=tuple(args.band), n_samples=args.samples, rows=args.rows)
        return [], [_write_text(args.out, horn.to_csv()), _write_json(args.out + ".audit.json", horn.audit(args.horn_tol))]
    build = fatou_attracting if args.kind == "attracting" else fatou_repelling
    chart = build(P, petal=args.petal, depth=args.depth)
    direction = np.exp(1j * (chart.jet.petal_axis + 2 * np.pi * args.petal / P.q))
    z = np.linspace(args.r_min, args.r_max, args.samples) * direction
    phi = chart(z)
    residual = chart.residual(z, P.iterate_q)
    rows = ["re,im,phi_re,phi_im,residual"]
    rows += [f"{a.real:.17g},{a.imag:.17g},{b.real:.17g},{b.imag:.17g},{r:.17g}" for a, b, r in zip(z, phi, residual)]
    audit = {"model": args.model, "kind": args.kind, "petal": args.petal, "max_residual": float(np.max(residual))}
    return [], [_write_text(args.out, "\n".join(rows) + "\n"), _write_json(args.out + ".audit.json", audit)]


def cmd_raster(args):
    from .polydyn import Polynomial, julia_raster

    f = Polynomial.parse(args.poly)
    raster = julia_raster(f, window=tuple(args.window), resolution=args.resolution, iter_budget=args.budget, threads=args.threads)
    raster.write(args.out)
    return [], [args.out, args.out + ".json"]


def cmd_scheme_info(args):
    from .scheme import MappingScheme, SchemeDivisor, boundary_stratum, count_markings, is_misiurewicz, validate

    data = _read_json(args.scheme)
    if not isinstance(data, dict):
        raise ValidationError("scheme JSON must be an object")
    D = None
    if "divisors" in data:
        D = SchemeDivisor.from_dict(data)
        S = D.scheme
    else:
        S = MappingScheme.from_dict(data)
    rep = validate(S)
    out = {
        "vertices": list(S.vertices),
        "periodic": list(rep.periodic),
        "nonperiodic": list(rep.nonperiodic),
        "cycles": [list(c) for c in rep.cycles],
        "n_H": count_markings(S),
    }
    if D is not None:
        out["stratum"] = boundary_stratum(D).value
        mis = is_misiurewicz(D, horizon=args.horizon)
        out["misiurewicz"] = {"verdict": mis.verdict.value, "generic": mis.generic, "min_separation": mis.min_separation}
    return [args.scheme], [_write_json(args.out, out)]


def cmd_stretch(args):
    from .model_dynamics import stretch_divisor

    D = _load_scheme_divisor(args.divisor)
    res = stretch_divisor(D, args.delta, horizon=args.horizon, ray_samples=args.ray_samples, tol=args.tol)
    outs = [_write_json(args.out, res.divisor.to_dict()), _write_json(args.out + ".audit.json", res.audit())]
    return [args.divisor], outs


def cmd_track(args):
    from .model_dynamics import track_prerepelling

    D = _load_scheme_divisor(args.divisor)
    E = _load_scheme_divisor(args.perturbed)
    res = track_prerepelling(D, args.vertex, args.point, args.l, args.n, E, radius=args.radius)
    return [args.divisor, args.perturbed], [_write_json(args.out, res.audit())]


def _periodic_points(f, period: int) -> np.ndarray:
    """Repelling points of exact period dividing ``period``, sorted by angle then modulus."""
    if f.degree ** period > 4096:
        raise BudgetExceeded(f"degree {f.degree}^{period} periodic-point search exceeds 4096")
    if np.allclose(f.coeffs[1:], 0):
        n = f.degree**period - 1
        pts = np.exp(2j * np.pi * np.arange(n) / n)
    else:
        poly = np.poly1d([1.0, 0.0])
        for _ in range(period):
            poly = np.poly1d(f.coeffs)(poly)
        poly = poly - np.poly1d([1.0, 0.0])
        pts = np.roots(poly.coeffs)
        for _ in range(50):
            val, der = f.iterate(pts, period), np.ones_like(pts)
            z = pts.copy()
            for _ in range(period):
                der = der * f.deriv(z)
                z = f(z)
            pts = pts - (val - pts) / (der - 1)
    der = np.ones_like(pts)
    z = pts.copy()
    for _ in range(period):
        der = der * f.deriv(z)
        z = f(z)
    keep = np.abs(der) > 1 + 1e-9
    pts = pts[keep]
    return pts[np.lexsort((np.abs(pts), np.round(np.angle(pts), 12)))]


def cmd_motion(args):
    from .polydyn import HyperbolicSetMotion, Polynomial, motion_hyperbolic_set

    base = Polynomial.parse(args.base)
    target = Polynomial.parse(args.target)
    inputs = []
    if args.points:
        inputs.append(args.points)
        raw = _read_json(args.points)
        try:
            pts = np.array([complex(p[0], p[1]) for p in raw])
        except (TypeError, IndexError, ValueError) as exc:
            raise ValidationError(f"points must be a list of [re, im] pairs: {exc}") from exc
    else:
        pts = _periodic_points(base, args.period)
    M = HyperbolicSetMotion.build(base, pts)
    res = motion_hyperbolic_set(M, target, tol=args.tol, max_depth=args.max_depth)
    out = {
        "base": str(base),
        "target": str(target),
        "points": [{"base": _pair(a), "moved": _pair(b)} for a, b in zip(M.points, res.points)],
        "conjugacy_residual": float(res.conjugacy_residual),
        "min_separation": float(res.min_separation),
        "injective": bool(res.injective),
        "iterations": int(np.max(res.iterations)),
    }
    return inputs, [_write_json(args.out, out)]


# ---- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blaschke-div",
        description="Blaschke divisors, model dynamics, polynomial and parabolic dynamics, dimension estimates.",
        epilog="Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 budget exhausted. "
        "BLASCHKE_DIV_THREADS caps worker threads.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--replay", metavar="MANIFEST", help="re-run a manifest and verify byte-identical outputs")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=0, help="recorded in the manifest (default 0)")
        p.add_argument("--manifest", help="manifest path (default <out>.manifest.json)")
        return p

    p = add("psi", cmd_psi, "critical-point map of fixed-point-centered Blaschke products, or its inverse")
    p.add_argument("--divisor", required=True, help="divisor JSON")
    p.add_argument("--inverse", action="store_true", help="solve for the divisor with the given critical divisor")
    p.add_argument("--tol", type=float, default=1e-8, help="continuation tolerance (default 1e-8)")
    p.add_argument("--out", required=True)

    p = add("degenerate", cmd_degenerate, "sup deviation of the escaping factor along the pulled sequence")
    p.add_argument("--target", required=True, help="target divisor JSON (boundary points escape)")
    p.add_argument("--steps", type=int, default=10000, help="largest n (default 10000)")
    p.add_argument("--points", type=int, default=20, help="number of n values, log spaced (default 20)")
    p.add_argument("--k-radius", type=float, default=0.5, help="radius of the sample circle (default 0.5)")
    p.add_argument("--k-points", type=int, default=64, help="samples on the circle (default 64)")
    p.add_argument("--angular-tol", type=float, default=1e-8, help="angular distance from 1 treated as 1 (default 1e-8)")
    p.add_argument("--out", required=True, help="CSV path")

    p = add("dim", cmd_dim, "dimension of a repelling system from the zero of the pressure")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--system", help="system spec JSON: {type: cantor|ratios|linear, ...}")
    src.add_argument("--julia", help='quadratic polynomial, e.g. "z^2-0.1"')
    p.add_argument("--depth", type=int, help="fixed cylinder depth (default: refine until stable)")
    p.add_argument("--refine-tol", type=float, default=1e-3, help="agreement between depths (default 1e-3)")
    p.add_argument("--max-depth", type=int, default=14, help="(default 14)")
    p.add_argument("--s-min", type=float, default=0.0, help="bracket lower end (default 0)")
    p.add_argument("--s-max", type=float, default=2.0, help="bracket upper end (default 2)")
    p.add_argument("--tol", type=float, default=1e-10, help="bisection tolerance (default 1e-10)")
    p.add_argument("--out", required=True)

    p = add("ray", cmd_ray, "external ray of a monic centered polynomial")
    p.add_argument("--poly", required=True, help='e.g. "z^2-2"')
    p.add_argument("--angle", type=_angle, required=True, help="angle in turns, e.g. 1/3")
    p.add_argument("--g-min", type=float, default=1e-8, help="landing potential (default 1e-8)")
    p.add_argument("--max-steps", type=int, default=4000, help="(default 4000)")
    p.add_argument("--out", required=True, help="CSV path (G,re,im)")

    p = add("fatou", cmd_fatou, "Fatou coordinates, horn maps and the return-multiplier check")
    p.add_argument("--model", choices=["mobius", "quadratic", "cubic"], default="quadratic")
    p.add_argument("--kind", choices=["attracting", "repelling"], default="attracting")
    p.add_argument("--petal", type=int, default=0)
    p.add_argument("--r-min", type=float, default=0.05, help="sample radius range along the petal axis")
    p.add_argument("--r-max", type=float, default=0.3)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--depth", type=int, default=4000, help="orbit depth of the chart (default 4000)")
    p.add_argument("--horn", action="store_true", help="sample the horn map instead")
    p.add_argument("--band", type=float, nargs=2, default=[8.0, 12.0], metavar=("LO", "HI"), help="imaginary band (default 8 12)")
    p.add_argument("--rows", type=int, default=5)
    p.add_argument("--horn-tol", type=float, default=1e-4, help="periodicity tolerance (default 1e-4)")
    p.add_argument("--return-alpha", type=_complex, help="run the return-multiplier check at this alpha")
    p.add_argument("--gate", type=float, default=0.5)
    p.add_argument("--orbit-budget", type=int, default=1000000)
    p.add_argument("--out", required=True)

    p = add("raster", cmd_raster, "escape-time raster of a polynomial Julia set (PGM P5 plus JSON sidecar)")
    p.add_argument("--poly", required=True)
    p.add_argument("--window", type=float, nargs=4, default=[-2.0, 2.0, -2.0, 2.0], metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--budget", type=int, default=256, help="iteration budget (default 256)")
    p.add_argument("--threads", type=int, help="worker threads (default BLASCHKE_DIV_THREADS or CPU count)")
    p.add_argument("--out", required=True, help="PGM path")

    p = add("scheme-info", cmd_scheme_info, "cycle structure and marking count of a mapping scheme")
    p.add_argument("--scheme", required=True, help="scheme JSON or scheme-divisor JSON")
    p.add_argument("--horizon", type=int, default=50, help="orbit horizon for the Misiurewicz check (default 50)")
    p.add_argument("--out", required=True)

    p = add("stretch", cmd_stretch, "move escaped zeros so critical values sit on internal rays")
    p.add_argument("--divisor", required=True, help="scheme-divisor JSON")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--ray-samples", type=int, default=400)
    p.add_argument("--tol", type=float, default=1e-7, help="bisection tolerance (default 1e-7)")
    p.add_argument("--out", required=True)

    p = add("track", cmd_track, "continue a boundary pre-repelling point to a perturbed divisor")
    p.add_argument("--divisor", required=True, help="base scheme-divisor JSON")
    p.add_argument("--perturbed", required=True, help="perturbed scheme-divisor JSON")
    p.add_argument("--vertex", required=True)
    p.add_argument("--point", type=_complex, required=True)
    p.add_argument("--l", type=int, required=True, help="preperiod")
    p.add_argument("--n", type=int, required=True, help="period")
    p.add_argument("--radius", type=float, help="certification radius (default: searched)")
    p.add_argument("--out", required=True)

    p = add("motion", cmd_motion, "holomorphic motion of a hyperbolic set of a polynomial")
    p.add_argument("--base", required=True, help='base polynomial, e.g. "z^2"')
    p.add_argument("--target", required=True, help='target polynomial, e.g. "z^2+0.1"')
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--points", help="JSON file holding a list of [re, im] base points")
    grp.add_argument("--period", type=int, help="use the repelling points of period dividing N")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-depth", type=int, default=400)
    p.add_argument("--out", required=True)
    return parser


# ---- manifests ----------------------------------------------------------------

def _manifest(argv: list[str], args, inputs, outputs) -> dict:
    params = {k: (str(v) if isinstance(v, (Fraction, complex)) else v) for k, v in vars(args).items()
              if k not in ("func", "replay")}
    return {
        "tool": "blaschke-div",
        "version": __version__,
        "subcommand": args.command,
        "argv": argv,
        "parameters": params,
        "seed": args.seed,
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": {p: _sha256(p) for p in outputs},
    }


def _run(argv: list[str]) -> tuple[int, dict | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.replay:
        return _replay(args.replay), None
    if not args.command:
        parser.print_help()
        return EXIT_INVALID, None
    np.random.seed(args.seed)
    inputs, outputs = args.func(args)
    manifest = _manifest(argv, args, inputs, outputs)
    path = args.manifest or (outputs[0] + ".manifest.json")
    _write_json(path, manifest)
    return EXIT_OK, manifest


def _replay(path: str) -> int:
    manifest = _read_json(path)
    if not isinstance(manifest, dict) or "argv" not in manifest:
        raise ValidationError(f"{path} is not a run manifest")
    for p, digest in manifest.get("inputs", {}).items():
        if not os.path.exists(p) or _sha256(p) != digest:
            raise ValidationError(f"input {p} is missing or differs from the manifest")
    expected = manifest.get("outputs", {})
    code, fresh = _run(list(manifest["argv"]))
    if code != EXIT_OK:
        return code
    mismatched = [p for p, digest in expected.items() if fresh["outputs"].get(p) != digest]
    if mismatched:
        print("replay mismatch: " + ", ".join(mismatched), file=sys.stderr)
        return EXIT_NUMERIC
    print(f"replay ok: {len(expected)} outputs identical")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        code, _ = _run(argv)
        return code
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
