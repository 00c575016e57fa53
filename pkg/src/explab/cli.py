"""Command-line front end: classification runs, verification suites, reports.

Three subcommands share one report envelope:

    classify  exact cohomology run for a built-in or user-supplied algebra
    verify    named property suite with per-check pass/fail lines
    exponent  numeric extraction of infinitesimal values from a phase function

JSON output is the stable contract (schema_version field, canonical key
order); text output is for humans and may change.  Exit codes: 0 when
every executed check passed, 1 for check failures and numeric aborts,
2 for unusable input (bad flags, malformed or inconsistent algebra
files).  Classify reports carry no timing so identical inputs produce
byte-identical bytes regardless of thread count; the stochastic
commands echo (seed, samples) and report wall time.
"""

import argparse
import itertools
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from importlib import metadata
from typing import List, Optional, Tuple, Union

import numpy as np

from . import bundle as bundlemod
from .classify import (DegreeCapError, classify, realizable_subspace,
                       verify_milne_structure)
from .groupexp import (ExtrapolationError, HElement, check_cocycle_identities,
                       compose, exponent_shift_violation,
                       exponent_time_variance, finite_exponent, h_inverse,
                       h_multiply, h_unit, infinitesimal_from_finite, inverse,
                       random_element, random_event, theta_galilean,
                       theta_milne, _act_event)
from .lie import LieAlgebra, galilean, milne, phase_space
from .ratpoly import RatPoly
from .schrod import (convergence_slope, gaussian_packet, mass_equality_sweep,
                     sample_wave, schrodinger_residual, transform_wave)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

SCHEMA_VERSION = 1
IDENTITY_TOL = 1e-12
VARIANCE_TOL = 1e-24
EXTRACTION_TOL = 1e-6
SWEEP_RATIOS = (0.5, 0.9, 1.0, 1.1, 2.0)
SWEEP_MARGIN = 10.0
SLOPE_MIN = 1.8

# fixed probe event for exponent extraction; any regular point works,
# this one avoids the coordinate planes
PROBE_X = (0.3, -0.4, 0.25)
PROBE_T = 0.0


class UsageError(ValueError):
    """Input that cannot be acted on: wrong flags, bad specs, bad files."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    algebra: Optional[str] = None
    degree: Union[str, int] = "auto"
    suite: Optional[str] = None
    group: Optional[str] = None
    theta: Optional[str] = None
    pair: Optional[str] = None
    all_pairs: bool = False
    samples: int = 1000
    seed: int = 0
    fmt: str = "json"
    out: Optional[str] = None

    def __post_init__(self):
        if self.command not in ("classify", "verify", "exponent"):
            raise UsageError("unknown command %r" % self.command)
        if self.degree != "auto":
            if not isinstance(self.degree, int) or self.degree < 0:
                raise UsageError("degree must be 'auto' or a nonnegative integer")
        if self.samples < 1:
            raise UsageError("samples must be at least 1")


def _tool_stamp() -> dict:
    try:
        version = metadata.version("explab")
    except metadata.PackageNotFoundError:
        version = "unknown"
    return {"name": "explab", "version": version}


def _report(config: RunConfig, input_echo: dict, results: dict,
            timing: Optional[float]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": _tool_stamp(),
        "command": config.command,
        "input": input_echo,
        "results": results,
        "timing": timing,
    }


def _parse_indexed(spec: str, family: str, minimum: int) -> int:
    tail = spec[len(family) + 1:]
    try:
        value = int(tail)
    except ValueError:
        raise UsageError("bad index in %r: expected %s:<integer>" % (spec, family))
    if value < minimum:
        raise UsageError("%s index must be >= %d" % (family, minimum))
    return value


def load_algebra(spec: str) -> LieAlgebra:
    """Resolve a builtin algebra name or load and validate a JSON file."""
    if spec == "galilean":
        return galilean()
    if spec.startswith("milne:"):
        return milne(_parse_indexed(spec, "milne", 1))
    if spec.startswith("phase-space:"):
        return phase_space(_parse_indexed(spec, "phase-space", 1))
    if not os.path.exists(spec):
        raise UsageError("unknown algebra %r: not a builtin name and no such file"
                         % spec)
    with open(spec, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError("parse error in %s, line %d column %d: %s"
                         % (spec, exc.lineno, exc.colno, exc.msg))
    try:
        return LieAlgebra.from_dict(data, name=os.path.basename(spec))
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError("invalid algebra in %s: %s" % (spec, exc))


def load_theta(spec: str):
    for prefix, factory in (("galilean-mass:", theta_galilean),
                            ("milne-schrodinger:", theta_milne)):
        if spec.startswith(prefix):
            try:
                mass = float(spec[len(prefix):])
            except ValueError:
                raise UsageError("bad mass in %r" % spec)
            if not mass > 0:
                raise UsageError("mass must be positive")
            return factory(mass), mass
    raise UsageError("unknown theta spec %r (use galilean-mass:<m> or "
                     "milne-schrodinger:<m>)" % spec)


def _group_labels(spec: str) -> Tuple[str, List[str]]:
    if spec == "galilean":
        return "galilean", list(galilean().labels)
    if spec.startswith("milne:"):
        return "milne", list(milne(_parse_indexed(spec, "milne", 1)).labels)
    raise UsageError("unknown group spec %r (use galilean or milne:<m>)" % spec)


# -- classify ---------------------------------------------------------


def cmd_classify(config: RunConfig) -> Tuple[dict, bool]:
    alg = load_algebra(config.algebra)
    result = classify(alg, degree=config.degree)
    echo = {"algebra": config.algebra,
            "degree": "auto" if config.degree == "auto" else config.degree}
    return _report(config, echo, result.to_jsonable(), timing=None), True


# -- verify suites ----------------------------------------------------


def _check(name: str, passed: bool, **details) -> dict:
    entry = {"name": name, "passed": bool(passed)}
    entry.update(details)
    return entry


def _suite_galilean(samples: int, seed: int) -> List[dict]:
    checks = []
    result = classify(galilean())
    checks.append(_check("classification-quotient",
                         result.quotient_dim == 1,
                         quotient_dim=result.quotient_dim))
    theta = theta_galilean(1.0)
    stats = check_cocycle_identities(theta, samples=samples, seed=seed)
    checks.append(_check("cocycle-identities",
                         stats["max_violation"] <= IDENTITY_TOL,
                         max_violation=stats["max_violation"],
                         samples=stats["samples"], seed=stats["seed"]))
    variance = exponent_time_variance(theta, samples=100, seed=seed)
    checks.append(_check("time-independence", variance <= VARIANCE_TOL,
                         variance=variance))
    shift = exponent_shift_violation(theta, lambda r, p: 0.7 * r.b,
                                     samples=min(samples, 200), seed=seed)
    checks.append(_check("gauge-shift-identity", shift <= IDENTITY_TOL,
                         max_violation=shift))
    return checks


def _suite_milne(m: int, samples: int, seed: int) -> List[dict]:
    checks = []
    result = classify(milne(m))
    want = m * (m + 1) // 2
    checks.append(_check("classification-quotient",
                         result.quotient_dim == want,
                         quotient_dim=result.quotient_dim, expected=want))
    structure = verify_milne_structure(result, m)
    for name in structure.CHECKS:
        detail = structure.failures.get(name)
        checks.append(_check("structure-" + name, detail is None,
                             **({} if detail is None else {"detail": detail})))
    restricted = realizable_subspace(result, m)
    checks.append(_check("realizable-dimension",
                         restricted.quotient_dim == m,
                         quotient_dim=restricted.quotient_dim, expected=m))
    stats = check_cocycle_identities(theta_milne(1.0), samples=samples,
                                     seed=seed, order=m)
    checks.append(_check("cocycle-identities",
                         stats["max_violation"] <= IDENTITY_TOL,
                         max_violation=stats["max_violation"],
                         samples=stats["samples"], seed=stats["seed"]))
    return checks


def _random_section(rng, grid, dim) -> "bundlemod.Section":
    fibers = rng.normal(size=(grid.size, dim)) + 1j * rng.normal(size=(grid.size, dim))
    return bundlemod.Section(grid, fibers)


def _random_unitary(rng, dim) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _wrapped_deviation(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs((a - b + np.pi) % (2 * np.pi) - np.pi)))


def _suite_bundle(samples: int, seed: int) -> List[dict]:
    rng = np.random.default_rng(seed)
    grid = bundlemod.uniform_grid(0.0, 1.0, 33)
    dim = 4
    checks = []

    section = _random_section(rng, grid, dim)
    planted = np.sin(grid.nodes) + 0.3
    mapped = bundlemod.apply_bundle_map(
        bundlemod.phase_bundle_map(grid, dim, planted), section)
    recovery = bundlemod.ray_equivalent(section, mapped)
    deviation = (_wrapped_deviation(recovery.phases, planted)
                 if recovery.equivalent else math.inf)
    checks.append(_check("planted-phase-recovery",
                         recovery.equivalent and deviation <= IDENTITY_TOL,
                         max_phase_deviation=deviation))

    scaled = bundlemod.Section(grid, 2.0 * section.fibers)
    checks.append(_check("scaling-rejected",
                         not bundlemod.ray_equivalent(section, scaled).equivalent))

    independents = sum(
        bundlemod.ray_equivalent(_random_section(rng, grid, dim),
                                 _random_section(rng, grid, dim)).equivalent
        for _ in range(10))
    checks.append(_check("independent-sections-rejected", independents == 0,
                         false_positives=independents))

    perm = np.arange(grid.size)[::-1].copy()
    mats = np.stack([_random_unitary(rng, dim) for _ in range(grid.size)])
    isometry = bundlemod.BundleMap(perm, mats)
    s1, s2 = _random_section(rng, grid, dim), _random_section(rng, grid, dim)
    t1 = bundlemod.apply_bundle_map(isometry, s1)
    t2 = bundlemod.apply_bundle_map(isometry, s2)
    worst = max(
        abs(bundlemod.fiber_inner(t1, t2, int(perm[k]))
            - bundlemod.fiber_inner(s1, s2, k))
        for k in range(grid.size))
    checks.append(_check("isometry-inner-products", worst <= IDENTITY_TOL,
                         max_violation=worst))
    return checks


def _suite_schrodinger(samples: int, seed: int) -> List[dict]:
    mass = 1.0
    profile = RatPoly.monomial(2, "2/5")  # A(t) = 0.4 t^2
    addot = profile.differentiate().differentiate()
    g = lambda t: float(addot(t))
    packet = gaussian_packet(mass, x0=0.0, k0=0.3)
    hs, norms = [], []
    for nx, nt in [(161, 41), (321, 81), (641, 161)]:
        xs = np.linspace(-16.0, 16.0, nx)
        ts = np.linspace(0.0, 0.8, nt)
        moved = transform_wave(sample_wave(packet, xs, ts, mass), profile)
        hs.append(moved.dx)
        norms.append(schrodinger_residual(moved, mass, mass, g).max_norm)
    slope = convergence_slope(hs, norms)
    checks = [_check("residual-convergence-order", slope >= SLOPE_MIN,
                     slope=slope, residuals=norms)]
    sweep = mass_equality_sweep(profile, mass, SWEEP_RATIOS)
    ok = (not sweep.degenerate and sweep.best_ratio == 1.0
          and sweep.margin is not None and sweep.margin >= SWEEP_MARGIN)
    checks.append(_check("mass-ratio-sweep", ok, **sweep.to_jsonable()))
    return checks


def _suite_h_group(samples: int, seed: int) -> List[dict]:
    theta = theta_galilean(1.2)
    rng = np.random.default_rng(seed)
    trials = max(1, min(samples, 200))
    worst_assoc = worst_inverse = worst_unit = 0.0
    for k in range(trials):
        elements = [random_element(rng, "galilean") for _ in range(3)]
        lifted = [HElement(lambda x, t, j=j: math.sin(j + x[0] - t), e, theta)
                  for j, e in enumerate(elements)]
        p = random_event(rng)
        assoc = (h_multiply(h_multiply(lifted[0], lifted[1]), lifted[2]).theta(*p)
                 - h_multiply(lifted[0], h_multiply(lifted[1], lifted[2])).theta(*p))
        r, s, g = elements
        composition = (finite_exponent(theta, r, s, p)
                       + finite_exponent(theta, compose(r, s), g, p)
                       - finite_exponent(theta, s, g, _act_event(inverse(r), p))
                       - finite_exponent(theta, r, compose(s, g), p))
        worst_assoc = max(worst_assoc, abs(assoc - composition))
        product = h_multiply(h_inverse(lifted[0]), lifted[0])
        worst_inverse = max(worst_inverse, abs(product.theta(*p)))
        neutral = h_multiply(h_unit(theta), lifted[0])
        worst_unit = max(worst_unit, abs(neutral.theta(*p) - lifted[0].theta(*p)))
    return [
        _check("associativity-matches-composition", worst_assoc <= IDENTITY_TOL,
               max_violation=worst_assoc, samples=trials, seed=seed),
        _check("inverse-cancels", worst_inverse <= IDENTITY_TOL,
               max_violation=worst_inverse),
        _check("unit-neutral", worst_unit <= IDENTITY_TOL,
               max_violation=worst_unit),
    ]


def cmd_verify(config: RunConfig) -> Tuple[dict, bool]:
    suite = config.suite
    started = time.perf_counter()
    if suite == "galilean":
        checks = _suite_galilean(config.samples, config.seed)
    elif suite is not None and suite.startswith("milne:"):
        checks = _suite_milne(_parse_indexed(suite, "milne", 1),
                              config.samples, config.seed)
    elif suite == "bundle":
        checks = _suite_bundle(config.samples, config.seed)
    elif suite == "schrodinger":
        checks = _suite_schrodinger(config.samples, config.seed)
    elif suite == "h-group":
        checks = _suite_h_group(config.samples, config.seed)
    else:
        raise UsageError("unknown suite %r (use galilean, milne:<m>, bundle, "
                         "schrodinger, or h-group)" % suite)
    elapsed = time.perf_counter() - started
    passed = all(c["passed"] for c in checks)
    echo = {"suite": suite, "samples": config.samples, "seed": config.seed}
    results = {"suite": suite, "checks": checks, "passed": passed}
    return _report(config, echo, results, timing=elapsed), passed


# -- exponent ---------------------------------------------------------


def _axis_level(label: str) -> Tuple[Optional[int], Optional[int]]:
    """(level, axis) for translation-family labels, (None, None) otherwise."""
    if label.startswith("d") and "_" in label:
        head, _, tail = label.partition("_")
        return int(head[1:]), int(tail)
    if label.startswith(("b", "d")) and label[1:].isdigit():
        return (0 if label[0] == "d" else 1), int(label[1:])
    return None, None


def _galilean_reference(mass: float):
    rep = classify(galilean()).representatives[0]

    def ref(a: str, b: str) -> float:
        return mass * float(rep.entry_by_labels(a, b)(PROBE_T))

    return ref


def cmd_exponent(config: RunConfig) -> Tuple[dict, bool]:
    theta, mass = load_theta(config.theta)
    kind, labels = _group_labels(config.group)
    if theta.group != kind:
        raise UsageError("theta %r does not act on group %r"
                         % (config.theta, config.group))
    if config.all_pairs:
        pairs = list(itertools.combinations(labels, 2))
    else:
        if config.pair is None:
            raise UsageError("provide --pair A,B or --all-pairs")
        parts = [p.strip() for p in config.pair.split(",")]
        if len(parts) != 2 or parts[0] == parts[1]:
            raise UsageError("--pair expects two distinct labels, e.g. b1,d1")
        for part in parts:
            if part not in labels:
                raise UsageError("unknown generator %r for group %s (choose from %s)"
                                 % (part, config.group, ", ".join(labels)))
        pairs = [tuple(parts)]

    started = time.perf_counter()
    point = (np.array(PROBE_X), PROBE_T)
    reference = _galilean_reference(mass) if kind == "galilean" else None
    entries = []
    worst_ref = 0.0
    for a, b in pairs:
        res = infinitesimal_from_finite(theta, a, b, point)
        entry = {"a": a, "b": b, "value": res.value, "error": res.error}
        if reference is not None:
            want = reference(a, b)
            entry["reference"] = want
            worst_ref = max(worst_ref,
                            abs(res.value - want) / max(1.0, abs(want)))
        entries.append(entry)

    checks = []
    if reference is not None:
        checks.append(_check("matches-classified-representative",
                             worst_ref <= EXTRACTION_TOL,
                             max_relative_deviation=worst_ref))
    if kind == "milne" and config.all_pairs:
        checks.extend(_milne_table_checks(entries))
    passed = all(c["passed"] for c in checks)
    elapsed = time.perf_counter() - started
    echo = {"group": config.group, "theta": config.theta,
            "pair": config.pair, "all_pairs": config.all_pairs,
            "point": {"x": list(PROBE_X), "t": PROBE_T}}
    results = {"entries": entries, "checks": checks, "passed": passed}
    return _report(config, echo, results, timing=elapsed), passed


def _milne_table_checks(entries: List[dict]) -> List[dict]:
    """Structural zeros a realizable table must show at t = 0."""
    worst = {"rotation-time-zero": 0.0, "cross-axis-zero": 0.0,
             "inner-pairs-zero-at-origin": 0.0}
    for entry in entries:
        la, lb = _axis_level(entry["a"]), _axis_level(entry["b"])
        value = abs(entry["value"])
        if la[0] is None or lb[0] is None:
            worst["rotation-time-zero"] = max(worst["rotation-time-zero"], value)
        elif la[1] != lb[1]:
            worst["cross-axis-zero"] = max(worst["cross-axis-zero"], value)
        elif la[0] >= 1 and lb[0] >= 1:
            worst["inner-pairs-zero-at-origin"] = max(
                worst["inner-pairs-zero-at-origin"], value)
    return [_check(name, value <= EXTRACTION_TOL, max_abs_value=value)
            for name, value in worst.items()]


# -- rendering --------------------------------------------------------


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def _detail_text(check: dict) -> str:
    extras = ["%s=%s" % (k, v) for k, v in check.items()
              if k not in ("name", "passed")]
    return (" (" + ", ".join(extras) + ")") if extras else ""


def render_text(report: dict) -> str:
    lines = ["explab %s %s" % (report["tool"]["version"], report["command"])]
    results = report["results"]
    if report["command"] == "classify":
        lines.append("algebra %s: quotient_dim %d (cocycle_dim %d, "
                     "coboundary_dim %d, degree_used %d)"
                     % (results["algebra"], results["quotient_dim"],
                        results["cocycle_dim"], results["coboundary_dim"],
                        results["degree_used"]))
        if results.get("coordinates"):
            lines.append("coordinates: " + ", ".join(results["coordinates"]))
    else:
        for entry in results.get("entries", ()):
            ref = ("  ref %.9g" % entry["reference"]
                   if "reference" in entry else "")
            lines.append("%s,%s: %.9g (err %.3g)%s"
                         % (entry["a"], entry["b"], entry["value"],
                            entry["error"], ref))
        for check in results.get("checks", ()):
            lines.append("%s %s%s" % ("PASS" if check["passed"] else "FAIL",
                                      check["name"], _detail_text(check)))
        lines.append("result: %s" % ("PASS" if results.get("passed") else "FAIL"))
    if report["timing"] is not None:
        lines.append("elapsed: %.3f s" % report["timing"])
    return "\n".join(lines)


def _emit(report: dict, config: RunConfig) -> None:
    text = render_json(report) if config.fmt == "json" else render_text(report)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# -- entry point ------------------------------------------------------


def _degree_arg(value: str):
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("degree must be 'auto' or an integer")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="explab",
        description="Classify time-dependent infinitesimal exponents and "
                    "verify the group-level structure behind them.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output_flags(p):
        p.add_argument("--format", choices=("json", "text"), default="json",
                       dest="fmt", help="report format (default json)")
        p.add_argument("--out", default=None, help="write the report to a file")

    p_classify = sub.add_parser("classify", help="classify an algebra")
    p_classify.add_argument("--algebra", required=True,
                            help="galilean | milne:<m> | phase-space:<n> | file.json")
    p_classify.add_argument("--degree", type=_degree_arg, default="auto",
                            help="polynomial degree bound, or 'auto'")
    add_output_flags(p_classify)

    p_verify = sub.add_parser("verify", help="run a named check suite")
    p_verify.add_argument("--suite", required=True,
                          help="galilean | milne:<m> | bundle | schrodinger | h-group")
    p_verify.add_argument("--samples", type=int, default=1000)
    p_verify.add_argument("--seed", type=int, default=0)
    add_output_flags(p_verify)

    p_exponent = sub.add_parser("exponent",
                                help="extract infinitesimal values numerically")
    p_exponent.add_argument("--group", required=True,
                            help="galilean | milne:<m>")
    p_exponent.add_argument("--theta", required=True,
                            help="galilean-mass:<m> | milne-schrodinger:<m>")
    which = p_exponent.add_mutually_exclusive_group(required=True)
    which.add_argument("--pair", default=None,
                       help="comma-separated generator pair, e.g. b1,d1")
    which.add_argument("--all-pairs", action="store_true",
                       help="extract every unordered generator pair")
    add_output_flags(p_exponent)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            algebra=getattr(args, "algebra", None),
            degree=getattr(args, "degree", "auto"),
            suite=getattr(args, "suite", None),
            group=getattr(args, "group", None),
            theta=getattr(args, "theta", None),
            pair=getattr(args, "pair", None),
            all_pairs=getattr(args, "all_pairs", False),
            samples=getattr(args, "samples", 1000),
            seed=getattr(args, "seed", 0),
            fmt=args.fmt,
            out=args.out,
        )
        if config.command == "classify":
            report, passed = cmd_classify(config)
        elif config.command == "verify":
            report, passed = cmd_verify(config)
        else:
            report, passed = cmd_exponent(config)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except DegreeCapError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CHECK_FAILED
    except ExtrapolationError as exc:
        print("error: extrapolation did not converge: %s" % exc, file=sys.stderr)
        return EXIT_CHECK_FAILED
    _emit(report, config)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
