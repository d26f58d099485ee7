"""blaschke-sums: command-line front end.

Every subcommand writes its outputs plus manifest.json into --out.  Only the
manifest carries timestamps, so two runs with the same configuration and
seed produce byte-identical data files.  Exit codes: 0 success, 2 bad input
or violated precondition, 3 numerical failure.
"""
import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from fractions import Fraction

from . import __version__
from .core import (BlaschkeProduct, BoundaryPoint, evaluate, expansion_constants, iterate,
                   parse_fraction, product_from_args, required_precision)
from .errors import ContractError, InvalidInputError, NumericalError, StallError

DEFAULT_BITS = 128


# parsing ------------------------------------------------------------------------

def _read_spec(text: str) -> str:
    if os.path.isfile(text):
        with open(text) as fh:
            return fh.read()
    return text


def load_product(text: str) -> BlaschkeProduct:
    return product_from_args(_read_spec(text))


def load_coefficients(text: str):
    from .series import parse_coefficients
    return parse_coefficients(_read_spec(text))


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise InvalidInputError(f"cannot parse complex number {text!r}") from None


def parse_turn(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"cannot parse turn {text!r}") from None


def resolve_bits(value: str, f: BlaschkeProduct | None, depth: int) -> int:
    if value == "auto":
        return required_precision(f, depth) if f is not None else DEFAULT_BITS
    try:
        bits = int(value)
    except ValueError:
        raise InvalidInputError(f"--precision must be an integer or 'auto', got {value!r}") from None
    if bits < 16:
        raise InvalidInputError("--precision must be at least 16 bits")
    return bits


def _accuracy(f, bits, n):
    """Accuracy bits left after n steps from a point carrying ``bits``."""
    acc = bits - required_precision(f, n, 0)
    if acc < 1 and f.mono == 0:
        raise InvalidInputError(f"{bits} bits leave no accuracy after {n} steps; "
                                f"need more than {required_precision(f, n, 0)}")
    return max(acc, 1)


def digits_for(bits: int) -> int:
    return max(17, math.ceil(bits * math.log10(2)))


def fmt_real(x: float, bits: int = 53) -> str:
    return f"{float(x):.{digits_for(bits)}g}"


def fmt_complex(z: complex, bits: int = 53) -> str:
    z = complex(z)
    d = digits_for(bits)
    return f"{z.real:.{d}g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.{d}g}i"


# output ---------------------------------------------------------------------------

class Outputs:
    def __init__(self, root: str):
        self.root = root
        self.files = []
        os.makedirs(root, exist_ok=True)

    def path(self, name: str) -> str:
        self.files.append(name)
        return os.path.join(self.root, name)

    def json(self, name: str, obj):
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def text(self, name: str, text: str):
        with open(self.path(name), "w") as fh:
            fh.write(text)


def _versions() -> dict:
    out = {"blaschke_sums": __version__, "python": platform.python_version()}
    for mod in ("numpy", "scipy", "numba", "gmpy2"):
        try:
            out[mod] = __import__(mod).__version__
        except (ImportError, AttributeError):
            out[mod] = None
    return out


def write_manifest(out: Outputs, args, resolved: dict, started: float, status: str):
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    config.update(resolved)
    manifest = {"command": args.command, "config": config, "seed": getattr(args, "seed", None),
                "versions": _versions(), "status": status,
                "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
                "wall_time_s": round(time.time() - started, 3),
                "outputs": list(out.files)}
    with open(os.path.join(out.root, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")


# commands -------------------------------------------------------------------------

def cmd_eval(args, out):
    f = load_product(args.product)
    if args.turn is not None:
        bits = resolve_bits(args.precision, f, 1)
        xi = BoundaryPoint.from_turn(parse_turn(args.turn), bits)
        img = iterate(f, xi, 1, accuracy_bits=_accuracy(f, bits, 1))
        print(img.to_decimal())
        out.json("eval.json", {"turn": xi.to_decimal(), "image_turn": img.to_decimal(),
                               "precision_bits": bits})
        return {"precision_bits": bits}
    z = parse_complex(args.point)
    w = evaluate(f, z)
    print(fmt_complex(w))
    out.json("eval.json", {"point": fmt_complex(z), "value": fmt_complex(w)})
    return {}


def cmd_iterate(args, out):
    f = load_product(args.product)
    bits = resolve_bits(args.precision, f, args.n)
    xi = BoundaryPoint.from_turn(parse_turn(args.turn), bits)
    rows = [(0, xi.to_decimal())]
    for k in range(1, args.n + 1):
        rows.append((k, iterate(f, xi, k, accuracy_bits=_accuracy(f, bits, k)).to_decimal()))
    with open(out.path("orbit.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "turn"])
        w.writerows(rows)
    print(rows[-1][1])
    return {"precision_bits": bits}


def cmd_arc_image(args, out):
    from .circle import Arc, arc_image
    f = load_product(args.product)
    bits = resolve_bits(args.precision, f, args.n)
    arc = Arc(parse_turn(args.center), parse_turn(args.length), bits)
    res = arc_image(f, arc, args.n)
    out.json("arc_image.json", res.to_json())
    print(fmt_real(res.measure))
    return {"precision_bits": bits}


def cmd_constants(args, out):
    f = load_product(args.product)
    ec = expansion_constants(f)
    out.json("constants.json", ec.to_json())
    print(f"k_min={fmt_real(ec.k_min)} k_max={fmt_real(ec.k_max)}")
    return {}


def _constants(args, f):
    from .solver.calibrate import ConstantEstimates, calibrate_constants
    if getattr(args, "constants", None):
        with open(args.constants) as fh:
            return ConstantEstimates.from_json(json.load(fh))
    return calibrate_constants(f, budget=args.calibration_budget, seed=args.seed)


def cmd_calibrate(args, out):
    f = load_product(args.product)
    consts = _constants(args, f)
    out.json("constants.json", consts.to_json())
    print(f"epsilon_f={consts.epsilon_f:.6g} c_f={consts.c_f:.6g} eta_f={consts.eta_f:.6g} "
          f"gamma0={consts.gamma0:.6g} delta1={consts.delta1:.6g} T_gap={consts.T_gap}")
    return {}


def _write_sums(out, f, a, trace):
    from .series import orbit_values, tail_abs_sum
    N = trace.depth
    if trace.witness is None or N < 1:
        return
    orb = orbit_values(f, trace.witness, N)
    coef = a.array(N)
    with open(out.path("sums.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "Re", "Im", "tail_bound"])
        s = 0j
        for n in range(1, N + 1):
            s += coef[n] * orb[n]
            try:
                tb = fmt_real(tail_abs_sum(a, n).upper)
            except ContractError:
                tb = "inf"
            w.writerow([n, fmt_real(s.real), fmt_real(s.imag), tb])


def _emit_trace(out, f, a, trace):
    out.text("trace.json", trace.dumps() + "\n")
    _write_sums(out, f, a, trace)
    print(trace.summary())


def cmd_lower_bound(args, out):
    from .solver.lower_bound import certify_lower_bound
    f = load_product(args.product)
    a = load_coefficients(args.coeffs)
    consts = _constants(args, f)
    xi, ratio, trace = certify_lower_bound(f, a, parse_complex(args.z), args.M, args.N, consts,
                                           T=args.T, T_short=args.T_short, budget=args.budget)
    out.text("trace.json", trace.dumps() + "\n")
    thr = trace.diagnostics["threshold"]
    print(f"ratio={ratio:.6g} threshold={thr:.6g} certified={trace.certified} "
          f"witness={xi.to_decimal()[:32]}")
    return {"constants": consts.to_json()}


def cmd_solve_target(args, out):
    from .solver.paley import paley_solve
    f = load_product(args.product)
    a = load_coefficients(args.coeffs)
    consts = _constants(args, f)
    try:
        trace = paley_solve(f, a, parse_complex(args.target), consts, max_rounds=args.max_rounds,
                            tol=args.tol, budget=args.budget)
    except StallError as exc:
        if exc.trace is not None:
            out.text("trace.json", exc.trace.dumps() + "\n")
        raise
    _emit_trace(out, f, a, trace)
    return {"constants": consts.to_json()}


def cmd_cluster_follow(args, out):
    from .solver.paley import cluster_follow
    f = load_product(args.product)
    a = load_coefficients(args.coeffs)
    consts = _constants(args, f)
    targets = [parse_complex(t) for t in args.targets.split(";") if t.strip()]
    try:
        trace = cluster_follow(f, a, targets, consts, per_target_tol=args.tol,
                               max_rounds=args.max_rounds, budget=args.budget)
    except StallError as exc:
        if exc.trace is not None:
            out.text("trace.json", exc.trace.dumps() + "\n")
        raise
    _emit_trace(out, f, a, trace)
    return {"constants": consts.to_json()}


def cmd_peano_scan(args, out):
    from .harness.peano import peano_scan
    f = load_product(args.product)
    a = load_coefficients(args.coeffs)
    disc = None
    if args.disc:
        parts = [float(p) for p in args.disc.split(",")]
        if len(parts) != 3:
            raise InvalidInputError("--disc takes 're,im,radius'")
        disc = (complex(parts[0], parts[1]), parts[2])
    grid = peano_scan(f, a, disc, resolution=args.resolution, sample_budget=args.budget,
                      N_total=args.n_total)
    grid.write(out.path("grid.pgm"), out.path("grid.json"))
    print(f"coverage={grid.coverage_fraction:.6f} samples={grid.samples_used} "
          f"disc={fmt_complex(grid.disc_center, 24)[:40]} r={grid.disc_radius:.6g} "
          f"budget_exhausted={grid.budget_exhausted}")
    return {"N_total": grid.N_total}


def cmd_abel_check(args, out):
    from .harness.abel import abel_check, default_radii
    f = load_product(args.product)
    a = load_coefficients(args.coeffs)
    xi = BoundaryPoint.from_turn(parse_turn(args.turn), DEFAULT_BITS)
    radii = [float(r) for r in args.radii.split(",")] if args.radii else default_radii(args.j_max)
    rep = abel_check(f, a, xi, radii)
    out.json("abel.json", rep.to_json())
    print(f"max_discrepancy={rep.max_discrepancy:.6g} bound={rep.bound:.6g} "
          f"within_bound={rep.within_bound} converged={rep.converged}")
    return {}


def cmd_lemma_suite(args, out):
    from .harness.suites import run_lemma_suite
    opts = {}
    if args.constant:
        opts["constant"] = args.constant
    rep = run_lemma_suite(args.id, trial_count=args.trials, seed=args.seed,
                          tolerance=args.tolerance, **opts)
    out.text("report.jsonl", rep.to_jsonl() + "\n")
    print(f"{rep.property_id}: trials={rep.trials} violations={rep.violations} "
          f"worst_margin={rep.worst_margin:.6g}")
    return {}


# parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blaschke-sums",
                                description="Sums of iterates of finite Blaschke products.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, product=True, coeffs=False, seed=False):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        if product:
            sp.add_argument("--product", required=True,
                            help="product JSON file, JSON text, or zeros like '0,0,0.5'")
        if coeffs:
            sp.add_argument("--coeffs", required=True,
                            help="coefficient JSON file, JSON text, or shorthand like 'power:1'")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        return sp

    def solver_opts(sp):
        sp.add_argument("--constants", help="ConstantEstimates JSON (default: calibrate)")
        sp.add_argument("--calibration-budget", type=int, default=128)
        sp.add_argument("--budget", type=int, default=256, help="block search budget")

    sp = add("eval", cmd_eval, "evaluate f at a disk point or a boundary turn")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--point", help="complex point of the closed disk, e.g. 0.3+0.4i")
    g.add_argument("--turn", help="boundary point as a turn (decimal or fraction)")
    sp.add_argument("--precision", default="auto")

    sp = add("iterate", cmd_iterate, "boundary orbit of a turn")
    sp.add_argument("--turn", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--precision", default="auto")

    sp = add("arc-image", cmd_arc_image, "f^n of an arc and its lifted measure")
    sp.add_argument("--center", required=True)
    sp.add_argument("--length", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--precision", default="auto")

    add("constants", cmd_constants, "min and max of |f'| on the circle")

    sp = add("calibrate", cmd_calibrate, "empirical solver constants", seed=True)
    sp.add_argument("--calibration-budget", type=int, default=128)

    sp = add("lower-bound", cmd_lower_bound, "certify Re sum >= c * mass on a block",
             coeffs=True, seed=True)
    solver_opts(sp)
    sp.add_argument("--z", required=True, help="interior point z with |f^M(z)| < epsilon_f")
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--T", type=int, default=20)
    sp.add_argument("--T-short", type=int, default=2)

    sp = add("solve-target", cmd_solve_target, "find xi whose partial sums approach a target",
             coeffs=True, seed=True)
    solver_opts(sp)
    sp.add_argument("--target", required=True)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--max-rounds", type=int, default=200)

    sp = add("cluster-follow", cmd_cluster_follow, "one xi visiting several targets in turn",
             coeffs=True, seed=True)
    solver_opts(sp)
    sp.add_argument("--targets", required=True, help="targets separated by ';'")
    sp.add_argument("--tol", type=float, default=1e-2)
    sp.add_argument("--max-rounds", type=int, default=200)

    sp = add("peano-scan", cmd_peano_scan, "coverage of a disc by the boundary image",
             coeffs=True, seed=True)
    sp.add_argument("--disc", help="'re,im,radius' (default: chosen by a pilot scan)")
    sp.add_argument("--resolution", type=int, default=64)
    sp.add_argument("--budget", type=int, default=1 << 16, help="sample budget")
    sp.add_argument("--n-total", type=int, default=None, help="truncation (default: from tail)")

    sp = add("abel-check", cmd_abel_check, "radial values against boundary partial sums",
             coeffs=True, seed=True)
    sp.add_argument("--turn", required=True)
    sp.add_argument("--radii", help="comma-separated radii (default 1-2^-j)")
    sp.add_argument("--j-max", type=int, default=20)

    sp = add("lemma-suite", cmd_lemma_suite, "randomized property suite", product=False,
             seed=True)
    sp.add_argument("--id", required=True)
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--tolerance", type=float, default=1e-9)
    sp.add_argument("--constant", choices=("stated", "corrected"),
                    help="constant variant for cor2.2")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        out = Outputs(args.out)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    resolved, status, code = {}, "ok", 0
    try:
        resolved = args.func(args, out) or {}
    except ContractError as exc:
        status, code = f"contract error: {exc}", 2
        print(f"error: {exc}", file=sys.stderr)
    except NumericalError as exc:
        status, code = f"numerical failure: {exc}", 3
        print(f"numerical failure: {exc}", file=sys.stderr)
    except (OSError, json.JSONDecodeError) as exc:
        status, code = f"input error: {exc}", 2
        print(f"error: {exc}", file=sys.stderr)
    write_manifest(out, args, resolved, started, status)
    return code


if __name__ == "__main__":
    sys.exit(main())
