"""Command line: generate sets, run checks, export family sweeps."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

from . import corpus
from .errors import RieszError
from .kernel import Kernel
from .radial import RadialSet
from .stability import (
    FAIL,
    Analysis,
    Tolerances,
    check_alpha_yg,
    check_dom,
    check_fmp_deficit,
    check_lemma_key3,
    check_lemma_max,
    check_poisson,
    check_reflection_positivity,
    check_talenti,
    check_theorem_main,
    check_theorem_sharp3,
    check_truncation,
    reports_to_json,
    sort_reports,
)
from .sweeps import FAMILIES, parse_range, sweep_annulus, sweep_ellipsoid, sweep_lambda, sweep_two_balls
from .voxel import VoxelSet

log = logging.getLogger("riesz_stability")

CHECKS = ("sharp3", "main", "lemma-max", "key3", "reflection", "talenti", "alpha-yg", "truncation", "poisson",
          "talenti-integrated", "dom")

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    n: int = 3
    lam: float = 1.0
    grid: int = corpus.DEFAULT_RESOLUTION
    subsamples: int = 4
    tol: float | None = None
    seed: int = 0
    out: str | None = None
    json: bool = False
    nearfield: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid < 8:
            raise ValueError(f"grid resolution must be at least 8, got {self.grid}")
        if self.subsamples < 1:
            raise ValueError("subsamples must be positive")
        Kernel(self.n, self.lam)

    @property
    def kernel(self):
        return Kernel(self.n, self.lam)

    @property
    def tolerances(self):
        return Tolerances(override=self.tol)


def load_set(path, resolution=corpus.DEFAULT_RESOLUTION, subsamples=4):
    """Read a voxel or radial set JSON file; radial sets are voxelized."""
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise ValueError(f"{path}: expected a JSON object")
    try:
        if "shells" in d:
            return corpus.radial(RadialSet.from_dict(d), resolution, subsamples)
        return VoxelSet.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed set description ({exc})") from exc


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path, text):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


# gen ---------------------------------------------------------------------------


def cmd_gen(args, cfg: RunConfig) -> int:
    params = {}
    if args.shape == "annulus":
        params["a"] = args.a
    elif args.shape == "ball":
        params["R"] = args.R
    elif args.shape == "ellipsoid":
        params["semi_axes"] = tuple(args.semi_axes) if args.semi_axes else (args.e, 1.0 / args.e, 1.0)
    elif args.shape == "two-balls":
        params.update(R=args.R, separation=args.separation)
    elif args.shape == "box":
        params["sides"] = tuple(args.sides) if args.sides else (1.6,) * cfg.n
    obj = corpus.generate(args.shape, resolution=cfg.grid, n=cfg.n, seed=cfg.seed, **params)
    text = dump_json(obj.to_dict())
    out = cfg.out or f"{args.shape}.json"
    _write(out, text)
    if cfg.json:
        sys.stdout.write(dump_json({"path": out, "kind": type(obj).__name__, **params}))
    else:
        print(f"wrote {out}: {obj!r}")
    return EXIT_OK


# verify ----------------------------------------------------------------------------


def run_check(check, A, cfg: RunConfig, name="set", E=None):
    kernel = cfg.kernel
    tol = cfg.tolerances
    an = Analysis(A, kernel, name, cfg.subsamples, cfg.nearfield, tol)
    if check == "sharp3":
        return [check_theorem_sharp3(A, analysis=an)]
    if check == "main":
        return [check_theorem_main(A, kernel, analysis=an)]
    if check == "lemma-max":
        return [check_lemma_max(A, kernel, analysis=an)]
    if check == "key3":
        return [check_lemma_key3(A, cfg.extra.get("r"), kernel, name, tol, an)]
    if check == "reflection":
        reps = [check_reflection_positivity(A, ax, kernel, name, tol, cfg.nearfield) for ax in range(A.n)]
        reps.append(check_fmp_deficit(A, kernel, name, tol, cfg.nearfield))
        return reps
    if check == "talenti":
        return [check_talenti(A, analysis=an)]
    if check == "talenti-integrated":
        return [check_talenti(A, analysis=an, integrated=True)]
    if check == "alpha-yg":
        return [check_alpha_yg(A, kernel, analysis=an)]
    if check == "truncation":
        return [check_truncation(A, kernel, cfg.extra.get("c"), name, tol, nearfield=cfg.nearfield)]
    if check == "poisson":
        return [check_poisson(A, analysis=an)]
    if check == "dom":
        return [check_dom(A, A if E is None else E, kernel, analysis=an)]
    raise ValueError(f"unknown check {check!r}")


def cmd_verify(args, cfg: RunConfig) -> int:
    A = load_set(args.set_file, cfg.grid, cfg.subsamples)
    if A.n != cfg.n:
        cfg = RunConfig(**{**cfg.__dict__, "n": A.n})
    E = load_set(args.against, cfg.grid, cfg.subsamples) if args.against else None
    name = os.path.splitext(os.path.basename(args.set_file))[0]
    reports = sort_reports(run_check(args.check, A, cfg, name, E))
    text = reports_to_json(reports)
    if cfg.out:
        _write(cfg.out, text + "\n")
    if cfg.json:
        sys.stdout.write(text + "\n")
    else:
        for r in reports:
            print(r)
    return EXIT_FAIL if any(r.status == FAIL for r in reports) else EXIT_OK


# sweep ----------------------------------------------------------------------------


def cmd_sweep(args, cfg: RunConfig) -> int:
    from .plots import plot_sweep

    fam = args.family
    if fam == "annulus":
        sw = sweep_annulus(parse_range(args.a), cfg.kernel)
    elif fam == "ellipsoid":
        sw = sweep_ellipsoid(parse_range(args.e), cfg.kernel, cfg.grid, cfg.subsamples)
    elif fam == "two-balls":
        sw = sweep_two_balls(parse_range(args.s), cfg.kernel, cfg.grid, cfg.subsamples)
    else:
        a = parse_range(args.a)
        if len(a) != 1:
            raise ValueError("lambda-scan takes a single annulus parameter --a")
        sw = sweep_lambda(a[0], parse_range(args.lambdas), cfg.n)
    out = cfg.out or f"sweep-{fam}"
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, f"{fam}.csv")
    sw.write_csv(csv_path)
    summary = sw.summary()
    _write(os.path.join(out, f"{fam}-summary.json"), dump_json(summary))
    plot_sweep(sw, os.path.join(out, f"{fam}.png"))
    if cfg.json:
        sys.stdout.write(dump_json(summary))
    else:
        for row in sw.rows():
            print("  ".join(f"{v:.6g}" for v in row))
        print(f"slope={summary['slope']}  min delta/alpha^2={summary['min_ratio_quadratic']}  -> {csv_path}")
    return EXIT_OK


def cmd_info(args, cfg: RunConfig) -> int:
    from .potential import compute_cell_constants
    from .stability import theorem_main_constant

    k = cfg.kernel
    t = compute_cell_constants(k)
    info = {"kernel": k.to_dict(), "reflection_positive": k.reflection_positive, "newton": k.is_newton,
            "cell_T": t.T, "cell_S": t.S}
    if k.is_newton:
        info["c_n"] = theorem_main_constant(k.n)
    sys.stdout.write(dump_json(info))
    return EXIT_OK


# parser -------------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3, help="dimension")
    common.add_argument("--lambda", dest="lam", type=float, default=1.0, help="kernel exponent, 0 < lambda < n")
    common.add_argument("--grid", type=int, default=corpus.DEFAULT_RESOLUTION, help="cells per axis")
    common.add_argument("--subsamples", type=int, default=4, help="antialiasing subsamples per axis")
    common.add_argument("--tol", type=float, default=None, help="absolute tolerance replacing K*h/R_A")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (gen, verify) or directory (sweep)")
    common.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
    common.add_argument("--nearfield", action="store_true", help="exact cell integrals for offsets up to 2")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="riesz-stability", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a set JSON file")
    g.add_argument("shape", choices=corpus.SHAPES)
    g.add_argument("--a", type=float, default=0.1, help="annulus perturbation parameter")
    g.add_argument("--R", type=float, default=1.0, help="ball radius")
    g.add_argument("--e", type=float, default=1.3, help="ellipsoid elongation: semi-axes (e, 1/e, 1)")
    g.add_argument("--semi-axes", type=float, nargs="+", default=None)
    g.add_argument("--separation", type=float, default=3.0, help="two-balls center distance")
    g.add_argument("--sides", type=float, nargs="+", default=None, help="box side lengths")

    v = sub.add_parser("verify", parents=[common], help="run one check on a set file")
    v.add_argument("check", choices=CHECKS)
    v.add_argument("set_file")
    v.add_argument("--r", type=float, default=None, help="key3 radius (default: smallest containing ball)")
    v.add_argument("--c", type=float, default=None, help="truncation constant (default: scan)")
    v.add_argument("--against", default=None, help="second set E for the dom check (default: the set itself)")

    s = sub.add_parser("sweep", parents=[common], help="family sweep to CSV, summary JSON and figure")
    s.add_argument("family", choices=FAMILIES)
    s.add_argument("--a", default="0.02:0.2:10", help="annulus range start:stop:count (lambda-scan: one value)")
    s.add_argument("--e", default="1.05:1.5:6", help="ellipsoid elongation range")
    s.add_argument("--s", default="0.2:1.2:6", help="two-balls separation range")
    s.add_argument("--lambdas", default="0.8:1.2:5", help="lambda range for lambda-scan")

    sub.add_parser("info", parents=[common], help="kernel constants")
    return p


COMMANDS = {"gen": cmd_gen, "verify": cmd_verify, "sweep": cmd_sweep, "info": cmd_info}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.command, args.n, args.lam, args.grid, args.subsamples, args.tol, args.seed,
                        args.out, args.json, args.nearfield,
                        {"r": getattr(args, "r", None), "c": getattr(args, "c", None)})
        return COMMANDS[args.command](args, cfg)
    except (RieszError, ValueError, OSError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
