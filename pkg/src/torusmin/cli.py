"""Command line interface: JSON reports for each stage of the pipeline.

Exit codes: 0 success, 2 honest non-answer (OpenProblem, Inconclusive),
1 error.  Reports embed the run configuration and the package version, and
contain no timestamps, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from gmpy2 import mpq

from . import __version__
from .blockform import block_form
from .cohomology import WitnessVerdict, affine_mismatch_check, obstruction_witnesses, solve_diophantine_conjugacy
from .errors import TorusminError
from .exact import IntegerMatrix, as_q, frac_to_str
from .liouville import MAX_CLI_LEVEL, build_liouville, certify, golden_enclosure, sqrt_enclosure, verify_nested
from .orbitlab import collect, diagnostics, simulate, simulate_fast, write_torb
from .skew import SkewProductSystem, construct_from_matrix
from .spectra import Verdict, classify

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int = 256
    J: int = 3
    K: int | None = None  # None: J + 2
    hyperbolic_grid: int = 256
    conjugacy_grid: int = 1024
    coverage_grid: int | None = None  # None: largest g with g^n <= 2^22, at most 64
    tol: float = 1e-12
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("precision_bits", "J", "hyperbolic_grid", "conjugacy_grid", "threads"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.K is not None and self.K <= 0:
            raise ValueError("K must be positive")
        if self.coverage_grid is not None and self.coverage_grid <= 0:
            raise ValueError("coverage_grid must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _jsonable(x):
    if isinstance(x, (mpq, Fraction)):
        return frac_to_str(x)
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 30)
    if isinstance(x, mpmath.mpc):
        return [mpmath.nstr(x.real, 30), mpmath.nstr(x.imag, 30)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, (Verdict, WitnessVerdict)):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _read_matrix(path: str) -> IntegerMatrix:
    d = _read_json(path)
    if isinstance(d, list):
        return IntegerMatrix(d)
    return IntegerMatrix.from_json(d)


def _read_system(path: str) -> SkewProductSystem:
    d = _read_json(path)
    return SkewProductSystem.from_json(d.get("result", d) if "config" in d else d)


def _int_list(s: str) -> tuple:
    return tuple(int(x) for x in s.split(","))


# ---------------------------------------------------------------------------
# subcommands return (result, exit code)


def cmd_classify(args, cfg: RunConfig):
    rep = classify(_read_matrix(args.matrix))
    code = EXIT_UNKNOWN if rep.verdict == Verdict.OPEN_PROBLEM else EXIT_OK
    return rep.to_json(), code


def cmd_blockform(args, cfg: RunConfig):
    return block_form(_read_matrix(args.matrix)).to_json(), EXIT_OK


def cmd_liouville(args, cfg: RunConfig):
    if args.j > MAX_CLI_LEVEL:
        raise ValueError(f"level j={args.j} exceeds the supported maximum {MAX_CLI_LEVEL}")
    targets = args.targets.split(",")
    K = cfg.K if cfg.K is not None else args.j + 2
    d = build_liouville(targets, K)
    certs = certify(targets, args.j, K)
    out = []
    for c in certs:
        row = c.to_json()
        row["nested"] = verify_nested(c, d)
        out.append(row)
    ok = all(c.holds for c in certs) and all(r["nested"] for r in out)
    return {"datum": d.to_json(), "certificates": out, "all_hold": ok}, EXIT_OK if ok else EXIT_ERROR


def cmd_construct(args, cfg: RunConfig):
    L = _read_matrix(args.matrix)
    rep = classify(L)
    if rep.verdict == Verdict.OPEN_PROBLEM:
        return {"classification": rep.to_json(), "system": None}, EXIT_UNKNOWN
    sys_ = construct_from_matrix(L, cfg.J, cfg.K, cfg.precision_bits)
    return sys_.to_json(), EXIT_OK


def _witness_chunk(payload):
    sys_json, lgs, m, J, prec = payload
    sys_ = SkewProductSystem.from_json(sys_json)
    return [w.to_json() for w in obstruction_witnesses(sys_, lgs, m, J, prec)]


def cmd_witness(args, cfg: RunConfig):
    sys_ = _read_system(args.system)
    lgs = [_int_list(s) for s in args.lgamma.split(";")]
    J = args.J if args.J is not None else cfg.J
    m = args.m
    if cfg.threads > 1 and len(lgs) > 1:
        sj = sys_.to_json()
        chunks = [lgs[i :: cfg.threads] for i in range(cfg.threads)]
        with ProcessPoolExecutor(cfg.threads) as ex:
            parts = list(ex.map(_witness_chunk, [(sj, c, m, J, cfg.precision_bits) for c in chunks if c]))
        # undo the round-robin split so the order matches the input
        res = [None] * len(lgs)
        for i, part in enumerate(parts):
            for j, w in enumerate(part):
                res[i + j * cfg.threads] = w
    else:
        res = [w.to_json() for w in obstruction_witnesses(sys_, lgs, m, J, cfg.precision_bits)]
    mism = None
    if args.l is not None:
        mm = m if m is not None else sys_.m
        mism = [affine_mismatch_check(sys_, mm, _int_list(args.l), lg).to_json() for lg in lgs]
    inconclusive = any(w["verdict"] == WitnessVerdict.INCONCLUSIVE.value for w in res)
    if mism is not None:
        inconclusive = any(w["verdict"] == WitnessVerdict.INCONCLUSIVE.value and not mr["mismatch"] for w, mr in zip(res, mism))
    return {"witnesses": res, "mismatch": mism}, EXIT_UNKNOWN if inconclusive else EXIT_OK


def _alpha_enclosure(spec: str, bits: int):
    if spec == "golden":
        return golden_enclosure(bits)
    if spec.startswith("sqrt"):
        lo, hi = sqrt_enclosure(int(spec[4:]), bits)
        f = lo.numerator // lo.denominator
        return lo - f, hi - f
    q = as_q(spec)
    return q, q


def cmd_conjugate(args, cfg: RunConfig):
    sys_ = _read_system(args.system)
    encs = [_alpha_enclosure(a, max(cfg.precision_bits, 64)) for a in args.alpha.split(",")]
    if len(encs) != sys_.p:
        raise ValueError(f"need {sys_.p} translation components, got {len(encs)}")
    sys_ = dataclasses.replace(sys_, alpha=tuple(lo for lo, _ in encs), liouville=None)
    conj = solve_diophantine_conjugacy(
        sys_, cfg.tol, encs if sys_.p > 1 else encs[0], args.C, args.r, args.Q, cfg.conjugacy_grid, prec=cfg.precision_bits
    )
    return conj.to_json(), EXIT_OK


def cmd_simulate(args, cfg: RunConfig):
    sys_ = _read_system(args.system)
    N = int(float(args.N))
    z0 = None
    if args.z0 is not None:
        z0 = [as_q(x) for x in args.z0.split(",")]
    elif args.random_start:
        rng = np.random.default_rng(cfg.seed)
        z0 = [mpq(int(rng.integers(0, 2**32)), 2**32) for _ in range(sys_.n)]
    if args.mode == "exact":
        orbit = collect(simulate(sys_, N, z0, args.m, cfg.precision_bits), keep_exact=args.dump is not None,
                        precision=cfg.precision_bits)
    else:
        orbit = simulate_fast(sys_, N, z0, args.m)
    if args.dump:
        write_torb(args.dump, orbit)
    diag = diagnostics(orbit, args.kmax, cfg.coverage_grid)
    out = diag.to_json()
    out["mode"] = args.mode
    out["m_power"] = args.m
    return out, EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=256, help="working precision in bits")
    common.add_argument("--J", dest="cfg_J", type=int, default=3, help="truncation level of the constructed series")
    common.add_argument("--K", type=int, default=None, help="Liouville partial-sum terms (default J + 2)")
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=int, default=None, help="grid for conjugacy residuals / coverage boxes per axis")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="torusmin", description="Linear parts of minimal torus maps: classification, constructions, certificates.")
    p.add_argument("--version", action="version", version=f"torusmin {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="spectral classification of an integer matrix")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("blockform", parents=[common], help="unipotent / periodic block form")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_blockform)

    s = sub.add_parser("liouville", parents=[common], help="approximation certificates for a Liouville datum")
    s.add_argument("--targets", required=True, help="comma separated reduced fractions, e.g. 1/2,1/3")
    s.add_argument("--j", type=int, required=True)
    s.set_defaults(func=cmd_liouville)

    s = sub.add_parser("construct", parents=[common], help="build the minimal skew product for a matrix")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("witness", parents=[common], help="Fourier obstruction witnesses")
    s.add_argument("system")
    s.add_argument("--lgamma", required=True, help="fiber character(s): 1,0 or 1,0;0,1")
    s.add_argument("--l", default=None, help="base character for the affine mismatch check")
    s.add_argument("--m", type=int, default=None, help="power of the map (default: the system's m)")
    s.add_argument("--probe-J", dest="J", type=int, default=None, help="probes per sequence (default --J)")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("conjugate", parents=[common], help="smooth conjugacy over a Diophantine translation")
    s.add_argument("system")
    s.add_argument("--alpha", required=True, help="golden, sqrtN or num/den (comma separated per base coordinate)")
    s.add_argument("--C", default="1/10")
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--Q", type=int, default=1000)
    s.set_defaults(func=cmd_conjugate)

    s = sub.add_parser("simulate", parents=[common], help="orbit simulation and equidistribution diagnostics")
    s.add_argument("system")
    s.add_argument("--N", default="1e5")
    s.add_argument("--m", type=int, default=1, help="simulate psi = phi^m")
    s.add_argument("--mode", choices=("fast", "exact"), default="fast")
    s.add_argument("--kmax", type=int, default=3)
    s.add_argument("--z0", default=None, help="comma separated start point (default 0)")
    s.add_argument("--random-start", action="store_true", help="start point drawn from --seed")
    s.add_argument("--dump", default=None, help="write the orbit as a TORB file")
    s.set_defaults(func=cmd_simulate)
    return p


def config_from_args(args) -> RunConfig:
    grid = args.grid
    return RunConfig(
        precision_bits=args.precision,
        J=args.cfg_J,
        K=args.K,
        conjugacy_grid=grid if grid is not None and args.command == "conjugate" else 1024,
        coverage_grid=grid if args.command == "simulate" else None,
        tol=args.tol,
        seed=args.seed,
        threads=args.threads,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        result, code = args.func(args, cfg)
    except (TorusminError, ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"torusmin {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR
    report = {"command": args.command, "version": __version__, "config": cfg.to_json(), "result": result}
    text = dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
