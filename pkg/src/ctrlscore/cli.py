"""Command-line interface: ``ctrlscore {score,sweep,diagnose,fixture}``.

Every run flag can also be given in a ``key = value`` config file
(``--config``); flags on the command line win.  Without ``--input`` the
built-in 10-node fixture is used.

Exit codes: 0 success, 1 usage, 2 assumption violation, 3 non-convergence
or numerical failure, 4 input/output or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .diagnostics import controllability_rank, diagnose
from .errors import (
    AssumptionViolation,
    ControlScoreError,
    NetworkSpecError,
)
from .linalg import ZERO_TOL
from .network import (
    build_adjacency,
    build_laplacian_dynamics,
    fixture_fig2,
    format_edge_list,
    read_edge_list,
    read_matrix,
)
from .scoring import SolverOptions, score_finite, score_infinite
from .spectral import SEMISIMPLE_TOL, block_diagonalize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSUMPTION = 2
EXIT_NONCONVERGENCE = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


def parse_horizon(text) -> float:
    """``inf`` or a positive finite real."""
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "∞"):
        return math.inf
    try:
        T = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"horizon must be 'inf' or a positive number, got {text!r}") from None
    if not (math.isfinite(T) and T > 0):
        raise argparse.ArgumentTypeError(f"horizon must be 'inf' or a positive number, got {text!r}")
    return T


def parse_horizons(text) -> tuple:
    items = [h for h in str(text).split(",") if h.strip()]
    if not items:
        raise argparse.ArgumentTypeError("need at least one horizon")
    return tuple(parse_horizon(h) for h in items)


def _positive_int(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _bool(text) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def convert(text):
        s = str(text).strip().lower()
        if s not in options:
            raise argparse.ArgumentTypeError(f"expected one of {', '.join(options)}, got {text!r}")
        return s
    return convert


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    format: str = "edges"
    node_count: int | None = None
    dynamics: str | None = None         # default: laplacian for edges, raw for matrix
    objective: str = "vcs"
    horizon: float = math.inf
    horizons: tuple = (0.01, 1.0, 1000.0, 10000.0, math.inf)
    eps: float = 1e-8
    sigma: float = 1e-4
    rho: float = 0.5
    alpha0: float = 1.0
    max_iter: int = 100_000
    zero_tol: float = ZERO_TOL
    semisimple_tol: float = SEMISIMPLE_TOL
    output: str = "table"
    controllability: bool = False

    def solver_options(self) -> SolverOptions:
        return SolverOptions(self.eps, self.sigma, self.rho, self.alpha0, self.max_iter)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["horizon"] = _horizon_key(self.horizon)
        d["horizons"] = [_horizon_key(T) for T in self.horizons]
        return d


# converters shared by flags and config entries
CONVERTERS = {
    "input": str,
    "format": _choice("edges", "matrix"),
    "node_count": _positive_int,
    "dynamics": _choice("laplacian", "raw"),
    "objective": _choice("vcs", "aecs"),
    "horizon": parse_horizon,
    "horizons": parse_horizons,
    "eps": float,
    "sigma": float,
    "rho": float,
    "alpha0": float,
    "max_iter": _positive_int,
    "zero_tol": float,
    "semisimple_tol": float,
    "output": _choice("table", "csv", "json"),
    "controllability": _bool,
}


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` comments; keys use flag names with ``-`` or ``_``."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in CONVERTERS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = CONVERTERS[key](value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"config line {lineno}: {key}: {exc}") from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--config", help="key = value file; command-line flags override it")
    g.add_argument("--input", help="network file (default: built-in 10-node fixture)")
    g.add_argument("--format", type=CONVERTERS["format"], help="input format: edges (default) or matrix")
    g.add_argument("--node-count", type=_positive_int, help="node count for edge lists (default: largest index)")
    g.add_argument("--dynamics", type=CONVERTERS["dynamics"],
                   help="laplacian: A = -L of the weighted digraph; raw: use the matrix/adjacency as A")
    g.add_argument("--objective", type=CONVERTERS["objective"], help="vcs (default) or aecs")
    g.add_argument("--horizon", type=parse_horizon, help="'inf' (default) or a positive T")
    g.add_argument("--eps", type=float, help="stopping tolerance on ||p_k - p_k+1||")
    g.add_argument("--sigma", type=float, help="Armijo sufficient-decrease constant")
    g.add_argument("--rho", type=float, help="backtracking factor")
    g.add_argument("--alpha0", type=float, help="initial step size")
    g.add_argument("--max-iter", type=_positive_int, help="iteration cap")
    g.add_argument("--zero-tol", type=float, help="relative tolerance for zero real parts")
    g.add_argument("--semisimple-tol", type=float, help="relative bound on the zero Schur block")
    g.add_argument("--output", type=CONVERTERS["output"], help="table (default), csv or json")

    parser = _Parser(prog="ctrlscore", description="Controllability scores of network dynamics.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    sub.add_parser("score", parents=[common], help="compute VCS or AECS at one horizon")
    sw = sub.add_parser("sweep", parents=[common], help="scores over several horizons")
    sw.add_argument("--horizons", type=parse_horizons,
                    help="comma-separated list, e.g. 0.01,1,1000,10000,inf")
    dg = sub.add_parser("diagnose", parents=[common], help="assumptions, uniqueness and baselines")
    dg.add_argument("--controllability", action="store_const", const=True,
                    help="also report the controllability rank at the AECS optimum")
    fx = sub.add_parser("fixture", help="write the built-in 10-node network")
    fx.add_argument("--format", type=CONVERTERS["format"], default="edges")
    fx.add_argument("--out", help="output path (default: stdout)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        values.update(parse_config_text(text))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def load_system(cfg: RunConfig) -> np.ndarray:
    """System matrix ``A`` from the configured input (or the fixture)."""
    if cfg.input is None:
        spec = fixture_fig2()
        return build_laplacian_dynamics(spec) if cfg.dynamics != "raw" else build_adjacency(spec)
    if cfg.format == "matrix":
        M = read_matrix(cfg.input)
        if cfg.dynamics == "laplacian":
            # matrix read as weighted adjacency; the diagonal is ignored
            adj = M - np.diag(np.diag(M))
            if np.any(adj < 0):
                raise NetworkSpecError("laplacian dynamics need nonnegative adjacency weights")
            return adj - np.diag(adj.sum(axis=1))
        return M
    spec = read_edge_list(cfg.input, cfg.node_count)
    return build_adjacency(spec) if cfg.dynamics == "raw" else build_laplacian_dynamics(spec)


def _horizon_key(T: float) -> str:
    return "inf" if T == math.inf else f"{T:g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    return obj


def render_json(payload) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def _score(A, cfg: RunConfig, T: float, split=None):
    if T == math.inf:
        return score_infinite(A, cfg.objective, cfg.solver_options(), cfg.zero_tol,
                              cfg.semisimple_tol, split=split)
    return score_finite(A, T, cfg.objective, cfg.solver_options())


def _check_infinite(A, cfg: RunConfig):
    """Split ``A`` for an infinite-horizon run, raising on either assumption."""
    split = block_diagonalize(A, cfg.zero_tol, cfg.semisimple_tol)
    if cfg.objective == "aecs" and split.classification.n_minus == 0:
        raise AssumptionViolation("infinite-horizon AECS needs at least one eigenvalue with "
                                  "negative real part")
    return split


def _uniqueness_flags(A, cfg: RunConfig, T: float, split=None) -> dict:
    if T == math.inf:
        rep = diagnose(A, None, cfg.zero_tol, cfg.semisimple_tol, split=split)
        return {
            "vcs_unique_certified": rep.vcs_unique_certified,
            "aecs_unique_certified": rep.aecs_unique_certified,
            "rank_vcs": rep.rank_vcs,
            "rank_aecs": rep.rank_aecs,
        }
    from .diagnostics import theta_prime_check
    hit = theta_prime_check(np.linalg.eigvals(A), T)
    return {
        "exceptional_horizon": hit is not None,
        "vcs_unique_certified": hit is None,
        "aecs_unique_certified": hit is None,
    }


def cmd_score(cfg: RunConfig, out) -> int:
    A = load_system(cfg)
    T = cfg.horizon
    split = _check_infinite(A, cfg) if T == math.inf else None
    report = _score(A, cfg, T, split)
    p = report.allocation
    if cfg.output == "json":
        out.write(render_json({
            "command": "score",
            "config": cfg.to_dict(),
            "report": report.to_dict(),
            "uniqueness": _uniqueness_flags(A, cfg, T, split),
        }))
    elif cfg.output == "csv":
        out.write("node,score\n")
        for i, v in enumerate(p, start=1):
            out.write(f"{i},{float(v)!r}\n")
    else:
        out.write(f"# {cfg.objective} T={_horizon_key(T)} {report.stop_reason} "
                  f"after {report.iterations} iterations\n")
        out.write("node    score\n")
        for i, v in enumerate(p, start=1):
            out.write(f"{i:4d}  {v:.5f}\n")
    if report.uniqueness_warning and cfg.output != "json":
        print(f"warning: {report.uniqueness_warning}", file=sys.stderr)
    return EXIT_OK if report.converged else EXIT_NONCONVERGENCE


def cmd_sweep(cfg: RunConfig, out) -> int:
    A = load_system(cfg)
    horizons = cfg.horizons
    split = _check_infinite(A, cfg) if math.inf in horizons else None
    reports = {T: _score(A, cfg, T, split) for T in horizons}
    keys = [_horizon_key(T) for T in horizons]
    gaps = {}
    if math.inf in reports:
        p_inf = reports[math.inf].allocation
        gaps = {T: float(np.max(np.abs(r.allocation - p_inf))) for T, r in reports.items() if T != math.inf}
    n = A.shape[0]
    if cfg.output == "json":
        out.write(render_json({
            "command": "sweep",
            "config": cfg.to_dict(),
            "horizons": keys,
            "reports": {_horizon_key(T): r.to_dict() for T, r in reports.items()},
            "gap_to_inf": {_horizon_key(T): g for T, g in gaps.items()},
        }))
    elif cfg.output == "csv":
        out.write("node," + ",".join(keys) + "\n")
        for i in range(n):
            out.write(f"{i + 1}," + ",".join(repr(float(reports[T].allocation[i])) for T in horizons) + "\n")
        if gaps:
            out.write("gap_to_inf," + ",".join(repr(gaps[T]) if T in gaps else "" for T in horizons) + "\n")
    else:
        width = max(9, *(len(k) + 2 for k in keys))
        out.write(f"# {cfg.objective} scores by horizon\n")
        out.write("node" + "".join(f"{'T=' + k:>{width}}" for k in keys) + "\n")
        for i in range(n):
            out.write(f"{i + 1:4d}" + "".join(f"{reports[T].allocation[i]:>{width}.5f}" for T in horizons) + "\n")
        if gaps:
            out.write("gap " + "".join(f"{gaps[T]:>{width}.2e}" if T in gaps else " " * (width - 1) + "-"
                                       for T in horizons) + "\n")
    for T, r in reports.items():
        if not r.converged:
            print(f"warning: T={_horizon_key(T)} stopped by {r.stop_reason}", file=sys.stderr)
    return EXIT_OK if all(r.converged for r in reports.values()) else EXIT_NONCONVERGENCE


def _yes(flag) -> str:
    return {True: "PASS", False: "FAIL", None: "n/a"}[flag]


def cmd_diagnose(cfg: RunConfig, out) -> int:
    A = load_system(cfg)
    T = None if cfg.horizon == math.inf else cfg.horizon
    rep = diagnose(A, T, cfg.zero_tol, cfg.semisimple_tol)
    code = EXIT_OK
    post = None
    if cfg.controllability:
        try:
            score = _score(A, replace(cfg, objective="aecs"), cfg.horizon)
            post = {"rank": controllability_rank(A, score.allocation), "n": A.shape[0],
                    "allocation": score.allocation, "converged": score.converged}
            if not score.converged:
                code = EXIT_NONCONVERGENCE
        except AssumptionViolation as exc:
            post = {"error": str(exc)}
            code = EXIT_ASSUMPTION

    flat = {
        "assumption1": rep.assumption1,
        "assumption2": rep.assumption2,
        "n_minus": rep.n_minus,
        "n_zero": rep.n_zero,
        "n_plus": rep.n_plus,
        "rank_vcs": rep.rank_vcs,
        "rank_aecs": rep.rank_aecs,
        "vcs_unique_certified": rep.vcs_unique_certified,
        "aecs_unique_certified": rep.aecs_unique_certified,
        "horizon": _horizon_key(cfg.horizon),
    }
    if T is not None:
        flat["exceptional_horizon"] = rep.theta_prime_hit is not None
    if post is not None:
        flat["controllability_rank"] = post.get("rank")

    if cfg.output == "json":
        payload = {
            "command": "diagnose",
            "config": cfg.to_dict(),
            "diagnostics": flat,
            "violations": list(rep.violations),
            "eigenvalues": list(rep.eigenvalues),
        }
        if rep.theta_prime_hit is not None:
            payload["theta_prime_hit"] = asdict(rep.theta_prime_hit)
        if rep.baseline_scores is not None:
            b = rep.baseline_scores
            payload["baselines"] = {"T": b.T, "ac": b.ac, "vce": b.vce, "ace": b.ace, "ranks": b.ranks}
        if post is not None:
            payload["controllability"] = post
        out.write(render_json(payload))
    elif cfg.output == "csv":
        out.write("field,value\n")
        for k, v in flat.items():
            out.write(f"{k},{'' if v is None else v}\n")
        if rep.baseline_scores is not None:
            b = rep.baseline_scores
            out.write("\nnode,ac,vce,ace,rank\n")
            for i in range(b.ac.size):
                out.write(f"{i + 1},{float(b.ac[i])!r},{float(b.vce[i])!r},{float(b.ace[i])!r},{int(b.ranks[i])}\n")
    else:
        out.write(f"assumption 1 (an eigenvalue with negative real part): {_yes(rep.assumption1)}\n")
        out.write(f"assumption 2 (zero is the only imaginary-axis eigenvalue, semisimple): "
                  f"{_yes(rep.assumption2)}\n")
        for msg in rep.violations:
            out.write(f"  - {msg}\n")
        out.write(f"spectrum split: n_minus={rep.n_minus} n_zero={rep.n_zero} n_plus={rep.n_plus}\n")
        n = A.shape[0]
        if rep.rank_vcs is not None:
            out.write(f"infinite-horizon VCS uniqueness: {_yes(rep.vcs_unique_certified)} "
                      f"(rank {rep.rank_vcs}/{n})\n")
            out.write(f"infinite-horizon AECS uniqueness: {_yes(rep.aecs_unique_certified)} "
                      f"(rank {rep.rank_aecs}/{n})\n")
        else:
            out.write("infinite-horizon uniqueness: n/a (assumption 2 fails)\n")
        if T is not None:
            hit = rep.theta_prime_hit
            if hit is None:
                out.write(f"T={T:g}: not an exceptional horizon; finite-horizon scores are unique\n")
            else:
                out.write(f"T={T:g}: exceptional horizon (theta={hit.theta:g}, l={hit.ell}); "
                          "uniqueness not guaranteed\n")
            b = rep.baseline_scores
            out.write(f"baseline centralities at T={T:g}:\n")
            out.write("node            AC           VCE           ACE  rank\n")
            for i in range(b.ac.size):
                out.write(f"{i + 1:4d}  {b.ac[i]:12.5e}  {b.vce[i]:12.5e}  {b.ace[i]:12.5e}  {b.ranks[i]:4d}\n")
        if post is not None:
            if "error" in post:
                out.write(f"controllability rank at AECS optimum: unavailable ({post['error']})\n")
            else:
                out.write(f"controllability rank at AECS optimum (T={_horizon_key(cfg.horizon)}): "
                          f"{post['rank']}/{post['n']}"
                          f"{'' if post['rank'] == post['n'] else ' (uncontrollable)'}\n")
    return code


def cmd_fixture(args, out) -> int:
    spec = fixture_fig2()
    if args.format == "matrix":
        A = build_laplacian_dynamics(spec)
        text = "\n".join(" ".join(repr(float(v)) for v in row) for row in A) + "\n"
    else:
        text = format_edge_list(spec)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


COMMANDS = {"score": cmd_score, "sweep": cmd_sweep, "diagnose": cmd_diagnose}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if args.command == "fixture":
            return cmd_fixture(args, out)
        cfg = resolve_config(args)
        SolverOptions(cfg.eps, cfg.sigma, cfg.rho, cfg.alpha0, cfg.max_iter)
        return COMMANDS[args.command](cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NetworkSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"error: {exc.strerror or exc}{f': {name}' if name else ''}", file=sys.stderr)
        return EXIT_IO
    except AssumptionViolation as exc:
        print(f"error: assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (ControlScoreError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

if __name__ == "__main__":
    sys.exit(main())
