"""Command-line front end.

Every subcommand accepts ``--out DIR``. When given, results are written as
files in that directory together with a ``manifest.json`` describing the run;
``shared-purity replay DIR/manifest.json`` re-executes it and compares the
output digests.

Exit codes: 0 on success, 1 on invalid input, 2 when an optimizer run did
not converge or an oracle gap exceeded tolerance.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import itertools
import json
import math
import os
import re
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import families, monogamy, xy
from .fidelity import OptimizerConfig, shared_purity
from .states import StateError, load_state

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2

GAP_TOL = 1e-6
SEED_ENV = "SHARED_PURITY_SEED"
MANIFEST_NAME = "manifest.json"


class CLIError(Exception):
    """Invalid command-line input; ``invariant`` names what was violated."""

    def __init__(self, invariant: str, detail: str):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}")


# --- manifest ---------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Record of one CLI run, written next to its outputs."""

    argv: list
    command: str
    config: dict
    seed: int
    version: str = __version__
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    duration_s: float = 0.0

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CLIError("manifest", f"cannot read {path}: {exc}") from exc
        return cls(**obj)


class _Run:
    """Collects the outputs of one command and writes them at the end."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = [a for a in argv]
        self.out = Path(args.out) if getattr(args, "out", None) else None
        self.files: dict[str, str] = {}
        self.inputs: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def add_input(self, path):
        self.inputs[str(path)] = sha256_file(path)

    def emit(self, name: str, text: str, show: bool = False):
        """Queue an output file; with no ``--out`` it goes to stdout instead."""
        self.files[name] = text
        if self.out is None or show:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")

    def finish(self, config: dict, seed: int):
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        digests = {}
        for name, text in self.files.items():
            path = self.out / name
            path.write_text(text)
            digests[name] = sha256_file(path)
        argv = _strip_out(self.argv)
        if not any(a == "--seed" or a.startswith("--seed=") for a in argv):
            argv += ["--seed", str(seed)]
        RunManifest(
            argv=argv,
            command=self.args.command,
            config=config,
            seed=seed,
            inputs=self.inputs,
            outputs=digests,
            duration_s=round(time.perf_counter() - self.t0, 6),
        ).write(self.out)


def _strip_out(argv):
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return out


# --- argument helpers -------------------------------------------------------

def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CLIError("seed", f"{SEED_ENV}={raw!r} is not an integer") from None


def _config(args) -> OptimizerConfig:
    if args.starts < 0:
        raise CLIError("starts", "--starts must be >= 0")
    if not args.tol > 0:
        raise CLIError("tol", "--tol must be positive")
    return OptimizerConfig(n_starts=args.starts, max_sweeps=args.max_sweeps,
                           tol=args.tol, seed=args.seed)


def _parse_assignment(text: str):
    if "=" not in text:
        raise CLIError("parameters", f"expected KEY=VALUE, got {text!r}")
    key, val = text.split("=", 1)
    return key.strip(), val.strip()


_PI_FORM = re.compile(r"^\s*([-+]?[0-9.eE+-]*?)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def _parse_float(text: str, what: str) -> float:
    """A plain number, or a multiple of pi such as ``pi/4`` or ``1.5*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_FORM.match(text)
    try:
        if m is None:
            raise ValueError
        coef = m.group(1)
        coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        return coef * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    except ValueError:
        raise CLIError("parameters", f"cannot parse {what} value {text!r}") from None


def _parse_range(text: str):
    key, val = _parse_assignment(text)
    parts = val.split(":")
    if len(parts) != 2:
        raise CLIError("parameters", f"range must look like KEY=LO:HI, got {text!r}")
    return key, _parse_float(parts[0], key), _parse_float(parts[1], key)


def _parse_window(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise CLIError("window", f"expected LO:HI, got {text!r}")
    lo, hi = (_parse_float(p, "window") for p in parts)
    if not lo < hi:
        raise CLIError("window", "LO must be below HI")
    return lo, hi


def _parse_int_list(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CLIError("n-list", f"expected comma-separated integers, got {text!r}") from None


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --- commands ---------------------------------------------------------------

def cmd_state(args, run: _Run) -> int:
    state = load_state(args.input)
    run.add_input(args.input)
    config = _config(args)
    res = shared_purity(state, args.variant, config)
    out = res.to_dict()
    if res.ansatz is not None and res.ansatz.bipartition is not None:
        out["bipartition"] = [list(b) for b in res.ansatz.bipartition]
    run.emit("result.json", _json(out), show=True)
    run.finish(asdict(config), args.seed)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_family_sweep(args, run: _Run) -> int:
    config = _config(args)
    fixed = {}
    for item in args.set or []:
        k, v = _parse_assignment(item)
        fixed[k] = _parse_float(v, k)
    ranges = [_parse_range(r) for r in args.range or []]
    if args.points < 1:
        raise CLIError("points", "--points must be >= 1")
    axes = {k: (np.linspace(lo, hi, args.points) if args.points > 1 else np.array([lo]))
            for k, lo, hi in ranges}
    keys = list(axes)
    specs = []
    for combo in itertools.product(*(axes[k] for k in keys)):
        params = dict(fixed)
        params.update({k: float(v) for k, v in zip(keys, combo)})
        specs.append(families.FamilySpec(args.family, params))
    if not specs:
        raise CLIError("parameters", "nothing to evaluate")

    param_keys = list(specs[0].params)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(param_keys + ["oracle_s_p", "s_p", "gap", "converged"])
    max_gap, all_conv = 0.0, True
    for spec in specs:
        res = shared_purity(families.build(spec), args.variant, config)
        oracle = families.oracle_shared_purity(spec) if args.variant in ("full", "full-product") \
            else None
        gap = None if oracle is None else abs(res.s_p - oracle)
        if gap is not None:
            max_gap = max(max_gap, gap)
        all_conv &= res.converged
        w.writerow([repr(spec.params[k]) for k in param_keys]
                   + ["" if oracle is None else repr(oracle), repr(res.s_p),
                      "" if gap is None else repr(gap), int(res.converged)])
    run.emit("family_sweep.csv", buf.getvalue())
    summary = f"max |gap| = {max_gap:.3e} over {len(specs)} points"
    print(summary, file=sys.stdout if run.out is not None else sys.stderr)
    run.finish(asdict(config), args.seed)
    return EXIT_OK if (all_conv and max_gap <= GAP_TOL) else EXIT_NOT_CONVERGED


def cmd_monogamy(args, run: _Run) -> int:
    config = _config(args)
    if args.n < 100:
        raise CLIError("n", "need at least 100 samples")
    records = monogamy.score_samples(args.family, args.n, args.seed, config, args.jobs)
    est = monogamy.estimate_fraction(records, args.squared, args.family, args.seed)
    run.emit("summary.json", _json(est.to_dict()), show=True)
    if run.out is not None:
        buf = io.StringIO()
        monogamy.write_records_csv(records, buf)
        run.emit("records.csv", buf.getvalue())
    run.finish(asdict(config), args.seed)
    return EXIT_NOT_CONVERGED if est.flagged else EXIT_OK


def cmd_xy_sweep(args, run: _Run) -> int:
    config = _config(args)
    n_sites = xy.THERMODYNAMIC if args.thermodynamic else args.n_sites
    if n_sites is None:
        raise CLIError("n-sites", "give --n-sites N or --thermodynamic")
    step = args.step or (1e-3 if args.thermodynamic else 2e-3)
    lo, hi = _parse_window(args.window)
    grid = xy.lambda_grid(lo, hi, step)
    if grid.size < 2:
        raise CLIError("window", "window holds fewer than two grid points")
    pts = xy.sweep(args.gamma, grid, n_sites, config, args.jobs)
    buf = io.StringIO()
    xy.write_sweep_csv(pts, buf)
    run.emit("xy_sweep.csv", buf.getvalue())
    run.finish(asdict(config), args.seed)
    return EXIT_OK if all(p.converged for p in pts) else EXIT_NOT_CONVERGED


def cmd_xy_scaling(args, run: _Run) -> int:
    config = _config(args)
    n_list = _parse_int_list(args.n_list)
    window = _parse_window(args.window)
    fit, sweeps = xy.scaling_fit(args.gamma, n_list, window, args.step, config, args.jobs,
                                 return_sweeps=True)
    run.emit("scaling.json", fit.to_json() + "\n", show=True)
    conv = all(p.converged for pts in sweeps.values() for p in pts)
    run.finish(asdict(config), args.seed)
    return EXIT_NOT_CONVERGED if (fit.flagged or not conv) else EXIT_OK


def cmd_replay(args, run: _Run) -> int:
    manifest = RunManifest.read(args.manifest)
    for path, digest in manifest.inputs.items():
        if not Path(path).exists() or sha256_file(path) != digest:
            raise CLIError("manifest", f"input {path} is missing or changed")
    out_dir = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="replay-"))
    argv = list(manifest.argv) + ["--out", str(out_dir)]
    with contextlib.redirect_stdout(io.StringIO()):
        code = main(argv)
    fresh = RunManifest.read(out_dir / MANIFEST_NAME)
    report = {
        "manifest": str(args.manifest),
        "replay_dir": str(out_dir),
        "exit_code": code,
        "outputs_match": fresh.outputs == manifest.outputs,
        "mismatched": sorted(k for k in set(manifest.outputs) | set(fresh.outputs)
                             if manifest.outputs.get(k) != fresh.outputs.get(k)),
    }
    print(_json(report), end="")
    return EXIT_OK if report["outputs_match"] else EXIT_NOT_CONVERGED


# --- parser -----------------------------------------------------------------

def _add_optimizer_flags(p, seed_default):
    p.add_argument("--variant", choices=["full", "ngen"], default="full",
                   help="product-state set for the local fidelity")
    p.add_argument("--starts", type=int, default=64, help="random multistarts")
    p.add_argument("--max-sweeps", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-12, help="per-sweep convergence gain")
    p.add_argument("--seed", type=int, default=seed_default,
                   help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", help="directory for output files and manifest")


def build_parser(seed_default: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shared-purity",
                                     description="Shared purity of multipartite quantum states.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="evaluate one state from a JSON file")
    p.add_argument("input")
    _add_optimizer_flags(p, seed_default)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("family-sweep", help="compare numerics with the closed forms of a family")
    p.add_argument("family", choices=families.FAMILIES)
    p.add_argument("--range", action="append", metavar="KEY=LO:HI")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--points", type=int, default=101)
    _add_optimizer_flags(p, seed_default)
    p.set_defaults(func=cmd_family_sweep)

    p = sub.add_parser("monogamy", help="fraction of non-monogamous sampled states")
    p.add_argument("family", choices=families.SAMPLED_FAMILIES)
    p.add_argument("n", type=int)
    p.add_argument("--squared", action="store_true", help="use the squared score")
    _add_optimizer_flags(p, seed_default)
    p.set_defaults(func=cmd_monogamy)

    p = sub.add_parser("xy-sweep", help="shared purity along the XY-chain field axis")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--window", default="0.5:1.5", metavar="LO:HI")
    p.add_argument("--step", type=float, default=None)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--n-sites", type=int)
    g.add_argument("--thermodynamic", action="store_true")
    _add_optimizer_flags(p, seed_default)
    p.set_defaults(func=cmd_xy_sweep)

    p = sub.add_parser("xy-scaling", help="finite-size scaling of the derivative minimum")
    p.add_argument("--gamma", type=float, default=0.8)
    p.add_argument("--n-list", default=",".join(str(n) for n in xy.DEFAULT_N_LIST))
    p.add_argument("--window", default="0.9:1.05", metavar="LO:HI")
    p.add_argument("--step", type=float, default=2e-3)
    _add_optimizer_flags(p, seed_default)
    p.set_defaults(func=cmd_xy_scaling)

    p = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    p.add_argument("manifest")
    p.add_argument("--out", help="directory for the replayed outputs (default: temporary)")
    p.set_defaults(func=cmd_replay, seed=None, starts=None)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser(_default_seed()).parse_args(argv)
        return args.func(args, _Run(args, argv))
    except (CLIError, StateError, xy.XYError) as exc:
        inv = getattr(exc, "invariant", "input")
        print(f"error: invalid input [{inv}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: invalid input [file]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: invalid input [value]: {exc}", file=sys.stderr)
        return EXIT_INVALID


def console_main():  # pragma: no cover - thin wrapper for the entry point
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    console_main()
