"""Batch command line.

Parses a JSON problem specification, builds and validates the generator
and weighted space, dispatches one of the subcommands

    validate | gap | constants | decay | expand | kt | search

and prints a deterministic JSON report to stdout (CSV trajectories go to
--csv).  Diagnostics, including wall time, go to stderr so that reports
stay byte-identical for a fixed (spec, seed, budget).  Exit codes: 0 on
success, 1 on spec/validation input failures, 2 on numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .decay import SearchConfig, search_counterexample, verify_decay_equivalence
from .errors import InputError, NumericalError
from .hermitian import as_hermitian, random_hermitian
from .inequalities import (
    DEFAULT_Q_GRID,
    OptimizerConfig,
    expand_h,
    hierarchy_report,
    kt_bridge,
    spectral_gap,
)
from .report_io import dumps, matrix_to_json, write_csv
from .semigroup import (
    Generator,
    Provenance,
    build_lindblad,
    embed_classical,
    find_invariant_state,
    validate,
)
from .space import WeightedSpace, centered

SUBCOMMANDS = ("validate", "gap", "constants", "decay", "expand", "kt", "search")
# seed/budget/tol/q_grid in the spec are defaults; the CLI flags override them
ALLOWED_OPTIONS = {
    "observable",
    "time",
    "times",
    "family",
    "scale",
    "seed",
    "budget",
    "tol",
    "q_grid",
}


# ---------------------------------------------------------------------------
# Problem specification
# ---------------------------------------------------------------------------


@dataclass
class ProblemSpec:
    dim: int
    rho_kind: str  # "trace" | "law" | "dense" | "solve"
    rho_law: np.ndarray | None = None
    rho_dense: np.ndarray | None = None
    gen_kind: str = ""  # "lindblad" | "classical" | "superoperator"
    hamiltonian: np.ndarray | None = None
    jumps: list = field(default_factory=list)
    rates: np.ndarray | None = None
    chain_law: np.ndarray | None = None
    superop: np.ndarray | None = None
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {"dim": self.dim}
        if self.rho_kind == "trace":
            out["rho"] = "trace"
        elif self.rho_kind == "law":
            out["rho"] = [float(v) for v in self.rho_law]
        elif self.rho_kind == "dense":
            out["rho"] = matrix_to_json(self.rho_dense)
        if self.gen_kind == "lindblad":
            gen = {}
            if self.hamiltonian is not None:
                gen["hamiltonian"] = matrix_to_json(self.hamiltonian)
            gen["jumps"] = [matrix_to_json(j) for j in self.jumps]
            out["generator"] = {"lindblad": gen}
        elif self.gen_kind == "classical":
            out["generator"] = {
                "classical": {
                    "rates": [[float(v) for v in row] for row in self.rates],
                    "pi": [float(v) for v in self.chain_law],
                }
            }
        else:
            out["generator"] = {"superoperator": matrix_to_json(self.superop)}
        options = {}
        for key in sorted(self.options):
            value = self.options[key]
            options[key] = (
                matrix_to_json(value) if isinstance(value, np.ndarray) else value
            )
        out["options"] = options
        return out


def _parse_matrix(node, dim: int, path: str) -> np.ndarray:
    if node == 0 or node == 0.0:
        return np.zeros((dim, dim), dtype=complex)
    if isinstance(node, list):
        arr = np.asarray(node, dtype=float)
        if arr.shape != (dim, dim):
            raise InputError(f"field '{path}': expected a {dim}x{dim} matrix, got {arr.shape}")
        return arr.astype(complex)
    if isinstance(node, dict):
        unknown = set(node) - {"re", "im"}
        if unknown:
            raise InputError(f"field '{path}': unknown keys {sorted(unknown)}")
        re = np.asarray(node.get("re", 0.0), dtype=float)
        im = np.asarray(node.get("im", 0.0), dtype=float)
        if re.shape != (dim, dim):
            raise InputError(f"field '{path}.re': expected {dim}x{dim}, got {re.shape}")
        if im.shape not in ((dim, dim), ()):
            raise InputError(f"field '{path}.im': expected {dim}x{dim}, got {im.shape}")
        return re + 1j * (im if im.shape else np.zeros((dim, dim)))
    raise InputError(f"field '{path}': expected a matrix, 0, or {{re, im}} arrays")


def parse_spec(text) -> ProblemSpec:
    """Parse and validate a JSON problem specification; error messages name
    the offending field."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError("spec must be a JSON object")
    unknown = set(raw) - {"dim", "rho", "generator", "options"}
    if unknown:
        raise InputError(f"unknown top-level fields {sorted(unknown)}")

    dim = raw.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise InputError("field 'dim': expected a positive integer")

    gen_node = raw.get("generator")
    if not isinstance(gen_node, dict) or len(gen_node) != 1:
        raise InputError(
            "field 'generator': expected exactly one of "
            "{lindblad, classical, superoperator}"
        )
    (gen_kind, payload), = gen_node.items()
    spec = ProblemSpec(dim=dim, rho_kind="solve", gen_kind=gen_kind)

    if gen_kind == "lindblad":
        if not isinstance(payload, dict):
            raise InputError("field 'generator.lindblad': expected an object")
        unknown = set(payload) - {"hamiltonian", "jumps"}
        if unknown:
            raise InputError(f"field 'generator.lindblad': unknown keys {sorted(unknown)}")
        if "hamiltonian" in payload:
            spec.hamiltonian = _parse_matrix(
                payload["hamiltonian"], dim, "generator.lindblad.hamiltonian"
            )
        jumps = payload.get("jumps", [])
        if not isinstance(jumps, list):
            raise InputError("field 'generator.lindblad.jumps': expected a list")
        spec.jumps = [
            _parse_matrix(j, dim, f"generator.lindblad.jumps[{k}]")
            for k, j in enumerate(jumps)
        ]
        if spec.hamiltonian is None and not spec.jumps:
            raise InputError("field 'generator.lindblad': needs a hamiltonian or jumps")
    elif gen_kind == "classical":
        if not isinstance(payload, dict) or set(payload) != {"rates", "pi"}:
            raise InputError("field 'generator.classical': expected {rates, pi}")
        rates = np.asarray(payload["rates"], dtype=float)
        if rates.shape != (dim, dim):
            raise InputError(
                f"field 'generator.classical.rates': expected {dim}x{dim}, got {rates.shape}"
            )
        pi = np.asarray(payload["pi"], dtype=float)
        if pi.shape != (dim,):
            raise InputError(
                f"field 'generator.classical.pi': expected length {dim}, got {pi.shape}"
            )
        spec.rates = rates
        spec.chain_law = pi
    elif gen_kind == "superoperator":
        spec.superop = _parse_matrix(payload, dim * dim, "generator.superoperator")
    else:
        raise InputError(f"field 'generator': unknown kind {gen_kind!r}")

    rho_node = raw.get("rho")
    if rho_node is None:
        spec.rho_kind = "solve"
    elif rho_node == "trace":
        spec.rho_kind = "trace"
    elif isinstance(rho_node, list):
        law = np.asarray(rho_node, dtype=float)
        if law.shape != (dim,):
            raise InputError(f"field 'rho': expected length {dim}, got {law.shape}")
        if np.min(law) <= 0:
            raise InputError("field 'rho': law must be entrywise positive")
        total = float(law.sum())
        if abs(total - 1.0) > 1e-9:
            raise InputError(f"field 'rho': law sums to {total!r}, expected 1")
        spec.rho_kind = "law"
        spec.rho_law = law / total
    elif isinstance(rho_node, dict):
        spec.rho_kind = "dense"
        spec.rho_dense = _parse_matrix(rho_node, dim, "rho")
    else:
        raise InputError("field 'rho': expected 'trace', a law vector or {re, im}")
    if gen_kind == "classical" and spec.rho_kind != "solve":
        raise InputError(
            "field 'rho': remove it for classical generators, 'pi' defines the state"
        )

    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise InputError("field 'options': expected an object")
    unknown = set(options) - ALLOWED_OPTIONS
    if unknown:
        raise InputError(f"field 'options': unknown keys {sorted(unknown)}")
    parsed_options = dict(options)
    if "observable" in options:
        parsed_options["observable"] = _parse_matrix(
            options["observable"], dim, "options.observable"
        )
    if "times" in options:
        times = np.asarray(options["times"], dtype=float)
        if times.ndim != 1:
            raise InputError("field 'options.times': expected a vector")
        parsed_options["times"] = [float(t) for t in times]
    for key in ("time", "scale", "tol"):
        if key in options and not isinstance(options[key], (int, float)):
            raise InputError(f"field 'options.{key}': expected a number")
    if "family" in options and not isinstance(options["family"], str):
        raise InputError("field 'options.family': expected a string")
    for key in ("seed", "budget"):
        value = options.get(key)
        if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
            raise InputError(f"field 'options.{key}': expected an integer")
    if "q_grid" in options:
        grid = options["q_grid"]
        if not isinstance(grid, list) or not grid or any(
            not isinstance(v, (int, float)) or v <= 1.0 for v in grid
        ):
            raise InputError("field 'options.q_grid': expected a list of numbers > 1")
        parsed_options["q_grid"] = [float(v) for v in grid]
    spec.options = parsed_options
    return spec


def build_problem(spec: ProblemSpec) -> tuple[Generator, WeightedSpace]:
    """Instantiate the generator and the weighted space from a parsed spec."""
    if spec.gen_kind == "classical":
        try:
            return embed_classical(spec.rates, spec.chain_law)
        except InputError as exc:
            raise InputError(f"field 'generator.classical': {exc}") from exc
    if spec.gen_kind == "lindblad":
        gen = build_lindblad(spec.hamiltonian, spec.jumps)
    else:
        gen = Generator(spec.superop, Provenance(kind="raw"))
    if gen.dim != spec.dim:
        raise InputError(f"generator dimension {gen.dim} does not match dim {spec.dim}")
    if spec.rho_kind == "trace":
        space = WeightedSpace.trace_state(spec.dim)
    elif spec.rho_kind == "law":
        space = WeightedSpace.from_law(spec.rho_law)
    elif spec.rho_kind == "dense":
        try:
            space = WeightedSpace(spec.rho_dense)
        except InputError as exc:
            raise InputError(f"field 'rho': {exc}") from exc
    else:
        space = find_invariant_state(gen)
    return gen, space


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _tolerances(tol: float | None) -> dict:
    out = {
        "hermitian_rtol": 1e-12,
        "cluster_rtol": 1e-10,
        "positivity_floor": 1e-12,
        "identity_tol": 1e-10,
        "invariance_tol": 1e-10,
        "kms_tol": 1e-9,
        "positivity_probe_tol": 1e-9,
        "near_identity_tol": 1e-6,
        "form_floor": 1e-12,
    }
    if tol is not None:
        for key in ("identity_tol", "invariance_tol", "kms_tol", "positivity_probe_tol"):
            out[key] = tol
    return out


def _default_positive(spec: ProblemSpec, gen: Generator, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 101])
    scale = float(spec.options.get("scale", 1.0))
    if gen.is_classical:
        return np.diag(np.exp(scale * rng.standard_normal(gen.dim))).astype(complex)
    h = random_hermitian(gen.dim, rng, scale)
    w, v = np.linalg.eigh(h)
    f = (v * np.exp(w)) @ v.conj().T
    return 0.5 * (f + f.conj().T)


def _observable(spec: ProblemSpec, gen: Generator, seed: int, positive: bool) -> np.ndarray:
    if "observable" in spec.options:
        return as_hermitian(spec.options["observable"])
    if positive:
        return _default_positive(spec, gen, seed)
    rng = np.random.default_rng([seed, 103])
    if gen.is_classical:
        return np.diag(rng.standard_normal(gen.dim)).astype(complex)
    return random_hermitian(gen.dim, rng)


def _run_gap(spec, gen, space) -> dict:
    return {"gap": spectral_gap(space, gen)}


def _run_constants(spec, gen, space, seed, budget, q_grid) -> dict:
    config = OptimizerConfig(
        starts=budget if budget is not None else 32,
        seed=seed,
        scale=float(spec.options.get("scale", 1.0)),
        q_grid=q_grid if q_grid is not None else DEFAULT_Q_GRID,
    )
    return {"inequality": hierarchy_report(space, gen, config).to_dict()}


def _run_decay(spec, gen, space, seed, csv_path) -> dict:
    f = _observable(spec, gen, seed, positive=True)
    times = spec.options.get("times")
    times = np.asarray(times, dtype=float) if times is not None else None
    verdict, traj = verify_decay_equivalence(space, gen, f, times)
    if csv_path:
        write_csv(
            csv_path,
            ["t", "entropy", "variance", "analytic_rate", "l1_norm"],
            zip(traj.times, traj.entropy, traj.variance, traj.analytic_rate, traj.l1_norm),
        )
    return {
        "decay": {
            "verdict": verdict.to_dict(),
            "entropy_initial": float(traj.entropy[0]),
            "entropy_final": float(traj.entropy[-1]),
            "l1_drift": float(np.max(np.abs(traj.l1_norm - traj.l1_norm[0]))),
            "t_final": float(traj.times[-1]),
        }
    }


def _run_expand(spec, gen, space, seed) -> dict:
    f = centered(space, _observable(spec, gen, seed, positive=False))
    result = expand_h(space, f)
    return {"expansion": result.to_dict()}


def _run_kt(spec, gen, space, seed) -> dict:
    f = _observable(spec, gen, seed, positive=False)
    t = float(spec.options.get("time", 1.0))
    bridge = kt_bridge(gen, f, t)
    return {
        "bridge": {
            "t": bridge.t,
            "index_map": [int(i) for i in bridge.index_map],
            "matrix": [[float(v) for v in row] for row in bridge.matrix],
            "residuals": bridge.residuals(),
        }
    }


def _run_search(spec, seed, budget) -> dict:
    config = SearchConfig(
        seed=seed,
        dim=spec.dim if spec else 3,
        family=str(spec.options.get("family", "mixed")) if spec else "mixed",
        budget=budget if budget is not None else 10,
    )
    return {"search": search_counterexample(config).to_dict()}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argument problems are input problems: exit 1
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmslab", description=__doc__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--spec", help="path to the JSON problem specification")
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="master seed; overrides options.seed (default 0)",
    )
    parser.add_argument(
        "--budget",
        type=int,
        default=None,
        help="optimizer starts (constants) or sample count (search); "
        "overrides options.budget",
    )
    parser.add_argument("--csv", help="write the decay trajectory to this CSV path")
    parser.add_argument(
        "--q-grid",
        type=lambda s: tuple(float(x) for x in s.split(",")),
        default=None,
        help="comma-separated q grid for the regularity verdicts; "
        "overrides options.q_grid",
    )
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="value for every validation pass threshold; overrides options.tol",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        spec = None
        if args.spec is not None:
            try:
                with open(args.spec, "rb") as fh:
                    text = fh.read()
            except OSError as exc:
                raise InputError(f"cannot read spec file: {exc}") from exc
            spec = parse_spec(text)
        elif args.subcommand != "search":
            raise InputError(f"subcommand '{args.subcommand}' needs --spec PATH")
        options = spec.options if spec is not None else {}
        seed = args.seed if args.seed is not None else int(options.get("seed", 0))
        budget = args.budget if args.budget is not None else options.get("budget")
        tol = args.tol if args.tol is not None else options.get("tol")
        tol = float(tol) if tol is not None else None
        q_grid = args.q_grid
        if q_grid is None and "q_grid" in options:
            q_grid = tuple(options["q_grid"])

        report = {
            "tool": {"name": "qmslab", "version": __version__},
            "subcommand": args.subcommand,
            "seed": seed,
            "budget": budget,
            "tolerances": _tolerances(tol),
            "spec": spec.to_dict() if spec is not None else None,
        }
        if spec is None:
            report.update(_run_search(spec, seed, budget))
        else:
            gen, space = build_problem(spec)
            positivity_notes = {
                "lindblad": "completely positive by construction (GKLS form)",
                "classical": "stochastic semigroup on the diagonal subalgebra",
                "raw": "positivity probed on samples only, not certified",
            }
            report["generator"] = {
                "provenance": gen.provenance.kind,
                "detail": gen.provenance.detail,
                "positivity": positivity_notes[gen.provenance.kind],
            }
            record = validate(gen, space, seed=seed, tolerance=tol)
            report["validation"] = record.to_dict()
            if args.subcommand == "validate":
                pass
            elif args.subcommand == "gap":
                report.update(_run_gap(spec, gen, space))
            elif args.subcommand == "constants":
                report.update(_run_constants(spec, gen, space, seed, budget, q_grid))
            elif args.subcommand == "decay":
                report.update(_run_decay(spec, gen, space, seed, args.csv))
            elif args.subcommand == "expand":
                report.update(_run_expand(spec, gen, space, seed))
            elif args.subcommand == "kt":
                report.update(_run_kt(spec, gen, space, seed))
            else:
                report.update(_run_search(spec, seed, budget))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(dumps(report) + "\n")
    print(f"wall time: {time.perf_counter() - started:.3f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
