"""Command-line surface: geninv, analyze, battery and diag subcommands.

Matrices are read from CSV (one row per line, comma-separated, decimal
or scientific notation, no header, no empty lines); all reports are
emitted as "stabgi/1" JSON, to stdout or to ``--out``.

Exit codes: 0 success, 1 input or parse error, 2 violated precondition
(non-complementary subspaces, library shape mismatch), 3 verification
failure.  ``SPGI_SEED`` and ``SPGI_TOL`` override the seed and tolerance
defaults; explicit flags override the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys

import numpy as np

from . import diagonal, geninv, oracle, perturb, reports, subspaces
from .dense import rank_factorization
from .errors import (
    ComplementError,
    DimensionError,
    InputError,
    PreconditionError,
    SingularMatrixError,
    StabgiError,
)
from .geninv import ComplementChoice
from .subspaces import Subspace

DEFAULT_TOL = 1e-10
DEFAULT_SEED = 0


def read_matrix_csv(path: str) -> np.ndarray:
    """Parse the CSV matrix format with line/column diagnostics."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # single trailing newline is fine
    if not lines:
        raise InputError(f"{path}: empty file")
    rows: list[list[float]] = []
    ncols: int | None = None
    for i, line in enumerate(lines, start=1):
        if line.strip() == "":
            raise InputError(f"{path}: line {i}: empty line")
        values: list[float] = []
        for j, token in enumerate(line.split(","), start=1):
            token = token.strip()
            if token == "":
                raise InputError(f"{path}: line {i}, column {j}: empty entry")
            try:
                value = float(token)
            except ValueError as exc:
                raise InputError(
                    f"{path}: line {i}, column {j}: cannot parse {token!r}"
                ) from exc
            if not np.isfinite(value):
                raise InputError(
                    f"{path}: line {i}, column {j}: non-finite entry {token!r}"
                )
            values.append(value)
        if ncols is None:
            ncols = len(values)
        elif len(values) != ncols:
            raise InputError(
                f"{path}: line {i}: expected {ncols} entries, got {len(values)}"
            )
        rows.append(values)
    return np.asarray(rows, dtype=float)


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise InputError(f"environment variable {name}={raw!r} is not a number") from exc


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"environment variable {name}={raw!r} is not an integer") from exc


def _resolve_tol(args) -> float:
    tol = args.tol if args.tol is not None else _env_float("SPGI_TOL", DEFAULT_TOL)
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    return tol


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else _env_int("SPGI_SEED", DEFAULT_SEED)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _complement_choice(t: np.ndarray, m_path: str | None, w_path: str | None) -> ComplementChoice:
    """Complements from CSV bases (columns = vectors); orthogonal ones
    where a side is not supplied."""
    rf = rank_factorization(t)
    if m_path is not None:
        m_space = Subspace.span(read_matrix_csv(m_path))
        if m_space.ambient_dim != t.shape[1]:
            raise InputError(
                f"--m basis lives in dimension {m_space.ambient_dim}, "
                f"domain has dimension {t.shape[1]}"
            )
    else:
        m_space = subspaces.orthogonal_complement(Subspace(t.shape[1], rf.null_basis))
    if w_path is not None:
        w_space = Subspace.span(read_matrix_csv(w_path))
        if w_space.ambient_dim != t.shape[0]:
            raise InputError(
                f"--w basis lives in dimension {w_space.ambient_dim}, "
                f"codomain has dimension {t.shape[0]}"
            )
    else:
        w_space = subspaces.orthogonal_complement(Subspace(t.shape[0], rf.range_basis))
    return ComplementChoice(m_space, w_space)


def run_geninv(args) -> int:
    tol = _resolve_tol(args)
    t = read_matrix_csv(args.t)
    if args.moore_penrose or (args.m is None and args.w is None):
        bundle = geninv.moore_penrose(t)
    else:
        bundle = geninv.build_gi(t, _complement_choice(t, args.m, args.w))
    rank = rank_factorization(t).rank
    payload = reports.geninv_report(bundle, rank, geninv.range_projector_norm(bundle))
    _emit(payload, args.out)
    res = bundle.residuals
    passed = max(res.r1, res.r2, res.idem_p, res.idem_q) <= tol * res.scale
    return 0 if passed else 3


def run_analyze(args) -> int:
    tol = _resolve_tol(args)
    t = read_matrix_csv(args.t)
    dt = read_matrix_csv(args.dt)
    if dt.shape != t.shape:
        raise InputError(
            f"T and dT have different shapes: {t.shape} vs {dt.shape}"
        )
    if args.moore_penrose or (args.m is None and args.w is None):
        bundle = geninv.moore_penrose(t)
    else:
        bundle = geninv.build_gi(t, _complement_choice(t, args.m, args.w))
    system = perturb.PerturbedSystem.build(bundle, dt)
    report = perturb.analyze(system, verify_tol=tol)
    _emit(reports.analysis_report_to_json(report), args.out)
    return 0


def run_battery(args) -> int:
    seed = _resolve_seed(args)
    regimes = (args.regime,) if args.regime else None
    report = oracle.battery(args.instances, args.max_dim, seed, regimes=regimes)
    _emit(reports.battery_report_to_json(report), args.out)
    if report.failures:
        seeds = sorted({f.seed for f in report.failures})
        print(
            f"battery: {len(report.failures)} failed checks; seeds: {seeds}",
            file=_sys.stderr,
        )
        return 3
    return 0


_FORMULA_FAMILIES = ("linear", "power")


def _diag_side(obj: dict, truncation: int, label: str) -> diagonal.DiagonalOperator:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError(f"{label}: expected an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "explicit":
        values = obj.get("values")
        if not isinstance(values, list):
            raise InputError(f"{label}: explicit spec needs a 'values' list")
        if len(values) < truncation:
            raise InputError(
                f"{label}: {len(values)} values given, truncation is {truncation}"
            )
        return diagonal.DiagonalOperator(np.asarray(values[:truncation], dtype=float))
    if kind == "formula":
        expr = obj.get("expr")
        if expr not in _FORMULA_FAMILIES:
            raise InputError(
                f"{label}: unknown formula family {expr!r}; "
                f"known families: {', '.join(_FORMULA_FAMILIES)}"
            )
        k = np.arange(1, truncation + 1, dtype=float)
        alpha = float(obj.get("alpha", 1.0))
        if expr == "linear":
            beta = float(obj.get("beta", 0.0))
            return diagonal.DiagonalOperator(alpha * k + beta)
        p = float(obj.get("p", 1.0))
        return diagonal.DiagonalOperator(alpha * k**p)
    raise InputError(f"{label}: unknown kind {kind!r}")


def run_diag(args) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec_data = json.load(fh)
    except OSError as exc:
        raise InputError(f"{args.spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.spec}: invalid JSON: {exc}") from exc
    truncation = args.truncate
    if truncation is None:
        truncation = spec_data.get("truncation")
        if truncation is None:
            raise InputError("diagonal spec has no 'truncation' and no --truncate given")
    truncation = int(truncation)
    if truncation < 1:
        raise InputError(f"truncation must be positive, got {truncation}")
    t = _diag_side(spec_data.get("t"), truncation, "t")
    d = _diag_side(spec_data.get("d"), truncation, "d")
    analysis = diagonal.diag_analyze(t, d)

    # Cross-validate against the dense pipeline on the embedded matrices.
    bundle = geninv.moore_penrose(diagonal.embed(t))
    system = perturb.PerturbedSystem.build(bundle, diagonal.embed(d))
    cert = perturb.bijectivity_pair(system)
    stable_dec = perturb.stable_range_condition(system)
    mismatches: list[str] = []
    if analysis.bijective != cert.bij_Y:
        mismatches.append("bijective")
    if analysis.stable != stable_dec.value:
        mismatches.append("stable")
    if analysis.bijective and cert.bij_Y:
        g = perturb.perturbed_inverse(system)
        diag_g = np.diag(g)
        off = g - np.diag(diag_g)
        if np.max(np.abs(diag_g - analysis.G_entries) / (1.0 + np.abs(diag_g))) > 1e-12:
            mismatches.append("G_entries")
        if np.max(np.abs(off)) > 1e-12 * (1.0 + np.max(np.abs(diag_g))):
            mismatches.append("G_offdiagonal")

    payload = reports.diag_analysis_to_json(analysis, truncation)
    payload["cross_validation"] = {
        "agrees": not mismatches,
        "mismatches": mismatches,
        "matrix_bijective": cert.bij_Y,
        "matrix_stable": stable_dec.value,
    }
    _emit(payload, args.out)
    return 0 if not mismatches else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stabgi",
        description=(
            "Generalized inverses with prescribed complements and "
            "perturbation analysis of rank-deficient linear maps."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gi = sub.add_parser("geninv", help="construct and verify a generalized inverse")
    p_gi.add_argument("--t", required=True, help="CSV file with the matrix T")
    p_gi.add_argument("--m", help="CSV basis (columns) of a complement of N(T)")
    p_gi.add_argument("--w", help="CSV basis (columns) of a complement of R(T)")
    p_gi.add_argument(
        "--moore-penrose",
        action="store_true",
        help="use orthogonal complements (default when --m/--w are absent)",
    )
    p_gi.add_argument("--tol", type=float, default=None, help="residual pass tolerance")
    p_gi.add_argument("--out", default=None, help="write the JSON report here")
    p_gi.set_defaults(func=run_geninv)

    p_an = sub.add_parser("analyze", help="analyze a perturbation T + dT")
    p_an.add_argument("--t", required=True, help="CSV file with the matrix T")
    p_an.add_argument("--dt", required=True, help="CSV file with the perturbation dT")
    p_an.add_argument("--m", help="CSV basis (columns) of a complement of N(T)")
    p_an.add_argument("--w", help="CSV basis (columns) of a complement of R(T)")
    p_an.add_argument(
        "--moore-penrose",
        action="store_true",
        help="use orthogonal complements (default when --m/--w are absent)",
    )
    p_an.add_argument("--tol", type=float, default=None, help="residual pass tolerance")
    p_an.add_argument("--out", default=None, help="write the JSON report here")
    p_an.set_defaults(func=run_analyze)

    p_bat = sub.add_parser("battery", help="run the randomized equivalence battery")
    p_bat.add_argument("--instances", type=int, required=True, help="instance count")
    p_bat.add_argument("--max-dim", type=int, default=8, help="largest dimension drawn")
    p_bat.add_argument("--seed", type=int, default=None, help="master seed")
    p_bat.add_argument(
        "--regime",
        choices=oracle.REGIMES,
        default=None,
        help="restrict the battery to a single regime",
    )
    p_bat.add_argument("--out", default=None, help="write the JSON report here")
    p_bat.set_defaults(func=run_battery)

    p_diag = sub.add_parser("diag", help="analyze a truncated diagonal operator pair")
    p_diag.add_argument("--spec", required=True, help="diagonal spec JSON file")
    p_diag.add_argument(
        "--truncate", type=int, default=None, help="override the spec's truncation"
    )
    p_diag.add_argument("--out", default=None, help="write the JSON report here")
    p_diag.set_defaults(func=run_diag)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"stabgi: input error: {exc}", file=_sys.stderr)
        return 1
    except ComplementError as exc:
        print(f"stabgi: complement error: {exc}", file=_sys.stderr)
        if exc.witness is not None:
            print(
                f"stabgi: intersection witness: {[float(x) for x in exc.witness]}",
                file=_sys.stderr,
            )
        return 2
    except (PreconditionError, DimensionError, SingularMatrixError) as exc:
        print(f"stabgi: precondition error: {exc}", file=_sys.stderr)
        return 2
    except StabgiError as exc:
        print(f"stabgi: error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
