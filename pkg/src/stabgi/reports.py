"""JSON report schema ("stabgi/1") shared by the CLI commands.

Matrices serialize as {"rows": m, "cols": n, "data": [...row-major...]};
floats go through Python's shortest-repr encoding, so every emitted
matrix re-parses to the bit-identical value.  Non-finite margins (an
infinite margin marks a vacuously decisive condition) serialize as
null.
"""

from __future__ import annotations

import math

import numpy as np

from .diagonal import DiagAnalysis
from .errors import InputError
from .geninv import GiBundle, GiResiduals
from .oracle import BatteryReport
from .perturb import AnalysisReport, Decision

SCHEMA = "stabgi/1"


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=float)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [float(x) for x in m.reshape(-1)],
    }


def matrix_from_json(d: dict) -> np.ndarray:
    try:
        rows, cols, data = int(d["rows"]), int(d["cols"]), d["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise InputError(
            f"matrix object inconsistent: rows={rows}, cols={cols}, "
            f"len(data)={len(data)}"
        )
    return np.asarray(data, dtype=float).reshape(rows, cols)


def _num(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def residuals_to_json(r: GiResiduals) -> dict:
    return {
        "r1": r.r1,
        "r2": r.r2,
        "idem_P": r.idem_p,
        "idem_Q": r.idem_q,
        "scale": r.scale,
        "tol": r.tol,
        "passed": r.passed,
    }


def decision_to_json(d: Decision) -> dict:
    out = {"value": d.value, "margin": _num(d.margin), "threshold": _num(d.threshold)}
    if d.witness is not None:
        out["witness"] = [float(x) for x in d.witness]
    return out


def geninv_report(bundle: GiBundle, rank: int, c: float) -> dict:
    return {
        "schema": SCHEMA,
        "command": "geninv",
        "S": matrix_to_json(bundle.S),
        "P": matrix_to_json(bundle.P),
        "Q": matrix_to_json(bundle.Q),
        "residuals": residuals_to_json(bundle.residuals),
        "rank": int(rank),
        "c": float(c),
    }


def analysis_report_to_json(report: AnalysisReport) -> dict:
    cert = report.certificate
    return {
        "schema": SCHEMA,
        "command": "analyze",
        "stable": report.stable,
        "bijective": {
            "carrier_Y": cert.bij_Y,
            "carrier_X": cert.bij_X,
            "sigma_min_Y": _num(cert.sigma_min_Y),
            "sigma_min_X": _num(cert.sigma_min_X),
            "threshold_Y": _num(cert.threshold_Y),
            "threshold_X": _num(cert.threshold_X),
            "inverse_identity_residual": _num(cert.inverse_identity_residual),
        },
        "bijectivity_conditions": {
            k: decision_to_json(v) for k, v in report.conditions3.items()
        },
        "stability_conditions": (
            {k: decision_to_json(v) for k, v in report.conditions5.items()}
            if report.conditions5 is not None
            else None
        ),
        "decomposition": {
            "four_conditions": {
                k: decision_to_json(v)
                for k, v in report.decomposition.four_conditions.items()
            },
            "decomposition_domain": report.decomposition.decomposition_domain,
            "decomposition_codomain": report.decomposition.decomposition_codomain,
            "implication_1_ok": report.decomposition.implication_1_ok,
            "implication_2_ok": report.decomposition.implication_2_ok,
        },
        "G": matrix_to_json(report.G) if report.G is not None else None,
        "G_certified": (
            report.gi_residuals.passed if report.gi_residuals is not None else None
        ),
        "G_residuals": (
            residuals_to_json(report.gi_residuals)
            if report.gi_residuals is not None
            else None
        ),
        "Pbar": matrix_to_json(report.Pbar) if report.Pbar is not None else None,
        "Qbar": matrix_to_json(report.Qbar) if report.Qbar is not None else None,
        "c": float(report.c),
        "norm_pinv": float(report.norm_pinv),
        "margins": {k: _num(v) for k, v in report.margins.items()},
    }


def battery_report_to_json(report: BatteryReport) -> dict:
    return {
        "schema": SCHEMA,
        "command": "battery",
        "instances_run": report.instances_run,
        "instances_excluded": report.instances_excluded,
        "instances_kept": report.instances_kept,
        "threeway_agreement_count": report.threeway_agreement_count,
        "fiveway_applicable": report.fiveway_applicable,
        "fiveway_agreement_count": report.fiveway_agreement_count,
        "stable_count": report.stable_count,
        "gi_residual_max": _num(report.gi_residual_max),
        "subspace_distance_max": _num(report.subspace_distance_max),
        "min_c_nonzero": _num(report.min_c_nonzero),
        "failures": [
            {
                "seed": f.seed,
                "condition": f.condition,
                "margins": {k: _num(v) for k, v in f.margins.items()},
            }
            for f in report.failures
        ],
    }


def diag_analysis_to_json(analysis: DiagAnalysis, truncation: int) -> dict:
    return {
        "schema": SCHEMA,
        "command": "diag",
        "truncation": int(truncation),
        "stable": analysis.stable,
        "bijective": analysis.bijective,
        "G_entries": (
            [float(x) for x in analysis.G_entries]
            if analysis.G_entries is not None
            else None
        ),
        "range_closed_margin": _num(analysis.range_closed_margin),
        "range_closed_margin_note": (
            "smallest nonzero |t_k + d_k| on the truncation; a proxy for "
            "range closedness of the truncated operator only"
        ),
        "c": analysis.c,
        "b_min": analysis.b_min,
        "bc": analysis.bc,
    }
