"""Seeded random instances and the brute-force equivalence battery.

Instances are drawn in controlled regimes:

- ``stable-small``: the perturbation is built as Q E + T F, which keeps
  the perturbed range inside the original one, so stability holds by
  construction;
- ``rank-increasing``: the perturbation pushes the range outside R(T),
  raising the rank and breaking stability;
- ``null-hitting``: the perturbation is supported on the complement of
  R(T) in the codomain and acts nontrivially on N(T), planting a vector
  of the perturbed range inside N(S);
- ``zero-perturbation``: dT = 0;
- ``full-rank``: square invertible T with an arbitrary small dT.

Every instance is bitwise-deterministic in its seed.  The battery runs
instances across all regimes and complement modes, excludes the ones
whose decision margins sit near a threshold (excluded instances are
counted, never judged), and asserts every equivalence and identity on
the kept ones.  Failures are data, not exceptions: each carries the
reproduction seed and the margins behind the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import subspaces
from .dense import rank_factorization, spectral_norm
from .errors import InputError
from .geninv import ComplementChoice, GiBundle, build_gi
from .perturb import (
    AnalysisReport,
    Decision,
    PerturbedSystem,
    _robust_space_pair,
    analyze,
)
from .subspaces import Subspace

REGIMES = (
    "stable-small",
    "rank-increasing",
    "null-hitting",
    "zero-perturbation",
    "full-rank",
)
COMPLEMENT_MODES = ("orthogonal", "random-oblique")

MAX_DIM = 12

# Margins within a factor 10 of their threshold are borderline; the
# instance is excluded rather than judged.
BAND_FACTOR = 10.0


@dataclass(frozen=True)
class InstanceSpec:
    """Parameters of one random instance."""

    m: int
    n: int
    r: int
    regime: str
    complement_mode: str = "orthogonal"
    seed: int = 0
    scale: float = 0.1

    def __post_init__(self):
        if not (1 <= self.m <= MAX_DIM and 1 <= self.n <= MAX_DIM):
            raise InputError(f"dims must be in [1, {MAX_DIM}], got {self.m}x{self.n}")
        if not (0 <= self.r <= min(self.m, self.n)):
            raise InputError(f"rank {self.r} infeasible for {self.m}x{self.n}")
        if self.regime not in REGIMES:
            raise InputError(f"unknown regime {self.regime!r}")
        if self.complement_mode not in COMPLEMENT_MODES:
            raise InputError(f"unknown complement mode {self.complement_mode!r}")
        if not self.scale > 0:
            raise InputError("scale must be positive")
        if self.regime in ("rank-increasing", "null-hitting") and self.r >= min(
            self.m, self.n
        ):
            raise InputError(
                f"{self.regime} requires r < min(m, n), got r={self.r}"
            )
        if self.regime == "full-rank" and (self.m != self.n or self.r != self.m):
            raise InputError("full-rank requires square T with r = n")


def _draw_rank_exact(rng: np.random.Generator, m: int, n: int, r: int) -> np.ndarray:
    """Gaussian factor product of numerical rank exactly r."""
    if r == 0:
        return np.zeros((m, n))
    for _ in range(100):
        t = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
        if rank_factorization(t).rank == r:
            return t
    raise InputError("failed to draw a matrix of the requested rank")


def _normalized(raw: np.ndarray, target_norm: float) -> np.ndarray:
    norm = spectral_norm(raw)
    if norm == 0.0:
        return raw
    return (target_norm / norm) * raw


def random_instance(spec: InstanceSpec) -> PerturbedSystem:
    """Build the seeded instance described by ``spec``.

    Deterministic: the same spec yields bitwise-identical systems.
    """
    rng = np.random.default_rng(spec.seed)
    m, n, r = spec.m, spec.n, spec.r
    t = _draw_rank_exact(rng, m, n, r)

    rf = rank_factorization(t)
    null_t = Subspace(n, rf.null_basis)
    range_t = Subspace(m, rf.range_basis)
    if spec.complement_mode == "orthogonal":
        choice = ComplementChoice(
            subspaces.orthogonal_complement(null_t),
            subspaces.orthogonal_complement(range_t),
        )
    else:
        s1, s2 = (int(x) for x in rng.integers(2**63, size=2))
        choice = ComplementChoice(
            subspaces.random_complement(null_t, s1),
            subspaces.random_complement(range_t, s2),
        )
    bundle = build_gi(t, choice)

    dt = _draw_perturbation(rng, spec, bundle, rf.rank)
    return PerturbedSystem.build(bundle, dt)


def _draw_perturbation(
    rng: np.random.Generator, spec: InstanceSpec, bundle: GiBundle, rank_t: int
) -> np.ndarray:
    m, n = spec.m, spec.n
    t = bundle.T
    target = spec.scale * max(1.0, spectral_norm(t))

    if spec.regime == "zero-perturbation":
        return np.zeros((m, n))

    if spec.regime == "stable-small":
        raw = bundle.Q @ rng.standard_normal((m, n)) + t @ rng.standard_normal((n, n))
        return _normalized(raw, target)

    if spec.regime == "full-rank":
        return _normalized(rng.standard_normal((m, n)), target)

    if spec.regime == "rank-increasing":
        residual_proj = np.eye(m) - bundle.Q
        for _ in range(100):
            dt = _normalized(residual_proj @ rng.standard_normal((m, n)), target)
            if rank_factorization(t + dt).rank > rank_t:
                return dt
        raise InputError("failed to draw a rank-increasing perturbation")

    # null-hitting: supported on N(S), acting nontrivially on N(T)
    b_w = rank_factorization(bundle.S).null_basis  # codomain directions killed by S
    b_null = rank_factorization(t).null_basis
    for _ in range(100):
        dt = _normalized(b_w @ rng.standard_normal((b_w.shape[1], n)), target)
        if spectral_norm(dt @ b_null) > 1e-6 * target:
            return dt
    raise InputError("failed to draw a null-hitting perturbation")


def _decisive(dec: Decision) -> bool:
    """A margin is decisive when it is far from its threshold."""
    if dec.threshold == 0.0 or not np.isfinite(dec.margin):
        return True
    return (
        dec.margin <= dec.threshold / BAND_FACTOR
        or dec.margin >= BAND_FACTOR * dec.threshold
    )


def margins_decisive(report: AnalysisReport) -> bool:
    return all(_decisive(dec) for dec in report.decisions.values())


def margin_filter(sys: PerturbedSystem) -> bool:
    """Keep an instance iff none of its decision margins is borderline."""
    return margins_decisive(analyze(sys))


@dataclass(frozen=True, eq=False)
class BatteryFailure:
    """One failed check: the reproduction seed, the condition name and a
    snapshot of the margins behind the verdict."""

    seed: int
    condition: str
    margins: dict[str, float]


@dataclass(frozen=True, eq=False)
class BatteryReport:
    """Aggregate outcome of a battery run.

    instances_run = instances_kept + instances_excluded, and the kept
    instances split into three-way agreements and disagreements (the
    latter appear in ``failures``).
    """

    instances_run: int
    instances_excluded: int
    instances_kept: int
    threeway_agreement_count: int
    fiveway_applicable: int
    fiveway_agreement_count: int
    stable_count: int
    gi_residual_max: float
    subspace_distance_max: float
    min_c_nonzero: float
    failures: list[BatteryFailure]


def projector_formula_comparison(count: int = 120, seed: int = 2024) -> dict:
    """Compare the two candidate formulas for the perturbed range projector.

    On stable bijective instances the similarity transform
    carrier_Y (T S) carrier_Y^{-1} must coincide with Tbar G.  The
    alternative reading carrier_Y S carrier_Y^{-1} is not even
    shape-consistent unless T is square (S maps the codomain back to the
    domain), and on nondegenerate square instances it disagrees with
    Tbar G outright.  This experiment quantifies both facts on ``count``
    stable instances and returns the summary dict.
    """
    from .perturb import bijectivity_pair, perturbed_inverse, stable_range_condition

    stable_regimes = ("stable-small", "zero-perturbation", "full-rank")
    pool = np.random.SeedSequence(seed).generate_state(20 * count, dtype=np.uint64)
    made = 0
    shape_invalid = 0
    square_compared = 0
    max_dev_similarity = 0.0
    min_dev_alt = float("inf")
    for i, raw_seed in enumerate(pool):
        if made >= count:
            break
        regime = stable_regimes[i % len(stable_regimes)]
        mode = COMPLEMENT_MODES[(i // len(stable_regimes)) % len(COMPLEMENT_MODES)]
        spec = draw_spec(regime, mode, int(raw_seed), dims_max=8)
        sys = random_instance(spec)
        cert = bijectivity_pair(sys)
        if not (cert.bij_Y and cert.bij_X):
            continue
        if not stable_range_condition(sys).value:
            continue
        made += 1
        g = perturbed_inverse(sys)
        tbar_g = sys.Tbar @ g
        wy_inv = cert.C
        similarity = sys.carrier_Y @ sys.bundle.Q @ wy_inv
        scale = carrier_condition(sys.carrier_Y) * (1.0 + spectral_norm(tbar_g))
        max_dev_similarity = max(
            max_dev_similarity, spectral_norm(similarity - tbar_g) / scale
        )
        if spec.m != spec.n:
            shape_invalid += 1  # carrier_Y @ S does not even conform
        elif spec.r > 0:
            alt = sys.carrier_Y @ sys.bundle.S @ wy_inv
            min_dev_alt = min(min_dev_alt, spectral_norm(alt - tbar_g) / scale)
            square_compared += 1
    return {
        "instances": made,
        "max_similarity_vs_update_deviation": max_dev_similarity,
        "alternative_shape_invalid": shape_invalid,
        "alternative_square_compared": square_compared,
        "min_alternative_deviation": min_dev_alt,
    }


def _bundle_residual(bundle: GiBundle) -> float:
    """Worst construction residual, normalized by the bundle scales.

    All four residuals share the kappa = 1 + ||S|| ||T|| factor: the
    idempotents are computed through the product S T, so their roundoff
    floor scales with it just like the defining residuals do.
    """
    norm_t = spectral_norm(bundle.T)
    norm_s = spectral_norm(bundle.S)
    kappa = 1.0 + norm_s * norm_t
    res = bundle.residuals
    return max(
        res.r1 / ((1.0 + norm_t) * kappa),
        res.r2 / ((1.0 + norm_s) * kappa),
        res.idem_p / ((1.0 + spectral_norm(bundle.P) ** 2) * kappa),
        res.idem_q / ((1.0 + spectral_norm(bundle.Q) ** 2) * kappa),
    )


def _matrix_close(a: np.ndarray, b: np.ndarray, tol: float) -> tuple[bool, float]:
    scale = 1.0 + spectral_norm(a) + spectral_norm(b)
    diff = spectral_norm(a - b) / scale
    return diff <= tol, diff


def carrier_condition(carrier: np.ndarray) -> float:
    """Condition number of a carrier map (inf when singular)."""
    from .dense import singular_extremes

    smax, smin = singular_extremes(carrier)
    return smax / smin if smin > 0 else float("inf")


def draw_spec(
    regime: str, mode: str, inst_seed: int, dims_max: int, scale: float = 0.1
) -> InstanceSpec:
    """Draw feasible dimensions for a regime, deterministically."""
    rng = np.random.default_rng([inst_seed, 101])
    m = int(rng.integers(1, dims_max + 1))
    n = int(rng.integers(1, dims_max + 1))
    if regime == "full-rank":
        n = m
        r = m
    elif regime in ("rank-increasing", "null-hitting"):
        r = int(rng.integers(0, min(m, n)))  # 0 .. min-1
    else:
        r = int(rng.integers(0, min(m, n) + 1))
    return InstanceSpec(m, n, r, regime, mode, seed=inst_seed, scale=scale)


def battery(
    count: int,
    dims_max: int = 8,
    seed: int = 0,
    regimes: tuple[str, ...] | None = None,
    scale: float = 0.1,
) -> BatteryReport:
    """Run ``count`` seeded instances and assert every module invariant.

    Construction-soundness and the c >= 1 bound are checked on every
    instance; the equivalence batteries only on margin-filtered ones.
    """
    if count < 0:
        raise InputError("count must be nonnegative")
    regimes = tuple(regimes) if regimes is not None else REGIMES
    for reg in regimes:
        if reg not in REGIMES:
            raise InputError(f"unknown regime {reg!r}")
    inst_seeds = np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)

    excluded = 0
    kept = 0
    agree3 = 0
    five_applicable = 0
    agree5 = 0
    stable_count = 0
    gi_residual_max = 0.0
    distance_max = 0.0
    min_c_nonzero = float("inf")
    failures: list[BatteryFailure] = []

    for i in range(count):
        regime = regimes[i % len(regimes)]
        mode = COMPLEMENT_MODES[(i // len(regimes)) % len(COMPLEMENT_MODES)]
        inst_seed = int(inst_seeds[i])
        spec = draw_spec(regime, mode, inst_seed, dims_max, scale)
        sys = random_instance(spec)
        report = analyze(sys)

        def fail(condition: str, _seed=inst_seed, _report=report):
            failures.append(BatteryFailure(_seed, condition, dict(_report.margins)))

        # Construction soundness, judged on every instance.
        resid = _bundle_residual(sys.bundle)
        gi_residual_max = max(gi_residual_max, resid)
        if resid > 1e-10:
            fail("construction_residual")
        if spec.r > 0:
            min_c_nonzero = min(min_c_nonzero, report.c)
            if report.c < 1.0 - 1e-10:
                fail("c_lower_bound")

        if not margins_decisive(report):
            excluded += 1
            continue
        kept += 1
        cert = report.certificate

        if cert.bij_Y != cert.bij_X:
            fail("bijectivity_agreement")
        if cert.bij_Y and cert.bij_X and not cert.inverse_identity_residual <= 1e-8:
            fail("inverse_identity")

        values3 = [d.value for d in report.conditions3.values()]
        if all(values3) or not any(values3):
            agree3 += 1
        else:
            fail("threeway_agreement")

        if report.stable:
            stable_count += 1

        if cert.bij_Y:
            five_applicable += 1
            values5 = [d.value for d in report.conditions5.values()]
            if all(values5) or not any(values5):
                agree5 += 1
            else:
                fail("fiveway_agreement")

            g = report.G
            if cert.bij_X:
                wx_inv_s = np.linalg.solve(sys.carrier_X, sys.bundle.S)
                ok, _ = _matrix_close(g, wx_inv_s, 1e-9)
                if not ok:
                    fail("two_formula_identity")

            if report.stable:
                if not report.gi_residuals.passed:
                    fail("updated_inverse_residuals")
                for name in ("range_recovered", "null_recovered"):
                    distance_max = max(distance_max, report.conditions5[name].margin)
                pbar, qbar = report.Pbar, report.Qbar
                # Both formulas for each projector are evaluated through
                # carrier products, so the comparison scale carries the
                # carrier condition numbers (same convention as the
                # kappa-scaled bundle residuals).
                kappa_x = carrier_condition(sys.carrier_X)
                kappa_y = carrier_condition(sys.carrier_Y)
                ok_p, _ = _matrix_close(
                    pbar, np.eye(pbar.shape[0]) - g @ sys.Tbar, 1e-9 * kappa_x
                )
                ok_q, _ = _matrix_close(qbar, sys.Tbar @ g, 1e-9 * kappa_y)
                if not (ok_p and ok_q):
                    fail("projector_identities")
                idem_p = spectral_norm(pbar @ pbar - pbar) / (
                    kappa_x * (1.0 + spectral_norm(pbar) ** 2)
                )
                idem_q = spectral_norm(qbar @ qbar - qbar) / (
                    kappa_y * (1.0 + spectral_norm(qbar) ** 2)
                )
                if max(idem_p, idem_q) > 1e-9:
                    fail("projector_idempotency")
                # Idempotents computed as carrier sandwiches carry
                # conditioning-amplified roundoff around zero, but their
                # genuine singular values are always >= 1; a 0.5 rank
                # threshold separates the two unambiguously.  The Tbar
                # reference spaces use the same robust threshold as the
                # analysis itself.
                range_tbar, null_tbar, _, _ = _robust_space_pair(sys.Tbar)
                d_p = subspaces.distance(
                    subspaces.range_space(pbar, 0.5), null_tbar
                )
                d_q = subspaces.distance(
                    subspaces.range_space(qbar, 0.5), range_tbar
                )
                distance_max = max(distance_max, d_p, d_q)
                if max(d_p, d_q) > 1e-8:
                    fail("projector_ranges")

        dec = report.decomposition
        if not (dec.implication_1_ok and dec.implication_2_ok):
            fail("decomposition_implications")

        if regime == "rank-increasing":
            if not (rank_factorization(sys.Tbar).rank > rank_factorization(sys.bundle.T).rank):
                fail("regime_rank_increase")
            if report.stable:
                fail("regime_rank_increasing_stable")
        elif regime == "null-hitting":
            if report.stable:
                fail("regime_null_hitting_stable")
        elif report.stable is False:
            fail("regime_expected_stable")

    return BatteryReport(
        instances_run=count,
        instances_excluded=excluded,
        instances_kept=kept,
        threeway_agreement_count=agree3,
        fiveway_applicable=five_applicable,
        fiveway_agreement_count=agree5,
        stable_count=stable_count,
        gi_residual_max=gi_residual_max,
        subspace_distance_max=distance_max,
        min_c_nonzero=min_c_nonzero,
        failures=failures,
    )
