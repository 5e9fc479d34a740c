"""Analysis of perturbed operators T + dT through their carrier maps.

Given a bundle (T, S, P, Q) and a perturbation dT, the two carrier maps

    carrier_Y = I + dT S   on the codomain,
    carrier_X = I + S dT   on the domain,

are simultaneously bijective or not.  When they are bijective the
updated inverse G = S carrier_Y^{-1} = carrier_X^{-1} S is defined, and
it is a generalized inverse of Tbar = T + dT exactly when the
perturbation is stable, i.e. R(Tbar) meets N(S) only in 0.  This module
decides bijectivity and stability, computes G and the perturbed
idempotents, and reports a numeric margin next to every boolean so that
near-threshold verdicts are auditable.

Every decision follows the same convention: ``value`` is the boolean,
``margin`` the decisive scalar (a singular value or a subspace
distance), ``threshold`` what it was compared against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspaces
from .dense import (
    EPS,
    INV_REL_TOL,
    as_matrix,
    singular_extremes,
    solve_square,
    spectral_norm,
)
from .errors import InputError, PreconditionError, SingularMatrixError
from .geninv import DEFAULT_VERIFY_TOL, GiBundle, GiResiduals, verify_gi
from .subspaces import EQUALITY_TOL, Subspace


@dataclass(frozen=True, eq=False)
class PerturbedSystem:
    """A bundle (T, S, P, Q) together with a perturbation dT.

    ``Tbar``, ``carrier_Y`` and ``carrier_X`` are computed once at
    construction and cached; the value is immutable afterwards.
    """

    bundle: GiBundle
    dT: np.ndarray = field(repr=False)
    Tbar: np.ndarray = field(repr=False)
    carrier_Y: np.ndarray = field(repr=False)
    carrier_X: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, bundle: GiBundle, dt: np.ndarray) -> "PerturbedSystem":
        dt = as_matrix(dt, "dT")
        if dt.shape != bundle.T.shape:
            raise InputError(
                f"dT must match T's shape {bundle.T.shape}, got {dt.shape}"
            )
        m, n = bundle.T.shape
        return cls(
            bundle=bundle,
            dT=dt,
            Tbar=bundle.T + dt,
            carrier_Y=np.eye(m) + dt @ bundle.S,
            carrier_X=np.eye(n) + bundle.S @ dt,
        )


@dataclass(frozen=True, eq=False)
class Decision:
    """A boolean with the scalar evidence that produced it."""

    value: bool
    margin: float
    threshold: float
    witness: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class BijectivityCertificate:
    """Invertibility verdicts for both carrier maps.

    ``C`` is carrier_Y^{-1} when it exists.  The inverse-identity
    residual records || carrier_X^{-1} - (I - S C dT) || normalized by
    (1 + ||carrier_X^{-1}||); the two sides agree whenever both carriers
    are bijective.
    """

    bij_Y: bool
    bij_X: bool
    sigma_min_Y: float
    sigma_min_X: float
    threshold_Y: float
    threshold_X: float
    C: np.ndarray | None = field(repr=False, default=None)
    inverse_identity_residual: float = float("nan")


def bijectivity_pair(sys: PerturbedSystem) -> BijectivityCertificate:
    """Decide bijectivity of both carrier maps with explicit margins."""
    smax_y, smin_y = singular_extremes(sys.carrier_Y)
    smax_x, smin_x = singular_extremes(sys.carrier_X)
    thr_y = INV_REL_TOL * smax_y
    thr_x = INV_REL_TOL * smax_x
    bij_y = smin_y > thr_y and smax_y > 0.0
    bij_x = smin_x > thr_x and smax_x > 0.0
    c = None
    residual = float("nan")
    if bij_y:
        c = solve_square(sys.carrier_Y, np.eye(sys.carrier_Y.shape[0]))
    if bij_y and bij_x:
        wx_inv = solve_square(sys.carrier_X, np.eye(sys.carrier_X.shape[0]))
        lhs = wx_inv - (np.eye(wx_inv.shape[0]) - sys.bundle.S @ c @ sys.dT)
        residual = spectral_norm(lhs) / (1.0 + spectral_norm(wx_inv))
    return BijectivityCertificate(
        bij_Y=bij_y,
        bij_X=bij_x,
        sigma_min_Y=smin_y,
        sigma_min_X=smin_x,
        threshold_Y=thr_y,
        threshold_X=thr_x,
        C=c,
        inverse_identity_residual=residual,
    )


# Relative rank threshold for matrices derived through products.  The
# dense default (sigma_max * dim * eps) sits right at the roundoff floor
# of computed products; analysis subspaces need headroom above it.
SPACE_RANK_REL_TOL = 1e-10


def _robust_space_pair(
    x: np.ndarray, rel: float = SPACE_RANK_REL_TOL
) -> tuple[Subspace, Subspace, Decision, Decision]:
    """Range and null space of a computed matrix, with the two singular
    values bracketing the rank decision as auditable margins.

    The "kept" decision carries the smallest counted singular value, the
    "dropped" one the largest discarded singular value; both compared to
    the relative threshold.  An instance whose bracketing values sit
    near the threshold cannot be judged reliably and should be excluded
    by the margin filter.
    """
    u, s, vh = np.linalg.svd(x)
    sigma_max = float(s[0]) if s.size else 0.0
    tol = max(sigma_max * rel, EPS)
    r = int(np.sum(s > tol))
    range_sub = Subspace(x.shape[0], np.ascontiguousarray(u[:, :r]))
    null_sub = Subspace(x.shape[1], np.ascontiguousarray(vh[r:, :].T))
    kept = Decision(True, float(s[r - 1]) if r else float("inf"), tol)
    dropped = Decision(False, float(s[r]) if r < s.size else 0.0, tol)
    return range_sub, null_sub, kept, dropped


@dataclass(frozen=True, eq=False)
class _Spaces:
    """Subspaces derived from a system, computed once per analysis."""

    range_T: Subspace
    null_T: Subspace
    range_S: Subspace
    null_S: Subspace
    range_Tbar: Subspace
    null_Tbar: Subspace
    rank_margins: dict[str, Decision]


def _spaces(sys: PerturbedSystem) -> _Spaces:
    range_t, null_t, kept_t, dropped_t = _robust_space_pair(sys.bundle.T)
    range_s, null_s, kept_s, dropped_s = _robust_space_pair(sys.bundle.S)
    range_tb, null_tb, kept_tb, dropped_tb = _robust_space_pair(sys.Tbar)
    return _Spaces(
        range_T=range_t,
        null_T=null_t,
        range_S=range_s,
        null_S=null_s,
        range_Tbar=range_tb,
        null_Tbar=null_tb,
        rank_margins={
            "rank.T.kept": kept_t,
            "rank.T.dropped": dropped_t,
            "rank.pinv.kept": kept_s,
            "rank.pinv.dropped": dropped_s,
            "rank.Tbar.kept": kept_tb,
            "rank.Tbar.dropped": dropped_tb,
        },
    )


def _margin_decision(margin: float, tol: float, witness=None) -> Decision:
    """Decision of the form "margin exceeds tol" (sigma-style)."""
    return Decision(value=margin > tol, margin=margin, threshold=tol, witness=witness)


def _distance_decision(dist: float, tol: float = EQUALITY_TOL) -> Decision:
    """Decision of the form "distance is at most tol" (gap-style)."""
    return Decision(value=dist <= tol, margin=dist, threshold=tol)


def stable_range_condition(sys: PerturbedSystem, spaces: _Spaces | None = None) -> Decision:
    """The stability test: R(Tbar) ∩ N(S) = {0}.

    Decidable whether or not the carriers are bijective; carries a unit
    witness from the intersection when the answer is no.
    """
    sp = spaces if spaces is not None else _spaces(sys)
    tol = max(sp.range_Tbar.tol, sp.null_S.tol)
    margin = subspaces.intersection_margin(sp.range_Tbar, sp.null_S)
    witness = None
    if not margin > tol:
        _, witness = subspaces.intersect(sp.range_Tbar, sp.null_S)
    return _margin_decision(margin, tol, witness)


def bijectivity_conditions(
    sys: PerturbedSystem,
    cert: BijectivityCertificate | None = None,
    spaces: _Spaces | None = None,
) -> dict[str, Decision]:
    """Three equivalent characterizations of carrier bijectivity.

    - ``carrier_bijective``: sigma_min(carrier_Y) clears its threshold;
    - ``restriction_bijective``: the carrier on the domain, restricted
      to R(S) in an orthonormal basis B (the matrix B^T carrier_X B),
      clears its own threshold;
    - ``subspace_split``: Tbar R(S) + N(S) is the whole codomain, with
      Tbar R(S) ∩ N(S) = {0} and N(Tbar) ∩ R(S) = {0}.

    The three booleans agree away from decision thresholds; the
    randomized battery asserts exactly that.
    """
    cert = cert if cert is not None else bijectivity_pair(sys)
    sp = spaces if spaces is not None else _spaces(sys)

    cond1 = _margin_decision(cert.sigma_min_Y, cert.threshold_Y)

    if sp.range_S.dim == 0:
        cond2 = Decision(value=True, margin=float("inf"), threshold=0.0)
    else:
        b = sp.range_S.basis
        restricted = b.T @ sys.carrier_X @ b
        smax, smin = singular_extremes(restricted)
        cond2 = _margin_decision(smin, INV_REL_TOL * smax)

    if sp.range_S.dim:
        mapped = _robust_space_pair(sys.Tbar @ sp.range_S.basis)[0]
    else:
        mapped = Subspace.trivial(sys.bundle.T.shape[0])
    tol = subspaces.DEFAULT_TOL
    m_sum = subspaces.sum_full_margin(mapped, sp.null_S)
    m_int1 = subspaces.intersection_margin(mapped, sp.null_S)
    m_int2 = subspaces.intersection_margin(sp.null_Tbar, sp.range_S)
    split_value = m_sum > tol and m_int1 > tol and m_int2 > tol
    witness = None
    if not m_int1 > tol:
        _, witness = subspaces.intersect(mapped, sp.null_S)
    elif not m_int2 > tol:
        _, witness = subspaces.intersect(sp.null_Tbar, sp.range_S)
    cond3 = Decision(
        value=split_value,
        margin=min(m_sum, m_int1, m_int2),
        threshold=tol,
        witness=witness,
    )

    return {
        "carrier_bijective": cond1,
        "restriction_bijective": cond2,
        "subspace_split": cond3,
    }


def perturbed_inverse(sys: PerturbedSystem) -> np.ndarray:
    """The updated inverse G = S carrier_Y^{-1}.

    Requires a bijective carrier; raises SingularMatrixError otherwise.
    Always has R(G) = R(S) and N(G) = N(S); it is a generalized inverse
    of Tbar exactly on stable perturbations.
    """
    smax, smin = singular_extremes(sys.carrier_Y)
    if not smin > INV_REL_TOL * smax or smax == 0.0:
        raise SingularMatrixError(
            "carrier map on the codomain is singular to tolerance", sigma_min=smin
        )
    return solve_square(sys.carrier_Y.T, sys.bundle.S.T).T


def stability_conditions(
    sys: PerturbedSystem,
    g: np.ndarray | None = None,
    spaces: _Spaces | None = None,
    verify_tol: float = DEFAULT_VERIFY_TOL,
) -> tuple[dict[str, Decision], GiResiduals]:
    """Five equivalent characterizations of a stable perturbation.

    Requires bijective carriers (PreconditionError otherwise).  Keys:

    - ``range_null_disjoint``: R(Tbar) ∩ N(S) = {0};
    - ``inverse_update_valid``: G passes the generalized-inverse
      residual check for Tbar and R(G), N(G) match R(S), N(S);
    - ``null_mapped_into_range``: carrier_Y^{-1} Tbar maps N(T) into R(T);
    - ``range_recovered``: carrier_Y^{-1} R(Tbar) equals R(T);
    - ``null_recovered``: carrier_X^{-1} N(T) equals N(Tbar).

    Returns the decision map and the residual record of the G check.
    """
    cert = bijectivity_pair(sys)
    if not cert.bij_Y:
        raise PreconditionError(
            "stability conditions require a bijective carrier map"
        )
    sp = spaces if spaces is not None else _spaces(sys)
    if g is None:
        g = perturbed_inverse(sys)
    m, n = sys.bundle.T.shape

    cond1 = stable_range_condition(sys, sp)

    residuals = verify_gi(sys.Tbar, g, verify_tol)
    range_g, null_g, _, _ = _robust_space_pair(g)
    d_range = subspaces.distance(range_g, sp.range_S)
    d_null = subspaces.distance(null_g, sp.null_S)
    # The three constituent checks have two different thresholds; fold
    # them into one margin as the worst ratio-to-threshold so that
    # margin <= threshold iff the boolean is true.
    worst_ratio = max(
        max(residuals.r1, residuals.r2, residuals.idem_p, residuals.idem_q)
        / (residuals.scale * residuals.tol),
        d_range / EQUALITY_TOL,
        d_null / EQUALITY_TOL,
    )
    cond2 = Decision(
        value=worst_ratio <= 1.0,
        margin=worst_ratio * EQUALITY_TOL,
        threshold=EQUALITY_TOL,
    )

    wy_inv = cert.C
    if sp.null_T.dim == 0:
        cond3 = Decision(value=True, margin=0.0, threshold=EQUALITY_TOL)
    else:
        cols = wy_inv @ sys.Tbar @ sp.null_T.basis
        pi_r = sp.range_T.projector()
        resid = spectral_norm(cols - pi_r @ cols) / (1.0 + spectral_norm(cols))
        cond3 = _distance_decision(resid)

    # Map the computed basis of R(Tbar), not the raw product matrix: an
    # invertible carrier applied to orthonormal columns keeps full rank,
    # so no second rank decision is needed.
    if sp.range_Tbar.dim == 0:
        mapped_range = Subspace.trivial(m)
    else:
        mapped_range = Subspace.span(wy_inv @ sp.range_Tbar.basis)
    d4 = subspaces.distance(mapped_range, sp.range_T)
    cond4 = _distance_decision(d4)

    if sp.null_T.dim == 0:
        wx_null = Subspace.trivial(n)
    else:
        wx_inv = solve_square(sys.carrier_X, np.eye(n))
        wx_null = Subspace.span(wx_inv @ sp.null_T.basis)
    d5 = subspaces.distance(wx_null, sp.null_Tbar)
    cond5 = _distance_decision(d5)

    return (
        {
            "range_null_disjoint": cond1,
            "inverse_update_valid": cond2,
            "null_mapped_into_range": cond3,
            "range_recovered": cond4,
            "null_recovered": cond5,
        },
        residuals,
    )


@dataclass(frozen=True, eq=False)
class DecompositionCheck:
    """Four splitting conditions and the two implications tying them to
    bijectivity and stability."""

    four_conditions: dict[str, Decision]
    decomposition_domain: bool
    decomposition_codomain: bool
    implication_1_ok: bool
    implication_2_ok: bool


def decomposition_check(
    sys: PerturbedSystem,
    cert: BijectivityCertificate | None = None,
    spaces: _Spaces | None = None,
) -> DecompositionCheck:
    """Check the domain/codomain splittings induced by a perturbation.

    The four conditions are N(Tbar) ∩ R(S) = {0}, R(Tbar) ∩ N(S) = {0},
    N(Tbar) + R(S) = domain and N(S) + R(Tbar) = codomain.  All four
    together imply carrier bijectivity (implication 1); bijectivity plus
    stability implies both decompositions (implication 2).  Each
    implication is reported as satisfied or violated on this instance.
    """
    cert = cert if cert is not None else bijectivity_pair(sys)
    sp = spaces if spaces is not None else _spaces(sys)
    tol = subspaces.DEFAULT_TOL

    m_int_dom = subspaces.intersection_margin(sp.null_Tbar, sp.range_S)
    m_int_cod = subspaces.intersection_margin(sp.range_Tbar, sp.null_S)
    m_sum_dom = subspaces.sum_full_margin(sp.null_Tbar, sp.range_S)
    m_sum_cod = subspaces.sum_full_margin(sp.null_S, sp.range_Tbar)

    four = {
        "null_range_disjoint": _margin_decision(m_int_dom, tol),
        "range_null_disjoint": _margin_decision(m_int_cod, tol),
        "domain_split": _margin_decision(m_sum_dom, tol),
        "codomain_split": _margin_decision(m_sum_cod, tol),
    }
    dec_dom = four["null_range_disjoint"].value and four["domain_split"].value
    dec_cod = four["range_null_disjoint"].value and four["codomain_split"].value
    all_four = all(d.value for d in four.values())
    stable = four["range_null_disjoint"].value

    implication_1 = (not all_four) or cert.bij_Y
    implication_2 = (not (cert.bij_Y and stable)) or (dec_dom and dec_cod)
    return DecompositionCheck(
        four_conditions=four,
        decomposition_domain=dec_dom,
        decomposition_codomain=dec_cod,
        implication_1_ok=implication_1,
        implication_2_ok=implication_2,
    )


def perturbed_projectors(sys: PerturbedSystem) -> tuple[np.ndarray, np.ndarray]:
    """The idempotents of the updated inverse on a stable perturbation.

    Pbar = carrier_X^{-1} P carrier_X projects onto N(Tbar); Qbar =
    carrier_Y Q carrier_Y^{-1} projects onto R(Tbar).  They coincide
    with I - G Tbar and Tbar G respectively, which the battery
    cross-checks.  Requires bijective carriers and a stable
    perturbation.
    """
    cert = bijectivity_pair(sys)
    if not cert.bij_Y:
        raise PreconditionError("perturbed projectors require a bijective carrier")
    if not stable_range_condition(sys).value:
        raise PreconditionError(
            "perturbed projectors require a stable perturbation"
        )
    n = sys.bundle.T.shape[1]
    wx_inv = solve_square(sys.carrier_X, np.eye(n))
    pbar = wx_inv @ sys.bundle.P @ sys.carrier_X
    qbar = sys.carrier_Y @ sys.bundle.Q @ cert.C
    return pbar, qbar


def norm_condition(sys: PerturbedSystem, a: float, b: float) -> bool:
    """True iff a ||S|| + b ||T S|| < 1 (spectral norms)."""
    if a < 0 or b < 0:
        raise InputError("a and b must be nonnegative")
    return a * spectral_norm(sys.bundle.S) + b * spectral_norm(sys.bundle.Q) < 1.0


def minimal_a(
    sys: PerturbedSystem,
    b: float,
    starts: int = 64,
    seed: int = 0,
    max_iter: int = 10000,
) -> float:
    """Smallest a with ||dT x|| <= a ||x|| + b ||T x|| on the unit sphere.

    Maximizes f(x) = ||dT x|| - b ||T x|| over unit vectors by
    multi-start projected gradient ascent (random unit starts from the
    seeded generator; the basis vectors are always included among the
    starts, since separable instances attain their maximum at a
    coordinate direction).  Ascent steps follow the normalized tangent
    gradient with backtracking, stopping when the improvement drops
    below 1e-12 or after ``max_iter`` iterations.

    The result is clamped at 0 and is a guaranteed lower bound for the
    true maximum (f evaluated at a feasible point); treat it as a
    heuristic upper estimate of the constant itself.
    """
    if b < 0:
        raise InputError("b must be nonnegative")
    d = sys.dT
    t = sys.bundle.T
    n = t.shape[1]
    rng = np.random.default_rng(seed)

    def f(x: np.ndarray) -> float:
        return float(np.linalg.norm(d @ x) - b * np.linalg.norm(t @ x))

    def grad(x: np.ndarray) -> np.ndarray:
        dx = d @ x
        tx = t @ x
        g = np.zeros(n)
        nd = np.linalg.norm(dx)
        if nd > 1e-300:
            g += d.T @ dx / nd
        nt = np.linalg.norm(tx)
        if nt > 1e-300:
            g -= b * (t.T @ tx) / nt
        return g

    def ascend(x0: np.ndarray) -> float:
        x = x0 / np.linalg.norm(x0)
        fx = f(x)
        step = 0.5
        for _ in range(max_iter):
            g = grad(x)
            g_tan = g - (g @ x) * x
            gnorm = np.linalg.norm(g_tan)
            if gnorm <= 1e-14:
                break
            direction = g_tan / gnorm
            improved = False
            while step > 1e-14:
                x_new = x + step * direction
                x_new /= np.linalg.norm(x_new)
                f_new = f(x_new)
                if f_new > fx:
                    gain = f_new - fx
                    x, fx = x_new, f_new
                    improved = True
                    step = min(step * 1.5, 0.5)
                    if gain < 1e-12:
                        return fx
                    break
                step /= 2.0
            if not improved:
                break
        return fx

    best = 0.0
    initial = [np.eye(n)[:, k] for k in range(n)]
    initial += [rng.standard_normal(n) for _ in range(starts)]
    for x0 in initial:
        if np.linalg.norm(x0) == 0.0:
            continue
        best = max(best, ascend(x0))
    return best


@dataclass(frozen=True, eq=False)
class AnalysisReport:
    """Everything the analysis decides for one perturbed system.

    ``G`` is present exactly when the carrier map is bijective;
    ``Pbar``/``Qbar`` additionally require stability.  ``decisions``
    maps every condition name to its Decision; ``margins`` is the flat
    name -> margin view of the same data.
    """

    certificate: BijectivityCertificate
    conditions3: dict[str, Decision]
    conditions5: dict[str, Decision] | None
    decomposition: DecompositionCheck
    stable: bool
    G: np.ndarray | None
    gi_residuals: GiResiduals | None
    Pbar: np.ndarray | None
    Qbar: np.ndarray | None
    c: float
    norm_pinv: float
    decisions: dict[str, Decision]
    margins: dict[str, float]


def analyze(sys: PerturbedSystem, verify_tol: float = DEFAULT_VERIFY_TOL) -> AnalysisReport:
    """Run the full decision battery on one system.

    Produces a report whether or not the perturbation is stable; an
    uncertified G (one failing its residual check) is still reported,
    together with the failing residuals.
    """
    sp = _spaces(sys)
    cert = bijectivity_pair(sys)
    cond3 = bijectivity_conditions(sys, cert, sp)
    stable_dec = stable_range_condition(sys, sp)
    decomposition = decomposition_check(sys, cert, sp)

    g = None
    residuals = None
    cond5 = None
    pbar = qbar = None
    if cert.bij_Y:
        g = perturbed_inverse(sys)
        cond5, residuals = stability_conditions(sys, g, sp, verify_tol)
        if stable_dec.value:
            pbar, qbar = perturbed_projectors(sys)

    decisions: dict[str, Decision] = {}
    decisions["carrier_Y_regular"] = _margin_decision(cert.sigma_min_Y, cert.threshold_Y)
    decisions["carrier_X_regular"] = _margin_decision(cert.sigma_min_X, cert.threshold_X)
    decisions.update(sp.rank_margins)
    if g is not None:
        _, _, kept_g, dropped_g = _robust_space_pair(g)
        decisions["rank.G.kept"] = kept_g
        decisions["rank.G.dropped"] = dropped_g
    for name, dec in cond3.items():
        decisions[f"bijectivity.{name}"] = dec
    decisions["stability.range_null_disjoint"] = stable_dec
    if cond5 is not None:
        for name, dec in cond5.items():
            decisions[f"stability.{name}"] = dec
    for name, dec in decomposition.four_conditions.items():
        decisions[f"decomposition.{name}"] = dec

    margins = {name: dec.margin for name, dec in decisions.items()}
    return AnalysisReport(
        certificate=cert,
        conditions3=cond3,
        conditions5=cond5,
        decomposition=decomposition,
        stable=stable_dec.value,
        G=g,
        gi_residuals=residuals,
        Pbar=pbar,
        Qbar=qbar,
        c=spectral_norm(sys.bundle.Q),
        norm_pinv=spectral_norm(sys.bundle.S),
        decisions=decisions,
        margins=margins,
    )
