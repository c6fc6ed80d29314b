"""Named checks that a scenario can request.

Each check maps to one operation of the library and returns a
:class:`CheckResult`.  Certifying checks decide the exit code; probes only
report data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds, identities, models, spectral, transfer
from .errors import ConfigurationError
from .polys import Poly
from .spectral import GaussianProfile, HermiteField

FD_TOL = 1e-3
FD_MIN_RATIO = 3.0
DIVERGENCE_TOL = 1e-9
SCHUR_IDENTITY_TOL = 1e-10
SCHUR_CONSTANT_TOL = 1e-6
SCHUR_VARIANCE_TOL = 1e-16
FLOW_NORM_TOL = 1e-8
HEAT_FD_TOL = 1e-5
HEAT_APPLY_TOL = 1e-6
ANCHOR_TOL = 1e-12


@dataclass(frozen=True)
class Series:
    """A table destined for one CSV file; rows are sorted by the first column."""

    name: str
    columns: tuple
    rows: tuple


@dataclass
class CheckResult:
    name: str
    module: str
    certifying: bool
    passed: bool | None
    metrics: dict = field(default_factory=dict)
    series: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if not self.certifying:
            return "probe"
        return "pass" if self.passed else "fail"

    def as_dict(self) -> dict:
        return {
            "check": self.name,
            "module": self.module,
            "certifying": self.certifying,
            "verdict": self.verdict,
            "metrics": self.metrics,
            "notes": list(self.notes),
        }


def worst(values) -> float:
    """Largest value, NaN if any value is NaN (so a NaN can never pass)."""
    arr = np.asarray(list(values), dtype=float)
    return float(np.max(arr)) if arr.size else math.nan


def _series(name, columns, rows):
    rows = sorted((tuple(r) for r in rows), key=lambda r: r[0])
    return Series(name, tuple(columns), tuple(rows))


def _require_field(v, what):
    if not isinstance(v, HermiteField):
        raise ConfigurationError(f"{what} needs Hermite initial data")


def _require_euclidean(sc, what):
    if models.Kind.parse(sc.kind) is not models.Kind.EUCLIDEAN:
        raise ConfigurationError(f"{what} needs the Euclidean model")


# --- soliton_models ------------------------------------------------------------


def check_soliton_identities(sc, v):
    from .scenario import sample_points

    rep = models.check_identities(sc.model, sample_points(sc))
    res = rep.max_residual
    return CheckResult(
        "soliton_identities",
        "soliton_models",
        True,
        res <= sc.closed_form_tol,
        {
            "scalar_laplacian": rep.scalar_laplacian,
            "scalar_gradient": rep.scalar_gradient,
            "laplacian_gradient": rep.laplacian_gradient,
            "max_residual": res,
            "min_R": rep.min_R,
            "n_points": rep.n_points,
            "tolerance": sc.closed_form_tol,
        },
    )


# --- spectral_semigroup --------------------------------------------------------


def check_semigroup_law(sc, v):
    """``P_{s+t} v`` against ``P_s P_t v`` over pairs of grid times."""
    times = sc.time_grid()
    top = 0.0
    for s in times[:: max(1, len(times) // 8)]:
        for t in times[:: max(1, len(times) // 8)]:
            a = bounds.evolved(v, s + t)
            b = bounds.evolved(bounds.evolved(v, t), s)
            if isinstance(v, HermiteField):
                gap = max((abs(a.coeffs[k] - b.coeffs[k]) for k in a.coeffs), default=0.0)
            else:
                gap = max(abs(a.amplitude - b.amplitude), abs(a.exponent - b.exponent))
            top = max(top, gap)
    return CheckResult(
        "semigroup_law",
        "spectral_semigroup",
        True,
        top <= sc.closed_form_tol,
        {"max_gap": top, "tolerance": sc.closed_form_tol},
    )


def check_parseval(sc, v):
    """Coefficient norm against direct quadrature at ``gamma = 1``."""
    _require_field(v, "parseval")
    exact = spectral.parseval_norm_sq(v)
    if v.model.kind is models.Kind.EUCLIDEAN:
        quad = spectral.quadrature_norm_sq(v, 1.0, order=max(sc.order, v.degree + 2))
    else:
        quad = spectral.weighted_norm_sq(v, 1.0)
    rel = abs(exact - quad) / max(abs(exact), 1e-300)
    return CheckResult(
        "parseval", "spectral_semigroup", True, rel <= sc.closed_form_tol,
        {"parseval": exact, "quadrature": quad, "rel_error": rel, "tolerance": sc.closed_form_tol},
    )


# --- oracle_engines --------------------------------------------------------------


def check_oracle_equivalence(sc, v):
    _require_field(v, "oracle_equivalence")
    _require_euclidean(sc, "oracle_equivalence")
    rows = []
    ok = True
    for t in (0.5, 1.0):
        cmp = spectral.oracle_discrepancy(v, t, sc.fd)
        rows.append((t, cmp.sup_error, cmp.sup_error_refined, cmp.ratio, FD_TOL))
        ok = ok and cmp.sup_error <= FD_TOL and cmp.ratio >= FD_MIN_RATIO
    return CheckResult(
        "oracle_equivalence",
        "oracle_engines",
        True,
        ok,
        {
            "max_sup_error": worst(r[1] for r in rows),
            "min_refinement_ratio": -worst(-r[3] for r in rows),
            "tolerance": FD_TOL,
            "min_ratio": FD_MIN_RATIO,
        },
        [_series("oracle_equivalence", ("t", "sup_error", "sup_error_refined", "ratio", "tolerance"), rows)],
    )


# --- bound_monitors --------------------------------------------------------------


def _bound_result(rep, module="bound_monitors"):
    rows = [(t, r, rep.tolerance) for t, r in zip(rep.times, rep.ratios)]
    return CheckResult(
        rep.name,
        module,
        True,
        rep.passed,
        {
            "max_ratio": rep.max_ratio,
            "final_ratio": rep.ratios[-1],
            "monotone": rep.monotone,
            "tolerance": rep.tolerance,
            "schedule": rep.schedule,
        },
        [_series(rep.name, ("t", "ratio", "tolerance"), rows)],
    )


def check_classical(sc, v):
    return _bound_result(bounds.classical_bound(v, sc.time_grid(), sc.closed_form_tol))


def check_critical(sc, v):
    return _bound_result(bounds.critical_bound(v, sc.time_grid(), sc.schedule, sc.closed_form_tol))


def _be_gamma(sc, t):
    if sc.schedule.gamma_kind is bounds.GammaKind.CRITICAL:
        e = math.exp(t)
        return (1.0 + e - 0.1 * (e - 1.0)) / 2.0
    return sc.schedule.gamma(t)


def check_bakry_emery(sc, v):
    rows = []
    ok = True
    diverged = 0
    for t in sc.time_grid():
        if t <= 0:
            continue
        rep = bounds.bakry_emery_bound(v, t, _be_gamma(sc, t), sc.closed_form_tol)
        if rep.verdict == "diverged":
            diverged += 1
            continue
        rows.append((t, rep.ratios[0], sc.closed_form_tol))
        ok = ok and rep.passed
    notes = []
    if sc.schedule.gamma_kind is bounds.GammaKind.CRITICAL:
        notes.append("critical schedule: constant diverges, evaluated on the epsilon=0.1 subcritical weight")
    return CheckResult(
        "bakry_emery", "bound_monitors", True, ok,
        {"max_ratio": worst(r[1] for r in rows), "diverged_points": diverged,
         "tolerance": sc.closed_form_tol},
        [_series("bakry_emery", ("t", "ratio", "tolerance"), rows)],
        notes,
    )


def check_hypercontractivity(sc, v):
    times = [t for t in sc.time_grid() if t > 0]
    times = times[:: max(1, len(times) // 6)]
    rows = []
    for t in times:
        probe = bounds.hypercontractivity_probe(v, t)
        row = [t]
        for label in ("stated", "holder"):
            e = probe["exponents"].get(label, {})
            row += [e.get("q", math.nan), e.get("ratio", math.nan)]
        rows.append(tuple(row))
    holds = {lab: all(not (r[i] > 1.0) for r in rows) for lab, i in (("stated", 2), ("holder", 4))}
    return CheckResult(
        "hypercontractivity", "bound_monitors", False, None,
        {"stated_exponent_holds": holds["stated"], "holder_exponent_holds": holds["holder"]},
        [_series("hypercontractivity", ("t", "q_stated", "ratio_stated", "q_holder", "ratio_holder"), rows)],
    )


def check_ansatz(sc, v):
    rows = []
    for t in sc.time_grid():
        fc, cc = bounds.ansatz_coefficients(sc.schedule, t)
        rows.append((t, fc, cc))
    tol = sc.closed_form_tol
    worst_f = worst(r[1] for r in rows)
    worst_c = worst(r[2] for r in rows)
    return CheckResult(
        "ansatz", "bound_monitors", True, worst_f <= tol and worst_c <= tol,
        {"max_f_coefficient": worst_f, "max_constant_coefficient": worst_c,
         "max_abs": max(max(abs(r[1]), abs(r[2])) for r in rows), "tolerance": tol},
        [_series("ansatz", ("t", "f_coefficient", "constant_coefficient"), rows)],
    )


def check_derivative_bound(sc, v):
    rows = []
    ok = True
    for t in sc.time_grid()[1:: max(1, len(sc.time_grid()) // 8)]:
        numeric, ansatz = bounds.derivative_gap(v, sc.schedule, t)
        slack = sc.numeric_tol * max(1.0, abs(ansatz))
        rows.append((t, numeric, ansatz, slack))
        ok = ok and numeric <= ansatz + slack
    return CheckResult(
        "derivative_bound", "bound_monitors", True, ok,
        {"max_excess": worst(r[1] - r[2] for r in rows), "tolerance": sc.numeric_tol},
        [_series("derivative_bound", ("t", "numeric_derivative", "ansatz_bound", "slack"), rows)],
    )


def check_sharpness(sc, v):
    s = bounds.sharpness_L(v)
    ok = s.limit_agreement <= sc.numeric_tol
    return CheckResult(
        "sharpness", "bound_monitors", True, ok,
        {"closed_form": s.closed_form, "numeric_t20": s.numeric_t20, "numeric_t25": s.numeric_t25,
         "limit_agreement": s.limit_agreement, "tolerance": sc.numeric_tol},
    )


# --- identity_checks -------------------------------------------------------------


def hand_anchor():
    """``v = 1, f = y^2/4, alpha = 1, gamma = 2`` at ``y = 1``; both sides are ``-(3/8) e^{-1/8}``."""
    jet = identities.jet_from_polys(Poly.constant(1.0, 1), identities.gaussian_potential(1), [1.0], 1.0, 2.0)
    lhs, rhs = identities.divergence_identity_sides(jet)
    return lhs, rhs, -0.375 * math.exp(-0.125)


def check_divergence_identity(sc, v):
    count = int(sc.sweep.get("count", 1000))
    res = identities.random_divergence_sweep(sc.seed, count)
    lhs, rhs, expect = hand_anchor()
    anchor_gap = max(abs(lhs - expect), abs(rhs - expect))
    ok = res.max_residual <= DIVERGENCE_TOL and anchor_gap <= ANCHOR_TOL
    return CheckResult(
        "divergence_identity", "identity_checks", True, ok,
        {"count": count, "max_residual": res.max_residual, "worst_index": res.worst_index,
         "anchor_lhs": lhs, "anchor_rhs": rhs, "anchor_expected": expect,
         "tolerance": DIVERGENCE_TOL},
    )


def check_bochner(sc, v):
    count = int(sc.sweep.get("count", 200))
    res, min_rhs = identities.random_bochner_sweep(sc.seed, min(count, 1000))
    ok = res.max_residual <= DIVERGENCE_TOL and min_rhs >= -sc.closed_form_tol
    return CheckResult(
        "bochner", "identity_checks", True, ok,
        {"max_relative_residual": res.max_residual, "min_rhs_psd": min_rhs, "tolerance": DIVERGENCE_TOL},
    )


def check_laplacian_commutes(sc, v):
    _require_field(v, "laplacian_commutes")
    top = worst(identities.laplacian_commutes(v, t) for t in sc.time_grid())
    return CheckResult(
        "laplacian_commutes", "identity_checks", True, top <= sc.closed_form_tol,
        {"max_gap": top, "tolerance": sc.closed_form_tol},
    )


# --- ricci_transfer_schur --------------------------------------------------------


def check_flow_norm_identity(sc, v):
    _require_euclidean(sc, "flow_norm_identity")
    rows = []
    ok = True
    for t in sc.time_grid():
        val = transfer.flow_norm_identity(v, t)
        rows.append((t, val.residual, val.bound_ratio, FLOW_NORM_TOL))
        ok = ok and val.residual <= FLOW_NORM_TOL and val.bound_ratio <= 1.0 + sc.closed_form_tol
    return CheckResult(
        "flow_norm_identity", "ricci_transfer_schur", True, ok,
        {"max_residual": worst(r[1] for r in rows), "max_bound_ratio": worst(r[2] for r in rows),
         "tolerance": FLOW_NORM_TOL},
        [_series("flow_norm_identity", ("t", "residual", "bound_ratio", "tolerance"), rows)],
        [transfer.TAU_RANGE_NOTE],
    )


def check_flow_heat_equation(sc, v):
    _require_euclidean(sc, "flow_heat_equation")
    from .scenario import sample_points

    pts = sample_points(sc, 8, 2.0)
    t0 = v.t if isinstance(v, GaussianProfile) else 0.0
    rows = []
    for tau in (-0.9, -0.5, -0.1):
        if -math.log(-tau) - 1e-3 < t0 or tau - 1e-3 < -1.0:
            continue
        r = transfer.heat_equation_residual(lambda s: transfer.to_flow(v, s), tau, pts)
        rows.append((tau, r, HEAT_FD_TOL))
    top = worst(r[1] for r in rows)
    return CheckResult(
        "flow_heat_equation", "ricci_transfer_schur", True, top <= HEAT_FD_TOL,
        {"max_residual": top, "tolerance": HEAT_FD_TOL},
        [_series("flow_heat_equation", ("tau", "residual", "tolerance"), rows)],
    )


def check_rescaled_potential(sc, v):
    _require_euclidean(sc, "rescaled_potential")
    from .scenario import sample_points

    pts = sample_points(sc)
    model = models.make_model(sc.kind, sc.n)
    top = 0.0
    for tau in np.linspace(-1.0, -0.01, 34):
        dev = np.abs(models.rescaled_potential(model, float(tau), pts) - np.sum(pts**2, axis=1) / 4.0)
        top = max(top, float(dev.max()))
    return CheckResult(
        "rescaled_potential", "ricci_transfer_schur", True, top <= sc.closed_form_tol,
        {"max_deviation": top, "tolerance": sc.closed_form_tol},
    )


def check_schur_identity(sc, v):
    rng = np.random.default_rng([sc.seed, 31])
    top = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        x = rng.uniform(-3, 3, n)
        y = rng.uniform(-3, 3, n)
        tau = rng.uniform(0.0, 0.99)
        top = max(top, transfer.schur_identity_residual(x, y, tau))
    return CheckResult(
        "schur_identity", "ricci_transfer_schur", True, top <= SCHUR_IDENTITY_TOL,
        {"draws": 1000, "max_residual": top, "tolerance": SCHUR_IDENTITY_TOL},
    )


def schur_rows(taus, ns, seed):
    rows = []
    for n in ns:
        rng = np.random.default_rng([seed, 37, n])
        pts = rng.uniform(-3.0, 3.0, size=(20, n))
        for tau in taus:
            val = transfer.schur_row_constant(tau, n, pts)
            cx, cy = transfer.expected_row_constants(tau, n)
            rows.append(
                (tau, n, val.C_X, cx, abs(val.C_X - cx) / cx, val.x_variance,
                 val.C_Y, cy, abs(val.C_Y - cy) / cy, val.y_variance, val.operator_bound)
            )
    return rows


SCHUR_COLUMNS = ("tau", "n", "C_X", "C_X_expected", "C_X_rel_error", "C_X_variance",
                 "C_Y", "C_Y_expected", "C_Y_rel_error", "C_Y_variance", "operator_bound")


def check_schur_row_constant(sc, v):
    taus = sc.sweep.get("tau_values", (0.0, 0.25, 0.5, 0.9))
    rows = schur_rows(taus, (sc.n,), sc.seed)
    ok = all(r[4] <= SCHUR_CONSTANT_TOL and r[5] < SCHUR_VARIANCE_TOL and r[8] <= SCHUR_CONSTANT_TOL
             and r[9] < SCHUR_VARIANCE_TOL for r in rows)
    return CheckResult(
        "schur_row_constant", "ricci_transfer_schur", True, ok,
        {"max_C_X_rel_error": worst(r[4] for r in rows), "max_variance": worst(max(r[5], r[9]) for r in rows),
         "max_operator_bound": worst(r[10] for r in rows), "tolerance": SCHUR_CONSTANT_TOL},
        [_series("schur_row_constant", SCHUR_COLUMNS, rows)],
    )


def heat_apply_rows(n, seed):
    rng = np.random.default_rng([seed, 41, n])
    pts = np.vstack([np.zeros(n), rng.uniform(-1.5, 1.5, size=(4, n))])
    rows = []
    for tau in (0.0, 0.5, 0.9):
        rows.append((tau, "reverse c0=2", transfer.heat_apply_vs_kernel("reverse", 2.0, n, tau, pts)))
        rows.append((tau, "forward c0=1", transfer.heat_apply_vs_kernel("forward", 1.0, n, tau, pts)))
        one = transfer.heat_apply(lambda y: np.ones(len(y)), tau, pts)
        rows.append((tau, "u0=1", float(np.max(np.abs(one - 1.0)))))
        lin = transfer.heat_apply(lambda y: y[:, 0], tau, pts)
        rows.append((tau, "u0=x_1", float(np.max(np.abs(lin - pts[:, 0])))))
    return rows


def check_heat_apply(sc, v):
    rows = heat_apply_rows(sc.n, sc.seed)
    top = worst(r[2] for r in rows)
    return CheckResult(
        "heat_apply", "ricci_transfer_schur", True, top <= HEAT_APPLY_TOL,
        {"max_residual": top, "tolerance": HEAT_APPLY_TOL},
        [_series("heat_apply", ("tau", "case", "residual"), rows)],
    )


def check_composition(sc, v):
    """Continuity at tau = 0 of flow evolution followed by the kernel."""
    if not isinstance(v, GaussianProfile):
        raise ConfigurationError("composition needs a Gaussian profile")
    from .scenario import sample_points

    gap = transfer.composition_gap(v, sample_points(sc, 6, 1.5))
    return CheckResult(
        "composition", "ricci_transfer_schur", True, gap <= HEAT_APPLY_TOL,
        {"gap": gap, "tolerance": HEAT_APPLY_TOL},
    )


REGISTRY = {
    "soliton_identities": check_soliton_identities,
    "semigroup_law": check_semigroup_law,
    "parseval": check_parseval,
    "oracle_equivalence": check_oracle_equivalence,
    "classical": check_classical,
    "critical": check_critical,
    "bakry_emery": check_bakry_emery,
    "hypercontractivity": check_hypercontractivity,
    "ansatz": check_ansatz,
    "derivative_bound": check_derivative_bound,
    "sharpness": check_sharpness,
    "divergence_identity": check_divergence_identity,
    "bochner": check_bochner,
    "laplacian_commutes": check_laplacian_commutes,
    "flow_norm_identity": check_flow_norm_identity,
    "flow_heat_equation": check_flow_heat_equation,
    "rescaled_potential": check_rescaled_potential,
    "schur_identity": check_schur_identity,
    "schur_row_constant": check_schur_row_constant,
    "heat_apply": check_heat_apply,
    "composition": check_composition,
}


def validate_check_names(names):
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise ConfigurationError(f"unknown checks {unknown}; known: {sorted(REGISTRY)}")
    if len(set(names)) != len(names):
        raise ConfigurationError("duplicate check names")


def run_check(name, sc):
    from .scenario import build_initial

    return REGISTRY[name](sc, build_initial(sc))
