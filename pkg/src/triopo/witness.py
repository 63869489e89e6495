"""Bipartite and tripartite entanglement criteria with optimized corrections.

The three tripartite inequalities (van Loock-Furusawa family, indices refer
to pump=0, signal=1, idler=2; every separable state satisfies all of them):

    V0 = Var[(p1 - p2)/sqrt2] + Var[(q1 + q2)/sqrt2 - alpha0 * q0] >= 2
    V1 = Var[(p0 + p1)/sqrt2] + Var[(q1 - q0)/sqrt2 + alpha2 * q2] >= 2
    V2 = Var[(p0 + p2)/sqrt2] + Var[(q2 - q0)/sqrt2 + alpha1 * q1] >= 2

The alpha_j are chosen to minimize each V_j; the minimization is a quadratic
with the closed-form solution alpha* = cov(base, correction)/Var[correction],
and the achieved variance reduction (the beta term) is cov^2/Var.  Violation
of at least two inequalities certifies genuine tripartite entanglement.
Setting alpha_j = 0 recovers the bipartite Duan-Simon criterion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gaussian import (
    ModeId,
    QuadratureAxis,
    QuadratureCombination,
    SpectralCovariance,
    combination_variance,
    covariance_between,
)

VIOLATION_BOUND = 2.0

_P = QuadratureAxis.P
_Q = QuadratureAxis.Q


@dataclass(frozen=True)
class WitnessCoefficients:
    """Optimal correction coefficients; alpha_j = 0 recovers Duan-Simon."""

    alpha0: float
    alpha1: float
    alpha2: float


@dataclass(frozen=True)
class WitnessReport:
    """Evaluated inequalities, their constituent terms, and verdicts.

    Verdicts are strict comparisons with 2; measurement significance is left
    to the caller.  `terms` carries the named variances and beta corrections.
    """

    v0: float
    v1: float
    v2: float
    terms: dict
    coefficients: WitnessCoefficients
    violations: tuple
    genuine_tripartite: bool

    @property
    def triple_phase_correlation(self) -> bool:
        """Corrected twin phase sum below SQL with a nonzero pump correction:
        a quantum correlation involving all three fields."""
        return self.terms["var_q_plus_corr"] < 1.0 and self.terms["beta0"] > 0.0

    def to_key_value_block(self) -> str:
        lines = [f"V0={self.v0!r}", f"V1={self.v1!r}", f"V2={self.v2!r}"]
        lines += [f"alpha{i}={getattr(self.coefficients, f'alpha{i}')!r}" for i in range(3)]
        lines += [f"{k}={v!r}" for k, v in self.terms.items()]
        lines += [f"violation{i}={bool(v)}" for i, v in enumerate(self.violations)]
        lines.append(f"genuine_tripartite={self.genuine_tripartite}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def csv_header(with_sigma: bool = True):
        cols = ["sigma"] if with_sigma else []
        cols += ["V0", "V1", "V2", "alpha0", "alpha1", "alpha2",
                 "beta0", "beta1", "beta2",
                 "var_p_minus", "var_q_plus", "var_q_plus_corr",
                 "var_p01", "var_q01_corr", "var_p02", "var_q02_corr"]
        return cols

    def to_csv_row(self, sigma: float | None = None):
        t = self.terms
        vals = [] if sigma is None else [sigma]
        vals += [self.v0, self.v1, self.v2,
                 self.coefficients.alpha0, self.coefficients.alpha1, self.coefficients.alpha2,
                 t["beta0"], t["beta1"], t["beta2"],
                 t["var_p_minus"], t["var_q_plus"], t["var_q_plus_corr"],
                 t["var_p01"], t["var_q01_corr"], t["var_p02"], t["var_q02_corr"]]
        return vals


def optimal_alpha(S: SpectralCovariance, base: QuadratureCombination,
                  mode: ModeId, axis: QuadratureAxis = _Q) -> float:
    """Coefficient minimizing Var[base - alpha * x] for quadrature x.

    The variance is quadratic in alpha; the unique minimizer is
    cov(base, x)/Var[x] and the achieved reduction is cov^2/Var[x].
    """
    corr = QuadratureCombination.single(mode, axis)
    var_corr = combination_variance(S, corr)
    if var_corr <= 0.0:
        raise ValueError(f"correction quadrature {corr.label} has zero variance")
    return covariance_between(S, base, corr) / var_corr


def _q_plus():
    return QuadratureCombination.normalized_pair(_Q, ModeId.SIGNAL, ModeId.IDLER, +1.0)


def _q_pump_diff(j: ModeId):
    # (q_j - q_0)/sqrt2
    return QuadratureCombination.normalized_pair(_Q, j, ModeId.PUMP, -1.0)


def beta_terms(S: SpectralCovariance):
    """Correction magnitudes (beta0, beta1, beta2).

    beta0 = (C_q0q1 + C_q0q2)^2 / (2 Var q0) reduces the twin phase sum;
    beta_j' = (C_q0qj' - C_qjqj')^2 / (2 Var qj') reduces the pump-twin
    phase difference of the pair that excludes beam j'.  Each equals the
    variance reduction achieved by the corresponding optimal alpha.
    """
    out = []
    for base, corr_mode in (
        (_q_plus(), ModeId.PUMP),          # beta0 corrects V0
        (_q_pump_diff(ModeId.IDLER), ModeId.SIGNAL),   # beta1 corrects V2
        (_q_pump_diff(ModeId.SIGNAL), ModeId.IDLER),   # beta2 corrects V1
    ):
        corr = QuadratureCombination.single(corr_mode, _Q)
        var_corr = combination_variance(S, corr)
        if var_corr <= 0.0:
            raise ValueError(f"phase quadrature {corr.label} has zero variance")
        cov = covariance_between(S, base, corr)
        out.append(cov * cov / var_corr)
    return tuple(out)


def _corrected_variance(S, base, corr_mode):
    """(variance, corrected variance, alpha, beta) for base minus optimal
    alpha times the correction phase quadrature."""
    alpha = optimal_alpha(S, base, corr_mode, _Q)
    var_base = combination_variance(S, base)
    corr = QuadratureCombination.single(corr_mode, _Q)
    beta = alpha * covariance_between(S, base, corr)
    return var_base, var_base - beta, alpha, beta


def tripartite_witnesses(S: SpectralCovariance) -> WitnessReport:
    """Evaluate the three inequalities with analytically optimal alphas.

    Works on partial covariances whenever the touched entries are present.
    The identities corrected = uncorrected - beta hold exactly by
    construction of the quadratic minimizer.
    """
    p_minus = QuadratureCombination.normalized_pair(_P, ModeId.SIGNAL, ModeId.IDLER, -1.0)
    var_p_minus = combination_variance(S, p_minus)
    var_q_plus, var_q_plus_corr, alpha0, beta0 = _corrected_variance(
        S, _q_plus(), ModeId.PUMP)
    v0 = var_p_minus + var_q_plus_corr

    p01 = QuadratureCombination.normalized_pair(_P, ModeId.PUMP, ModeId.SIGNAL, +1.0)
    var_p01 = combination_variance(S, p01)
    var_q01, var_q01_corr, alpha2, beta2 = _corrected_variance(
        S, _q_pump_diff(ModeId.SIGNAL), ModeId.IDLER)
    v1 = var_p01 + var_q01_corr

    p02 = QuadratureCombination.normalized_pair(_P, ModeId.PUMP, ModeId.IDLER, +1.0)
    var_p02 = combination_variance(S, p02)
    var_q02, var_q02_corr, alpha1, beta1 = _corrected_variance(
        S, _q_pump_diff(ModeId.IDLER), ModeId.SIGNAL)
    v2 = var_p02 + var_q02_corr

    violations = (v0 < VIOLATION_BOUND, v1 < VIOLATION_BOUND, v2 < VIOLATION_BOUND)
    terms = {
        "var_p_minus": var_p_minus,
        "var_q_plus": var_q_plus,
        "var_q_plus_corr": var_q_plus_corr,
        "var_p01": var_p01,
        "var_q01": var_q01,
        "var_q01_corr": var_q01_corr,
        "var_p02": var_p02,
        "var_q02": var_q02,
        "var_q02_corr": var_q02_corr,
        "beta0": beta0,
        "beta1": beta1,
        "beta2": beta2,
    }
    return WitnessReport(
        v0=v0, v1=v1, v2=v2, terms=terms,
        coefficients=WitnessCoefficients(alpha0, alpha1, alpha2),
        violations=violations,
        genuine_tripartite=sum(violations) >= 2,
    )


def bipartite_duan(S: SpectralCovariance, pair=(ModeId.SIGNAL, ModeId.IDLER)):
    """Duan-Simon sum for a beam pair (the alpha = 0 case).

    Twin pair: Var[(p1-p2)/sqrt2] + Var[(q1+q2)/sqrt2].  Pump-twin pair:
    Var[(p0+pj)/sqrt2] + Var[(qj-q0)/sqrt2].  Returns (value, entangled)
    with entangled true iff value < 2.
    """
    a, b = pair
    if a == b:
        raise ValueError("pair must name two distinct modes")
    if ModeId.PUMP in (a, b):
        j = b if a == ModeId.PUMP else a
        p_part = QuadratureCombination.normalized_pair(_P, ModeId.PUMP, j, +1.0)
        q_part = _q_pump_diff(j)
    else:
        p_part = QuadratureCombination.normalized_pair(_P, a, b, -1.0)
        q_part = QuadratureCombination.normalized_pair(_Q, a, b, +1.0)
    value = combination_variance(S, p_part) + combination_variance(S, q_part)
    return value, value < VIOLATION_BOUND
