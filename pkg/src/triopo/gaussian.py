"""Quadrature covariance algebra for the three-mode (pump, signal, idler) system.

All noise quantities are spectral variances normalized to the standard quantum
limit: the vacuum covariance is the 6x6 identity.  The quadrature basis is
(p0, q0, p1, q1, p2, q2) with p the amplitude and q the phase quadrature, and
mode indices 0, 1, 2 for pump, signal and idler.  Mean-field phases are fixed
to zero: every beam is referenced to its own carrier, as in self-homodyne
detection.

Commutator convention: [a, a_dag] = 1 and p = a + a_dag, q = -i(a - a_dag),
so [p, q] = 2i and the symplectic form has entries +/-2.  A covariance S is
physical iff S + (i/2)*SYMPLECTIC_FORM is positive semidefinite; the vacuum
saturates this bound with eigenvalues {0, 2}.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Mapping

import numpy as np

N_MODES = 3
DIM = 2 * N_MODES

#: basis labels, fixed ordering
BASIS = ("p0", "q0", "p1", "q1", "p2", "q2")

#: eigenvalue tolerance for the uncertainty test (matrices are O(1) by SQL scaling)
PHYSICALITY_TOL = 1e-9

#: symplectic form in the (p,q)-interleaved basis, [x_i, x_j] = i * SYMPLECTIC_FORM[i,j]
SYMPLECTIC_FORM = np.kron(np.eye(N_MODES), np.array([[0.0, 2.0], [-2.0, 0.0]]))
SYMPLECTIC_FORM.setflags(write=False)


class ModeId(IntEnum):
    """Field index: 0 pump, 1 signal, 2 idler."""

    PUMP = 0
    SIGNAL = 1
    IDLER = 2


class QuadratureAxis(Enum):
    """Amplitude (P) or phase (Q) quadrature."""

    P = "p"
    Q = "q"


def basis_index(mode: ModeId, axis: QuadratureAxis) -> int:
    """Position of a single quadrature in the 6-vector basis."""
    return 2 * int(mode) + (0 if axis is QuadratureAxis.P else 1)


def basis_label(mode: ModeId, axis: QuadratureAxis) -> str:
    return f"{axis.value}{int(mode)}"


class IncompleteCovarianceError(ValueError):
    """A needed covariance entry is undetermined."""


class InconsistentTermsError(ValueError):
    """Measurement terms over-determine an entry with conflicting values."""


class PhysicalityError(RuntimeError):
    """A covariance matrix violates the uncertainty principle."""


def _symmetric_nan_aware(m: np.ndarray) -> bool:
    a, b = m, m.T
    both = ~np.isnan(a) & ~np.isnan(b)
    if not np.array_equal(np.isnan(a), np.isnan(b)):
        return False
    return bool(np.all(a[both] == b[both]))


@dataclass(frozen=True)
class SpectralCovariance:
    """Symmetric 6x6 matrix of SQL-normalized quadrature noise spectra.

    Entries may be NaN: the matrix is then *partial* and only operations
    touching determined entries are allowed.  Instances are immutable.
    """

    entries: np.ndarray
    analysis_frequency: float = 0.0

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.shape != (DIM, DIM):
            raise ValueError(f"covariance must be {DIM}x{DIM}, got {m.shape}")
        if not _symmetric_nan_aware(m):
            raise ValueError("covariance must be symmetric as stored")
        d = np.diag(m)
        # >= 0 rather than > 0: the degenerate all-zero matrix is admitted as a
        # test-only record source; physical matrices always have diagonals >= 1
        if np.any(d[~np.isnan(d)] < 0):
            raise ValueError("determined diagonal entries must be non-negative")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def vacuum(cls, analysis_frequency: float = 0.0) -> "SpectralCovariance":
        return cls(np.eye(DIM), analysis_frequency)

    @property
    def known(self) -> np.ndarray:
        """Boolean mask of determined entries."""
        return ~np.isnan(self.entries)

    def is_complete(self) -> bool:
        return bool(self.known.all())

    def entry(self, row: str, col: str) -> float:
        i, j = BASIS.index(row), BASIS.index(col)
        v = self.entries[i, j]
        if np.isnan(v):
            raise IncompleteCovarianceError(f"entry ({row},{col}) is undetermined")
        return float(v)

    def with_frequency(self, analysis_frequency: float) -> "SpectralCovariance":
        return SpectralCovariance(self.entries.copy(), analysis_frequency)

    def to_csv(self, path) -> None:
        """Write the matrix with a `# analysis_frequency_hz=` metadata line."""
        lines = [f"# analysis_frequency_hz={self.analysis_frequency!r}",
                 ",".join(BASIS)]
        for row in self.entries:
            lines.append(",".join(repr(float(v)) for v in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SpectralCovariance":
        freq = 0.0
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line.lstrip("# ").partition("=")
                    if key == "analysis_frequency_hz":
                        freq = float(val)
                    continue
                if line.split(",")[0] == BASIS[0]:
                    continue  # header
                rows.append([float(v) for v in line.split(",")])
        return cls(np.array(rows), freq)


@dataclass(frozen=True)
class QuadratureCombination:
    """Real linear combination of the six quadratures.

    `coefficients` are the effective weights.  Internally a combination may
    carry an exact factorization (integer weights plus a variance multiplier)
    so that e.g. the vacuum variance of (x1 + x2)/sqrt(2) evaluates to
    exactly 1.0 instead of picking up 1/sqrt(2) rounding; the strict `< 2`
    witness verdicts rely on this.
    """

    coefficients: np.ndarray
    label: str = ""
    quad_weights: np.ndarray = None      # exact weights; variance = scale * w S w
    quad_scale: float = 1.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (DIM,):
            raise ValueError(f"combination must have {DIM} coefficients")
        if not np.all(np.isfinite(c)):
            raise ValueError("combination coefficients must be finite")
        if np.all(c == 0):
            raise ValueError("combination must not be all-zero")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        w = self.quad_weights
        w = c if w is None else np.array(w, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "quad_weights", w)
        if self.quad_scale <= 0:
            raise ValueError("variance scale must be positive")

    @classmethod
    def single(cls, mode: ModeId, axis: QuadratureAxis) -> "QuadratureCombination":
        c = np.zeros(DIM)
        c[basis_index(mode, axis)] = 1.0
        return cls(c, basis_label(mode, axis))

    @classmethod
    def normalized_pair(cls, axis: QuadratureAxis, mode_a: ModeId, mode_b: ModeId,
                        sign: float) -> "QuadratureCombination":
        """(x_a + sign * x_b) / sqrt(2) on the given axis."""
        w = np.zeros(DIM)
        w[basis_index(mode_a, axis)] = 1.0
        w[basis_index(mode_b, axis)] = sign
        op = "+" if sign > 0 else "-"
        return cls(w / np.sqrt(2.0),
                   f"({basis_label(mode_a, axis)}{op}{basis_label(mode_b, axis)})/sqrt2",
                   quad_weights=w, quad_scale=0.5)

    def minus(self, alpha: float, other: "QuadratureCombination") -> "QuadratureCombination":
        return QuadratureCombination(self.coefficients - alpha * other.coefficients,
                                     f"{self.label}-{alpha:g}*{other.label}")


def combination_variance(S: SpectralCovariance, combo: QuadratureCombination) -> float:
    """Variance c^T S c of a quadrature combination.

    Only entries multiplied by nonzero coefficients need to be determined,
    so partial covariances work whenever they carry the touched entries.
    """
    w = combo.quad_weights
    active = np.nonzero(w)[0]
    sub = S.entries[np.ix_(active, active)]
    if np.isnan(sub).any():
        i, j = np.argwhere(np.isnan(sub))[0]
        raise IncompleteCovarianceError(
            f"entry ({BASIS[active[i]]},{BASIS[active[j]]}) is undetermined")
    return float(combo.quad_scale * (w[active] @ sub @ w[active]))


def covariance_between(S: SpectralCovariance, a: QuadratureCombination,
                       b: QuadratureCombination) -> float:
    """Cross covariance a^T S b on the determined entries."""
    wa, wb = a.quad_weights, b.quad_weights
    rows, cols = np.nonzero(wa)[0], np.nonzero(wb)[0]
    sub = S.entries[np.ix_(rows, cols)]
    if np.isnan(sub).any():
        i, j = np.argwhere(np.isnan(sub))[0]
        raise IncompleteCovarianceError(
            f"entry ({BASIS[rows[i]]},{BASIS[cols[j]]}) is undetermined")
    scale = np.sqrt(a.quad_scale * b.quad_scale)
    return float(scale * (wa[rows] @ sub @ wb[cols]))


def validate_physicality(S: SpectralCovariance, tol: float = PHYSICALITY_TOL):
    """Uncertainty-principle test.

    Returns (is_physical, worst_eigenvalue) where worst_eigenvalue is the
    minimum eigenvalue of S + (i/2)*SYMPLECTIC_FORM.  Diagnostic only: never
    raises for an unphysical matrix.
    """
    if not S.is_complete():
        raise IncompleteCovarianceError("physicality test needs a complete matrix")
    test = S.entries + 0.5j * SYMPLECTIC_FORM
    worst = float(np.linalg.eigvalsh(test).min())
    return worst >= -tol, worst


def require_physical(S: SpectralCovariance, tol: float = PHYSICALITY_TOL) -> None:
    ok, worst = validate_physicality(S, tol)
    if not ok:
        raise PhysicalityError(
            f"covariance violates the uncertainty principle (worst eigenvalue {worst:.3e})")


# ---------------------------------------------------------------------------
# reconstruction from named measured terms
# ---------------------------------------------------------------------------

_SQRT2 = np.sqrt(2.0)


def _combination_rules():
    """Measured-combination vocabulary.

    Each rule maps a term name to (i, j, di, dj, solver) where the term
    determines entry (i, j) given diagonals (di, dj):
        value = a*S[di,di] + b*S[dj,dj] + w*S[i,j]  ->  S[i,j].
    """
    rules = {}

    def add(name, li, lj, w):
        i, j = BASIS.index(li), BASIS.index(lj)
        rules[name] = (i, j, w)

    # (x1 -+ x2)/sqrt2 twin combinations: var = (d1+d2)/2 +- C
    add("var_p_minus", "p1", "p2", -1.0)
    add("var_p_plus", "p1", "p2", +1.0)
    add("var_q_plus", "q1", "q2", +1.0)
    add("var_q_minus", "q1", "q2", -1.0)
    # (p0 + pj)/sqrt2 pump-twin sums
    add("var_p01", "p0", "p1", +1.0)
    add("var_p02", "p0", "p2", +1.0)
    # (qj - q0)/sqrt2 pump-twin differences
    add("var_q01", "q0", "q1", -1.0)
    add("var_q02", "q0", "q2", -1.0)
    return rules


_COMBO_RULES = _combination_rules()


def reconstruct_from_measurements(terms: Mapping[str, float],
                                  analysis_frequency: float = 0.0
                                  ) -> SpectralCovariance:
    """Assemble a (possibly partial) covariance from named measured terms.

    Accepted names: diagonal variances `var_p0` .. `var_q2`; direct
    correlations `C_p0p1`, `C_q1q2`, ...; and the measured two-beam
    combinations `var_p_minus`, `var_p_plus`, `var_q_plus`, `var_q_minus`
    (twin sum/difference), `var_p01`, `var_p02` (pump-twin amplitude sums)
    and `var_q01`, `var_q02` (twin-minus-pump phase differences), each of
    which determines one off-diagonal entry once both diagonals are given.

    Undetermined entries stay NaN.  Determining an entry twice with
    conflicting values raises InconsistentTermsError; a fully determined
    result is checked for physicality.
    """
    m = np.full((DIM, DIM), np.nan)
    origin = {}

    def set_entry(i, j, value, name):
        prev = m[i, j]
        if not np.isnan(prev):
            if abs(prev - value) > 1e-9:
                raise InconsistentTermsError(
                    f"entry ({BASIS[i]},{BASIS[j]}) set to {prev!r} by "
                    f"{origin[i, j]!r} but {value!r} by {name!r}")
            return
        m[i, j] = m[j, i] = value
        origin[i, j] = origin[j, i] = name

    deferred = []
    for name, value in terms.items():
        if name.startswith("var_") and name[4:] in BASIS:
            k = BASIS.index(name[4:])
            set_entry(k, k, float(value), name)
        elif name.startswith("C_") and len(name) == 6 and name[2:4] in BASIS and name[4:6] in BASIS:
            set_entry(BASIS.index(name[2:4]), BASIS.index(name[4:6]), float(value), name)
        elif name in _COMBO_RULES:
            deferred.append((name, float(value)))
        else:
            raise ValueError(f"unknown measurement term {name!r}")

    for name, value in deferred:
        i, j, w = _COMBO_RULES[name]
        if np.isnan(m[i, i]) or np.isnan(m[j, j]):
            raise IncompleteCovarianceError(
                f"{name!r} needs diagonals ({BASIS[i]},{BASIS[j]}) to be given")
        # value = (Sii + Sjj)/2 + w*Sij
        set_entry(i, j, (value - 0.5 * (m[i, i] + m[j, j])) / w, name)

    S = SpectralCovariance(m, analysis_frequency)
    if S.is_complete():
        require_physical(S)
    return S


def extract_terms(S: SpectralCovariance) -> dict:
    """Full 21-term dict (diagonals + direct correlations) that round-trips
    through reconstruct_from_measurements."""
    out = {}
    for i in range(DIM):
        if not np.isnan(S.entries[i, i]):
            out[f"var_{BASIS[i]}"] = float(S.entries[i, i])
    for i in range(DIM):
        for j in range(i + 1, DIM):
            if not np.isnan(S.entries[i, j]):
                out[f"C_{BASIS[i]}{BASIS[j]}"] = float(S.entries[i, j])
    return out
