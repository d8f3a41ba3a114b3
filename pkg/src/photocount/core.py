"""Domain types and spectral reduction for photocount statistics.

A Gaussian (chaotic) source is fully characterized by its Hermitian,
positive-semidefinite mode covariance; a passive linear scatterer by its
transmission matrix, by the singular-value spectrum of that matrix, or by a
named random-matrix ensemble; the detector by the dimensionless number of
coherence cells it integrates over.  Every downstream quantity (generating
function, cumulants, count distribution) depends on the inputs only through
the eigenvalues of the Hermitian product ``t @ mu @ t^dag``, which this
module computes.

Note on notation: the coherence-cell count ``nu`` stems from counting time
times bandwidth over 2*pi; the letter t is reserved here for the
transmission matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Structural tolerances are fixed, not configurable, so that validation
# results are reproducible across machines and runs.
HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-10
PASSIVITY_TOL = 1e-10
SPECTRAL_SUM_TOL = 1e-8
PROFILE_SUM_TOL = 1e-12


class DimensionMismatch(ValueError):
    """Mode counts of the covariance and the transmission spec disagree."""


class NotHermitian(ValueError):
    """Covariance matrix is not Hermitian within tolerance."""


class NotPSD(ValueError):
    """Covariance (or reduced spectrum) has a significantly negative eigenvalue."""


class NotPassive(ValueError):
    """Transmission matrix amplifies: a singular value exceeds 1."""


class RegimeWarning(UserWarning):
    """A result is being used outside its stated validity regime."""


class EnsembleName(str, Enum):
    SINGLE_BARRIER = "single_barrier"
    DOUBLE_BARRIER = "double_barrier"
    DIFFUSIVE = "diffusive"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


# ---------------------------------------------------------------------------
# Source covariance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeCovariance:
    """Mode covariance of the Gaussian source.

    Either a scalar occupation ``f`` on ``n`` modes (thermal-like source,
    covariance ``f * I``) or an explicit ``n x n`` complex Hermitian PSD
    matrix.  Instances are immutable; validation is performed by
    :func:`validate` and by the operations that consume the covariance.
    """

    n: int
    f: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if (self.f is None) == (self.matrix is None):
            raise ValueError("exactly one of f (scalar) or matrix must be given")
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatch(f"covariance must be square, got {m.shape}")
            object.__setattr__(self, "matrix", _readonly(m))
            object.__setattr__(self, "n", m.shape[0])
        else:
            if self.n < 1:
                raise ValueError("mode count must be positive")
            object.__setattr__(self, "f", float(self.f))

    @classmethod
    def scalar(cls, f: float, n: int) -> "ModeCovariance":
        return cls(n=n, f=f)

    @classmethod
    def from_matrix(cls, mu) -> "ModeCovariance":
        mu = np.asarray(mu, dtype=complex)
        return cls(n=mu.shape[0] if mu.ndim == 2 else 0, matrix=mu)

    @property
    def is_scalar(self) -> bool:
        return self.f is not None

    def dense(self) -> np.ndarray:
        if self.is_scalar:
            return self.f * np.eye(self.n, dtype=complex)
        return np.asarray(self.matrix)

    def trace(self) -> float:
        if self.is_scalar:
            return self.f * self.n
        return float(np.trace(self.matrix).real)


def _hermiticity_defect(m: np.ndarray) -> float:
    scale = np.abs(m).max()
    if scale == 0.0:
        return 0.0
    return np.abs(m - m.conj().T).max() / scale


def _min_eig_relative(m: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix, relative to the largest."""
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    top = max(w.max(), 0.0)
    if top == 0.0:
        return float(w.min())
    return float(w.min() / top)


# ---------------------------------------------------------------------------
# Scatterer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransmissionSpec:
    """The scatterer: explicit matrix, explicit eigenvalues, or ensemble.

    ``matrix`` is the M x N transmission matrix t (passive: singular values
    at most 1).  ``eigenvalues`` are the transmission eigenvalues, i.e. the
    spectrum of t^dag t, each in [0, 1]; when combined with a matrix-valued
    covariance they are taken in the covariance input basis.  ``ensemble``
    refers the resolution to the ensembles module.
    """

    kind: str
    matrix: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    ensemble_name: EnsembleName | None = None
    n: int | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind == "matrix":
            t = np.asarray(self.matrix, dtype=complex)
            if t.ndim != 2:
                raise DimensionMismatch(f"transmission matrix must be 2-d, got {t.shape}")
            object.__setattr__(self, "matrix", _readonly(t))
        elif self.kind == "eigenvalues":
            ev = np.asarray(self.eigenvalues, dtype=float).ravel()
            object.__setattr__(self, "eigenvalues", _readonly(ev))
        elif self.kind == "ensemble":
            if self.ensemble_name is None or self.n is None or self.gamma is None:
                raise ValueError("ensemble spec needs name, n and gamma")
            object.__setattr__(self, "ensemble_name", EnsembleName(self.ensemble_name))
        else:
            raise ValueError(f"unknown transmission kind {self.kind!r}")

    @classmethod
    def from_matrix(cls, t) -> "TransmissionSpec":
        return cls(kind="matrix", matrix=t)

    @classmethod
    def from_eigenvalues(cls, values) -> "TransmissionSpec":
        return cls(kind="eigenvalues", eigenvalues=values)

    @classmethod
    def from_ensemble(cls, name, n: int, gamma: float) -> "TransmissionSpec":
        return cls(kind="ensemble", ensemble_name=EnsembleName(name), n=n, gamma=gamma)

    @property
    def mode_count(self) -> int:
        if self.kind == "matrix":
            return self.matrix.shape[1]
        if self.kind == "eigenvalues":
            return self.eigenvalues.size
        return self.n


# ---------------------------------------------------------------------------
# Counting window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountingWindow:
    """Dimensionless coherence-cell count, optionally frequency resolved.

    ``nu`` equals counting time times bandwidth over 2*pi.  A broadband
    detector is described by a profile of (cell weight, occupation) pairs
    whose weights must sum to ``nu``.
    """

    nu: float
    profile: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "nu", float(self.nu))
        if self.profile is not None:
            prof = tuple((float(w), float(occ)) for w, occ in self.profile)
            object.__setattr__(self, "profile", prof)


# ---------------------------------------------------------------------------
# Spectral reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues of t @ mu @ t^dag, sorted descending, clamped to >= 0."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, float)))

    @classmethod
    def from_values(cls, values) -> "SpectralData":
        """Build from raw eigenvalues, applying the standard sort and clamp."""
        v = np.sort(np.asarray(values, dtype=float).ravel())[::-1]
        top = v[0] if v.size else 0.0
        if v.size and v[-1] < -PSD_TOL * max(top, 0.0):
            raise NotPSD(f"eigenvalue {v[-1]:.3e} below -{PSD_TOL:.0e} * max")
        return cls(values=np.clip(v, 0.0, None))

    @property
    def lambda_max(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def __len__(self) -> int:
        return self.values.size


def reduce_to_spectrum(mu: ModeCovariance, t: TransmissionSpec) -> SpectralData:
    """Eigenvalues of the transmitted covariance t @ mu @ t^dag.

    The Hermitian product t mu t^dag is diagonalized (never the similar but
    non-Hermitian mu t^dag t) so a symmetric eigensolver guarantees a real
    spectrum.  For a scalar covariance with eigenvalue-specified scatterer
    the result is simply f * T_n.

    Raises DimensionMismatch, NotHermitian, NotPSD or NotPassive on invalid
    inputs; ensemble-kind scatterers must be resolved to eigenvalues first.
    """
    if t.kind == "ensemble":
        raise ValueError("ensemble scatterer must be resolved to eigenvalues first "
                         "(see photocount.ensembles.sample_eigenvalues)")

    if t.mode_count != mu.n:
        raise DimensionMismatch(
            f"covariance has {mu.n} modes but scatterer expects {t.mode_count}")

    if not mu.is_scalar:
        defect = _hermiticity_defect(np.asarray(mu.matrix))
        if defect > HERMITICITY_TOL:
            raise NotHermitian(f"hermiticity defect {defect:.3e} > {HERMITICITY_TOL:.0e}")
        if _min_eig_relative(np.asarray(mu.matrix)) < -PSD_TOL:
            raise NotPSD("covariance has a significantly negative eigenvalue")
    elif mu.f < 0:
        raise NotPSD(f"scalar occupation {mu.f} is negative")

    if t.kind == "matrix":
        sv = np.linalg.svd(t.matrix, compute_uv=False)
        if sv.size and sv.max() > 1.0 + PASSIVITY_TOL:
            raise NotPassive(f"largest singular value {sv.max():.12f} exceeds 1")
    else:
        ev = np.asarray(t.eigenvalues)
        if ev.size and (ev.min() < -PASSIVITY_TOL or ev.max() > 1.0 + PASSIVITY_TOL):
            raise NotPassive("transmission eigenvalues must lie in [0, 1]")

    if mu.is_scalar and t.kind == "eigenvalues":
        lam = mu.f * np.clip(t.eigenvalues, 0.0, 1.0)
    elif mu.is_scalar:
        lam = mu.f * np.linalg.eigvalsh(t.matrix @ t.matrix.conj().T)
    elif t.kind == "eigenvalues":
        root = np.sqrt(np.clip(t.eigenvalues, 0.0, 1.0))
        prod = root[:, None] * np.asarray(mu.matrix) * root[None, :]
        lam = np.linalg.eigvalsh(prod)
    else:
        prod = t.matrix @ np.asarray(mu.matrix) @ t.matrix.conj().T
        lam = np.linalg.eigvalsh(0.5 * (prod + prod.conj().T))

    return SpectralData.from_values(lam)


def transmitted_trace(mu: ModeCovariance, t: TransmissionSpec) -> float:
    """Tr(mu t^dag t), the mean transmitted intensity per coherence cell."""
    if t.kind == "ensemble":
        raise ValueError("ensemble scatterer has no fixed trace; resolve it first")
    if t.kind == "eigenvalues":
        ev = np.asarray(t.eigenvalues)
        if mu.is_scalar:
            return float(mu.f * ev.sum())
        return float((ev * np.diag(np.asarray(mu.matrix)).real).sum())
    ttdag = t.matrix.conj().T @ t.matrix
    return float(np.trace(np.asarray(mu.dense()) @ ttdag).real)


# ---------------------------------------------------------------------------
# Report-valued validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    location: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{v.code} at {v.location}: {v.detail}" for v in self.violations)


def validate(mu: ModeCovariance, t: TransmissionSpec,
             window: CountingWindow | None = None) -> ValidationReport:
    """Check every structural invariant; an empty report means valid."""
    found: list[Violation] = []

    if not mu.is_scalar:
        defect = _hermiticity_defect(np.asarray(mu.matrix))
        if defect > HERMITICITY_TOL:
            found.append(Violation("NotHermitian", "mu",
                                   f"relative defect {defect:.3e}"))
        else:
            rel = _min_eig_relative(np.asarray(mu.matrix))
            if rel < -PSD_TOL:
                found.append(Violation("NotPSD", "mu",
                                       f"min eigenvalue {rel:.3e} of max"))
    elif mu.f < 0:
        found.append(Violation("NotPSD", "mu", f"scalar occupation {mu.f} < 0"))

    if t.kind == "matrix":
        if t.matrix.shape[1] != mu.n:
            found.append(Violation("DimensionMismatch", "t",
                                   f"{t.matrix.shape} vs {mu.n} modes"))
        sv = np.linalg.svd(t.matrix, compute_uv=False)
        if sv.size and sv.max() > 1.0 + PASSIVITY_TOL:
            found.append(Violation("NotPassive", "t",
                                   f"max singular value {sv.max():.12f}"))
    elif t.kind == "eigenvalues":
        ev = np.asarray(t.eigenvalues)
        if ev.size != mu.n:
            found.append(Violation("DimensionMismatch", "t",
                                   f"{ev.size} eigenvalues vs {mu.n} modes"))
        if ev.size and (ev.min() < -PASSIVITY_TOL or ev.max() > 1.0 + PASSIVITY_TOL):
            found.append(Violation("NotPassive", "t",
                                   f"eigenvalues span [{ev.min():.3e}, {ev.max():.3e}]"))
    else:
        if t.n != mu.n:
            found.append(Violation("DimensionMismatch", "t",
                                   f"ensemble n={t.n} vs {mu.n} modes"))
        if not (0.0 < t.gamma <= 1.0):
            found.append(Violation("BadEnsemble", "t", f"gamma={t.gamma} outside (0, 1]"))

    if window is not None:
        if not window.nu > 0:
            found.append(Violation("BadWindow", "window", f"nu={window.nu} must be > 0"))
        if window.profile is not None:
            weights = np.array([w for w, _ in window.profile])
            occs = np.array([occ for _, occ in window.profile])
            if weights.size == 0:
                found.append(Violation("BadProfile", "window.profile", "empty"))
            else:
                if (weights <= 0).any():
                    found.append(Violation("BadProfile", "window.profile",
                                           "nonpositive cell weight"))
                if (occs < 0).any():
                    found.append(Violation("BadProfile", "window.profile",
                                           "negative occupation"))
                total = weights.sum()
                if abs(total - window.nu) > PROFILE_SUM_TOL * max(abs(window.nu), 1.0):
                    found.append(Violation("BadProfile", "window.profile",
                                           f"weights sum to {total!r}, nu={window.nu!r}"))

    return ValidationReport(violations=tuple(found))


# ---------------------------------------------------------------------------
# JSON schema (complex matrices as separate re/im row-major arrays)
# ---------------------------------------------------------------------------

def _require_keys(obj: dict, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown field(s) {sorted(extra)} in {where}")


def _matrix_from_json(obj: dict, where: str) -> np.ndarray:
    _require_keys(obj, {"re", "im"}, where)
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ValueError(f"re/im shapes differ in {where}")
    return re + 1j * im


def _matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def mode_covariance_from_json(obj: dict) -> ModeCovariance:
    _require_keys(obj, {"scalar", "matrix"}, "mu")
    if ("scalar" in obj) == ("matrix" in obj):
        raise ValueError("mu must have exactly one of 'scalar' or 'matrix'")
    if "scalar" in obj:
        sc = obj["scalar"]
        _require_keys(sc, {"f", "n"}, "mu.scalar")
        return ModeCovariance.scalar(float(sc["f"]), int(sc["n"]))
    return ModeCovariance.from_matrix(_matrix_from_json(obj["matrix"], "mu.matrix"))


def mode_covariance_to_json(mu: ModeCovariance) -> dict:
    if mu.is_scalar:
        return {"scalar": {"f": mu.f, "n": mu.n}}
    return {"matrix": _matrix_to_json(mu.matrix)}


def transmission_from_json(obj: dict) -> TransmissionSpec:
    _require_keys(obj, {"matrix", "eigenvalues", "ensemble"}, "t")
    if sum(k in obj for k in ("matrix", "eigenvalues", "ensemble")) != 1:
        raise ValueError("t must have exactly one of 'matrix', 'eigenvalues', 'ensemble'")
    if "matrix" in obj:
        return TransmissionSpec.from_matrix(_matrix_from_json(obj["matrix"], "t.matrix"))
    if "eigenvalues" in obj:
        return TransmissionSpec.from_eigenvalues([float(x) for x in obj["eigenvalues"]])
    ens = obj["ensemble"]
    _require_keys(ens, {"name", "n", "gamma"}, "t.ensemble")
    return TransmissionSpec.from_ensemble(ens["name"], int(ens["n"]), float(ens["gamma"]))


def transmission_to_json(t: TransmissionSpec) -> dict:
    if t.kind == "matrix":
        return {"matrix": _matrix_to_json(t.matrix)}
    if t.kind == "eigenvalues":
        return {"eigenvalues": np.asarray(t.eigenvalues).tolist()}
    return {"ensemble": {"name": t.ensemble_name.value, "n": t.n, "gamma": t.gamma}}


def window_from_json(obj: dict) -> CountingWindow:
    _require_keys(obj, {"nu", "profile"}, "window")
    profile = None
    if obj.get("profile") is not None:
        profile = tuple((float(p[0]), float(p[1])) for p in obj["profile"])
    return CountingWindow(nu=float(obj["nu"]), profile=profile)


def window_to_json(window: CountingWindow) -> dict:
    out: dict = {"nu": window.nu}
    if window.profile is not None:
        out["profile"] = [[w, occ] for w, occ in window.profile]
    return out
