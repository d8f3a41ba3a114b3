"""Transmission-eigenvalue ensembles and Haar averages.

Three scatterer families are supported through their large-N eigenvalue
densities on (0, 1]:

* single barrier: a point mass at the barrier transparency Gamma;
* double barrier: the bimodal density (N Gamma / 2 pi) T^(-3/2) (1-T)^(-1/2),
  peaked at both T ~ 0 and T = 1;
* diffusive medium: (N Gamma / 2) T^(-1) (1-T)^(-1/2), normalized so the
  mean transmission per mode is Gamma, which fixes the second-to-first
  moment ratio at 2/3.

The bimodal densities are not normalizable at T -> 0 (the divergence carries
the closed channels), so only moments with p >= 1 are meaningful.  The
sampler therefore draws from the restriction to [T_min, 1] with T_min chosen
so that the retained channel weight equals N; both restricted inverse CDFs
are analytic (an arcsin-type form for the double barrier, T = sech^2(x) with
uniform x for the diffusive law).  The truncation biases the first moment of
the double-barrier law downward by a relative 2 Gamma / pi^2; the diffusive
truncation bias is exponentially small.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn

from .core import EnsembleName, RegimeWarning, TransmissionSpec


class UnsupportedMoment(ValueError):
    """Requested spectral moment order is outside the implemented range."""


class ZeroMoment(ValueError):
    """A Haar-average formula was evaluated with a vanishing first moment."""


MAX_MOMENT = 4


@dataclass(frozen=True)
class EigenvalueDensity:
    """A named transmission-eigenvalue density with N channels."""

    name: EnsembleName
    n: int
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "name", EnsembleName(self.name))
        if self.n < 1:
            raise ValueError("channel count must be positive")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError(f"gamma={self.gamma} outside (0, 1]")

    @classmethod
    def from_spec(cls, t: TransmissionSpec) -> "EigenvalueDensity":
        if t.kind != "ensemble":
            raise ValueError("transmission spec does not name an ensemble")
        return cls(name=t.ensemble_name, n=t.n, gamma=t.gamma)

    # -- density and (truncated) CDF ------------------------------------------

    def density(self, T):
        """rho(T), the channel density per unit T (not defined for the point mass)."""
        T = np.asarray(T, dtype=float)
        if self.name is EnsembleName.DOUBLE_BARRIER:
            return self.n * self.gamma / (2 * np.pi) * T ** -1.5 * (1 - T) ** -0.5
        if self.name is EnsembleName.DIFFUSIVE:
            return self.n * self.gamma / 2 * T ** -1.0 * (1 - T) ** -0.5
        raise ValueError("single barrier is a point mass; it has no density")

    @property
    def t_min(self) -> float:
        """Lower edge of the sampled support: retained weight above it equals N."""
        if self.name is EnsembleName.DOUBLE_BARRIER:
            return self.gamma ** 2 / (self.gamma ** 2 + np.pi ** 2)
        if self.name is EnsembleName.DIFFUSIVE:
            return 1.0 / np.cosh(1.0 / self.gamma) ** 2
        return self.gamma

    def cdf(self, T):
        """CDF of a single sampled eigenvalue on [t_min, 1]."""
        T = np.asarray(T, dtype=float)
        if self.name is EnsembleName.DOUBLE_BARRIER:
            return 1.0 - (self.gamma / np.pi) * np.sqrt((1 - T) / T)
        if self.name is EnsembleName.DIFFUSIVE:
            return 1.0 - self.gamma * np.arctanh(np.sqrt(1 - T))
        return np.where(T >= self.gamma, 1.0, 0.0)

    def ppf(self, u):
        """Inverse of :meth:`cdf` (exact closed form)."""
        u = np.asarray(u, dtype=float)
        if self.name is EnsembleName.DOUBLE_BARRIER:
            return 1.0 / (1.0 + (np.pi * (1 - u) / self.gamma) ** 2)
        if self.name is EnsembleName.DIFFUSIVE:
            return 1.0 / np.cosh((1 - u) / self.gamma) ** 2
        return np.full_like(u, self.gamma)


def moments(d: EigenvalueDensity, p: int) -> float:
    """Spectral moment integral T^p rho(T) dT over (0, 1], in closed form.

    Double barrier: (N Gamma / 2 pi) * B(p - 1/2, 1/2); diffusive:
    (N Gamma / 2) * B(p, 1/2); single barrier: N Gamma^p.
    """
    if not (1 <= p <= MAX_MOMENT):
        raise UnsupportedMoment(f"moment order {p} outside [1, {MAX_MOMENT}]")
    if d.name is EnsembleName.SINGLE_BARRIER:
        return d.n * d.gamma ** p
    if d.name is EnsembleName.DOUBLE_BARRIER:
        return d.n * d.gamma / (2 * np.pi) * float(beta_fn(p - 0.5, 0.5))
    return d.n * d.gamma / 2 * float(beta_fn(p, 0.5))


def moment_ratio(d: EigenvalueDensity) -> float:
    """<T^2> / <T>, the geometry factor in the Fano formulas."""
    return moments(d, 2) / moments(d, 1)


def fano_bose(d: EigenvalueDensity, f: float) -> float:
    """Large-N bosonic Fano factor for a scalar occupation f."""
    return 1.0 + f * moment_ratio(d)


def fano_fermi(d: EigenvalueDensity) -> float:
    """Zero-temperature fermionic Fano factor of the same geometry."""
    return 1.0 - moment_ratio(d)


def sample_eigenvalues(d: EigenvalueDensity, rng: np.random.Generator) -> np.ndarray:
    """N i.i.d. draws from the (truncated, normalized) eigenvalue density.

    The double-barrier density is a large-N result valid for N >> 1/Gamma;
    a RegimeWarning is issued when N Gamma < 10.
    """
    if d.name is EnsembleName.DOUBLE_BARRIER and d.n * d.gamma < 10.0:
        warnings.warn(f"double-barrier density needs N >> 1/Gamma "
                      f"(N Gamma = {d.n * d.gamma:.2f})", RegimeWarning, stacklevel=2)
    if d.name is EnsembleName.SINGLE_BARRIER:
        return np.full(d.n, d.gamma)
    return d.ppf(rng.random(d.n))


def sample_haar_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary matrices via QR of a complex Ginibre matrix.

    The QR phase ambiguity is fixed by rescaling each column with the phase
    of the corresponding diagonal entry of R, which makes the distribution
    exactly Haar.  Returns shape (n, n), or (size, n, n) when size is given.
    """
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return q * phase[..., None, :]


# ---------------------------------------------------------------------------
# Haar-averaged Fano factor for non-scalar covariances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentSet:
    """Normalized spectral moments of a Hermitian matrix: Tr M^p / N."""

    mean: float
    second_moment: float

    @property
    def second_cumulant(self) -> float:
        return self.second_moment - self.mean ** 2

    @classmethod
    def from_values(cls, values) -> "MomentSet":
        v = np.asarray(values, dtype=float)
        return cls(mean=float(v.mean()), second_moment=float((v ** 2).mean()))

    @classmethod
    def from_matrix(cls, m) -> "MomentSet":
        m = np.asarray(m)
        n = m.shape[0]
        return cls(mean=float(np.trace(m).real) / n,
                   second_moment=float(np.trace(m @ m).real) / n)

    @classmethod
    def from_density(cls, d: EigenvalueDensity) -> "MomentSet":
        return cls(mean=moments(d, 1) / d.n, second_moment=moments(d, 2) / d.n)


def fano_haar(mu_moments: MomentSet, tau_moments: MomentSet) -> float:
    """Fano factor averaged over Haar-distributed transmission eigenvectors.

    Valid for N >> 1, where the ratio of the two Haar-averaged traces
    factorizes into normalized moments:

        1 + <mu><tau> + <mu> <<tau^2>> / <tau> + <tau> <<mu^2>> / <mu>.
    """
    if mu_moments.mean <= 0 or tau_moments.mean <= 0:
        raise ZeroMoment("both mean occupation and mean transmission must be positive")
    return (1.0
            + mu_moments.mean * tau_moments.mean
            + mu_moments.mean * tau_moments.second_cumulant / tau_moments.mean
            + tau_moments.mean * mu_moments.second_cumulant / mu_moments.mean)


def kappa_correction(mu_moments: MomentSet, gamma: float) -> float:
    """Non-scalar-source correction Gamma <<mu^2>> / <mu>^2."""
    if mu_moments.mean == 0:
        raise ZeroMoment("mean occupation vanishes")
    return gamma * mu_moments.second_cumulant / mu_moments.mean ** 2


def fano_haar_double_barrier(mu_moments: MomentSet, n: int, gamma: float) -> float:
    """Double-barrier specialization 1 + <mu>/2 * (1 + kappa).

    Algebraically identical to :func:`fano_haar` with the double-barrier
    tau moments (Gamma/2, Gamma/4).  The result is universal only for
    1 << Gamma N << N_c, with N_c the effective rank of the covariance;
    a RegimeWarning is issued outside that window.
    """
    k = kappa_correction(mu_moments, gamma)
    n_c = n * mu_moments.mean ** 2 / mu_moments.second_moment
    if not (3.0 <= gamma * n <= n_c / 3.0):
        warnings.warn(f"universality window 1 << Gamma N << N_c violated "
                      f"(Gamma N = {gamma * n:.2f}, N_c ~ {n_c:.1f})",
                      RegimeWarning, stacklevel=2)
    return 1.0 + 0.5 * mu_moments.mean * (1.0 + k)
