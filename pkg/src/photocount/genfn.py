"""Cumulant generating function of the count distribution.

For a Gaussian source reduced to the spectrum ``lam`` of t mu t^dag and a
window of ``nu`` coherence cells, the generating function of the photocount
distribution is

    F(xi) = -nu * sum_k ln(1 - (e^xi - 1) lam_k)            (bosons)

with a sign-flipped fermionic counterpart (lam_k then plays the role of a
transmission eigenvalue in [0, 1] and nu that of the attempt count)

    F(xi) = +nu * sum_k ln(1 + (e^xi - 1) lam_k).

The bosonic F is finite and convex for xi < xi_max = ln(1 + 1/lam_max) and
analytic in the strip Re xi < xi_max, which is what the count-distribution
inversion in :mod:`photocount.pmf` relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import SpectralData


class OutOfDomain(ValueError):
    """Generating-function argument at or beyond the convergence boundary."""


class EmptyProfile(ValueError):
    """Broadband profile contains no cells."""


class ZeroMean(ValueError):
    """Broadband profile has zero mean occupation."""


class Statistics(str, Enum):
    BOSE = "bose"
    FERMI = "fermi"


def _clog1p(z: np.ndarray) -> np.ndarray:
    """log(1+z) for complex z, accurate for |z| << 1.

    numpy's log1p loses relative accuracy for tiny complex arguments, so we
    apply the standard correction log(w) * z / (w - 1) with w = 1 + z.
    """
    z = np.asarray(z, dtype=complex)
    w = 1.0 + z
    mask = w != 1.0
    safe_w = np.where(mask, w, 2.0)
    return np.where(mask, np.log(safe_w) * (z / (safe_w - 1.0)), z)


def _cexpm1(z: np.ndarray) -> np.ndarray:
    """exp(z) - 1 for complex z without cancellation near 0."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    return np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2 + 1j * np.exp(x) * np.sin(y)


@dataclass(frozen=True)
class CumulantSummary:
    """First three cumulants of the count distribution plus the Fano factor."""

    mean: float
    variance: float
    fano: float
    third_cumulant: float


@dataclass(frozen=True)
class GeneratingFunction:
    """Evaluable cumulant generating function over a fixed spectrum.

    All methods are pure; instances are safe to share across threads.
    """

    spectrum: SpectralData
    nu: float
    statistics: Statistics = Statistics.BOSE

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError(f"nu={self.nu} must be positive")
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        lam = self.spectrum.values
        if self.statistics is Statistics.FERMI and lam.size and lam.max() > 1.0 + 1e-10:
            raise ValueError("fermionic mode requires transmission eigenvalues in [0, 1]")

    # -- convergence boundary ------------------------------------------------

    @property
    def xi_max(self) -> float:
        """Supremum of the real convergence domain (bosons); inf for fermions."""
        lmax = self.spectrum.lambda_max
        if self.statistics is Statistics.FERMI or lmax == 0.0:
            return math.inf
        return math.log1p(1.0 / lmax)

    @property
    def _sign(self) -> float:
        return -1.0 if self.statistics is Statistics.BOSE else 1.0

    # -- evaluation ----------------------------------------------------------

    def eval_real(self, xi):
        """F(xi) on the real axis.  Raises OutOfDomain at or beyond xi_max."""
        xi = np.asarray(xi, dtype=float)
        if self.statistics is Statistics.BOSE and np.any(xi >= self.xi_max):
            raise OutOfDomain(f"xi >= xi_max = {self.xi_max!r}")
        lam = self.spectrum.values
        u = np.expm1(xi)
        terms = np.log1p(self._sign * np.multiply.outer(u, lam))
        out = self._sign * self.nu * np.sum(terms, axis=-1)
        return out if out.ndim else float(out)

    def eval_imag(self, theta):
        """F(i theta); exp of it is the characteristic function, modulus <= 1."""
        return self.eval_complex(1j * np.asarray(theta, dtype=float))

    def eval_complex(self, zeta):
        """F on the strip Re zeta < xi_max (principal log branch is safe there)."""
        zeta = np.asarray(zeta, dtype=complex)
        if self.statistics is Statistics.BOSE and np.any(zeta.real >= self.xi_max):
            raise OutOfDomain(f"Re zeta >= xi_max = {self.xi_max!r}")
        lam = self.spectrum.values
        u = _cexpm1(zeta)
        terms = _clog1p(self._sign * np.multiply.outer(u, lam))
        out = self._sign * self.nu * np.sum(terms, axis=-1)
        return out if out.ndim else complex(out)

    def derivative(self, xi: float, order: int = 1) -> float:
        """Analytic d^order F / d xi^order at real xi, for order in {1, 2}."""
        lam = self.spectrum.values
        u = np.expm1(xi)
        g = lam * np.exp(xi) / (1.0 + self._sign * u * lam)
        if order == 1:
            return float(self.nu * np.sum(g))
        if order == 2:
            return float(self.nu * np.sum(g - self._sign * g * g))
        raise ValueError("only first and second derivatives are provided analytically")

    def log_prob_zero(self) -> float:
        """log P(0), the xi -> -inf limit of F (exact closed form)."""
        lam = self.spectrum.values
        if self.statistics is Statistics.FERMI:
            with np.errstate(divide="ignore"):
                return float(self.nu * np.sum(np.log1p(-lam)))
        return float(-self.nu * np.sum(np.log1p(lam)))

    # -- cumulants -----------------------------------------------------------

    def cumulants(self) -> CumulantSummary:
        """Mean, variance, Fano factor and third cumulant in closed form.

        Bosons: kappa_2 = nu sum(lam + lam^2), kappa_3 = nu sum(lam + 3 lam^2
        + 2 lam^3); fermions flip the sign of the even-power terms.  The Fano
        factor of the vacuum is defined as 1 (the joint limit of both
        statistics).
        """
        lam = self.spectrum.values
        s = self._sign
        mean = self.nu * float(np.sum(lam))
        variance = self.nu * float(np.sum(lam - s * lam ** 2))
        third = self.nu * float(np.sum(lam - 3 * s * lam ** 2 + 2 * lam ** 3))
        fano = 1.0 if mean == 0.0 else variance / mean
        return CumulantSummary(mean=mean, variance=variance, fano=fano,
                               third_cumulant=third)


def fano_broadband(profile, coefficient: float) -> float:
    """Fano factor for a broadband detector over a discretized profile.

    ``profile`` is a sequence of (cell weight, occupation) pairs;
    ``coefficient`` is the geometry constant (1/2 for the double barrier,
    2/3 for a diffusive medium).  Returns
    1 + coefficient * sum(w f^2) / sum(w f).
    """
    prof = list(profile)
    if not prof:
        raise EmptyProfile("broadband profile is empty")
    w = np.array([p[0] for p in prof], dtype=float)
    occ = np.array([p[1] for p in prof], dtype=float)
    denom = float(np.sum(w * occ))
    if denom == 0.0:
        raise ZeroMean("profile mean occupation is zero")
    return 1.0 + coefficient * float(np.sum(w * occ ** 2)) / denom


def lorentzian_profile(f_max: float, nu: float, points: int = 20001,
                       span_half_widths: float = 100.0):
    """Uniformly discretized Lorentzian occupation profile.

    The occupation f(x) = f_max / (1 + x^2) is sampled on ``points`` equally
    spaced frequencies over +-``span_half_widths`` half-widths; each sample
    carries an equal share of the total cell count ``nu``.  The finite span
    biases the broadband Fano factor upward by about f_max/(200*pi) at the
    default span, which caps the accuracy of the 1 + f_max/4 limit near 1e-3.
    """
    if points < 2:
        raise ValueError("need at least two grid points")
    x = np.linspace(-span_half_widths, span_half_widths, points)
    occ = f_max / (1.0 + x * x)
    w = np.full(points, nu / points)
    return list(zip(w.tolist(), occ.tolist()))
