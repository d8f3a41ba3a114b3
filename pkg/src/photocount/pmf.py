"""Count distributions: exact inversion, saddle point, closed forms.

The pmf is recovered from the generating function by the exact Fourier sum

    p_n = (1/M) sum_k exp(F(i theta_k)) e^(-i n theta_k),  theta_k = 2 pi k / M,

which is the count distribution up to wraparound aliasing bounded by the
Chernoff tail mass beyond M (reported in the diagnostics).  Direct summation
in doubles floors out near 1e-14, while the interesting tails span thousands
of decades, so every distribution also carries log p_n: below the linear
floor the same Cauchy integral is evaluated on a circle through the real
saddle point of F(xi) - n xi.  On that contour the integrand is O(1) and its
DFT yields log p_n to full precision; one shifted DFT covers a window of
order sqrt(F'') counts around its anchor, and a handful of anchors cover the
whole range.

Closed-form references: the Poisson law for weak transmission, the
double-barrier generating function S [1 - sqrt(1 - (e^xi - 1) f)], the
heavy-tailed large-f form C exp(-n/f - nbar^2/(n f)) it limits to, and the
pure-exponential large-n tail with rate ln(1 + 1/lambda_max).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.fft import fft, next_fast_len
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .core import RegimeWarning, SpectralData
from .genfn import OutOfDomain, Statistics, _cexpm1

# Linear-space DFT values below this are swamped by roundoff of the O(1)
# summands; smaller probabilities are taken from the shifted-contour fill.
LINEAR_FLOOR = 1e-8
# Shifted-contour DFT entries are kept while they exceed the absolute
# roundoff of the unit-magnitude summands by four decades.
_TILT_KEEP = 1e-10
DEFAULT_TAIL_MASS = 1e-12


class NoSaddle(ValueError):
    """No real saddle: n exceeds every achievable slope of F."""


class Degenerate(ValueError):
    """The generating function is identically zero (empty spectrum)."""


class ZeroSpectrum(ValueError):
    """Tail rate is undefined for a vacuum spectrum."""


@dataclass(frozen=True)
class Diagnostics:
    normalization_defect: float
    truncated_tail_mass_bound: float


@dataclass(frozen=True)
class CountDistribution:
    """pmf over n = 0 .. len(p)-1 with log values and method metadata."""

    p: np.ndarray
    log_p: np.ndarray
    method: str
    diagnostics: Diagnostics

    def __post_init__(self):
        for name in ("p", "log_p"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.p.size)

    @property
    def n_max(self) -> int:
        return self.p.size - 1

    def mean(self) -> float:
        return float(np.sum(self.n * self.p))

    def variance(self) -> float:
        m = self.mean()
        return float(np.sum((self.n - m) ** 2 * self.p))


# ---------------------------------------------------------------------------
# Saddle point
# ---------------------------------------------------------------------------

def _solve_saddle(gf, n: float, rtol: float = 1e-9) -> float:
    """Real solution of F'(xi) = n by Newton with a bisection safeguard.

    F' is positive, increasing and unbounded near xi_max for bosons, so a
    bracket always exists; for fermions F' saturates and NoSaddle is raised
    when n is unreachable.
    """
    if gf.derivative(0.0, 1) == 0.0:
        raise Degenerate("generating function has an empty spectrum")
    if n <= 0:
        raise ValueError("saddle point is defined for n >= 1")

    target = float(n)
    tol = rtol * max(target, 1.0)

    # Lower bracket end: walk down until F' < n (F' -> 0 as xi -> -inf).
    lo = 0.0
    step = 1.0
    while gf.derivative(lo, 1) >= target:
        lo -= step
        step *= 2.0
        if lo < -1500.0:
            raise RuntimeError("failed to bracket saddle from below")

    # Upper bracket end.
    xi_max = gf.xi_max
    if math.isfinite(xi_max):
        gap = (xi_max - lo) / 2.0
        hi = xi_max - gap
        while gf.derivative(hi, 1) <= target:
            gap /= 2.0
            hi = xi_max - gap
            if gap < 1e-300:
                raise RuntimeError("failed to bracket saddle below xi_max")
    else:
        hi = max(1.0, lo + 1.0)
        while gf.derivative(hi, 1) <= target:
            hi = 2.0 * hi + 1.0
            if hi > 700.0:
                raise NoSaddle(f"count {n} exceeds the reachable mean slope")

    x = 0.5 * (lo + hi)
    for _ in range(200):
        resid = gf.derivative(x, 1) - target
        if abs(resid) <= tol:
            return x
        if resid > 0:
            hi = x
        else:
            lo = x
        curv = gf.derivative(x, 2)
        x_new = x - resid / curv if curv > 0 else x
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        x = x_new
    return x


def saddle_point(gf, n: int) -> float:
    """Large-deviation approximation exp(F(xi*) - n xi*) / sqrt(2 pi F''(xi*))."""
    return math.exp(log_saddle_point(gf, n))


def log_saddle_point(gf, n: int) -> float:
    """Log of :func:`saddle_point`, safe for probabilities below 1e-308."""
    xs = _solve_saddle(gf, n)
    return gf.eval_real(xs) - n * xs - 0.5 * math.log(2.0 * math.pi * gf.derivative(xs, 2))


# ---------------------------------------------------------------------------
# Exact Fourier inversion
# ---------------------------------------------------------------------------

def _chernoff_bound(gf, m: int) -> float:
    """min over xi > 0 of exp(F(xi) - xi m), a bound on the mass at n >= m."""
    xi_max = gf.xi_max
    hi = xi_max * (1.0 - 1e-12) if math.isfinite(xi_max) else 200.0
    res = minimize_scalar(lambda x: gf.eval_real(x) - x * m,
                          bounds=(1e-12, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(np.exp(min(res.fun, 0.0)))


def _chernoff_quantile(gf, tail_mass: float) -> int:
    """Smallest m with Chernoff bound <= tail_mass."""
    xi_max = gf.xi_max
    hi = xi_max * (1.0 - 1e-12) if math.isfinite(xi_max) else 200.0
    log_tol = math.log(tail_mass)
    res = minimize_scalar(lambda x: (gf.eval_real(x) - log_tol) / x,
                          bounds=(1e-12, hi), method="bounded",
                          options={"xatol": 1e-12})
    return int(math.ceil(res.fun)) + 1


def _tilt_alias_log_bound(gf, xi_c: float, f_c: float, m2: int) -> float:
    """log Chernoff bound on the tilted mass at or beyond m2 (the aliasing)."""
    try:
        xi = _solve_saddle(gf, m2)
    except NoSaddle:
        return -math.inf  # beyond the fermionic support
    if xi <= xi_c:
        return 0.0
    return gf.eval_real(xi) - f_c - (xi - xi_c) * m2


def _fill_log_tail(gf, p: np.ndarray, log_p: np.ndarray) -> None:
    """Fill log_p entries below the linear floor via shifted-contour DFTs.

    Each anchor transform is enlarged until the tilted distribution's mass
    beyond it is negligible, since the tilted width sqrt(F'') can exceed the
    pmf length for deep anchors.
    """
    m = p.size
    ns = np.arange(m)
    unfilled = p < LINEAR_FLOOR

    if unfilled[0]:
        log_p[0] = gf.log_prob_zero()
        unfilled[0] = False

    guard = 0
    while unfilled.any():
        guard += 1
        if guard > 200:
            raise RuntimeError("log-space fill did not converge")
        i = int(np.flatnonzero(unfilled)[0])
        n_c = max(i, 1)
        xi_c = _solve_saddle(gf, n_c)
        f_c = gf.eval_real(xi_c)
        width = math.sqrt(gf.derivative(xi_c, 2))
        m2 = next_fast_len(max(m, int(n_c + 32 * width) + 64))
        while _tilt_alias_log_bound(gf, xi_c, f_c, m2) > math.log(1e-14):
            m2 = next_fast_len(2 * m2)
        theta = 2.0 * np.pi * np.arange(m2) / m2
        shifted = np.exp(gf.eval_complex(xi_c + 1j * theta) - f_c)
        s = fft(shifted).real[:m] / m2
        good = s > _TILT_KEEP
        if not good[i]:
            raise RuntimeError(f"shifted contour at n={i} produced no usable values")
        take = good & unfilled
        log_p[take] = np.log(s[take]) + f_c - ns[take] * xi_c
        unfilled &= ~take


def invert_fourier(gf, n_max: int | None = None,
                   tail_mass: float = DEFAULT_TAIL_MASS) -> CountDistribution:
    """Exact pmf of the counting distribution by Fourier inversion.

    The transform length is n_max + 1, grown automatically so that the
    wraparound (Chernoff) tail bound is at most ``tail_mass`` and padded to
    an FFT-friendly size.  log p is exact everywhere: above the linear floor
    it is the log of the DFT value, below it the shifted-contour evaluation.

    For fermionic generating functions the count support is finite and the
    deep-tail fill is skipped (log_p is -inf beyond the support).
    """
    stats = getattr(gf, "statistics", Statistics.BOSE)

    if gf.derivative(0.0, 1) == 0.0:
        size = 1 if n_max is None else n_max + 1
        p = np.zeros(size)
        p[0] = 1.0
        log_p = np.full(size, -np.inf)
        log_p[0] = 0.0
        return CountDistribution(p=p, log_p=log_p, method="fourier_exact",
                                 diagnostics=Diagnostics(0.0, 0.0))

    if stats is Statistics.FERMI:
        support = int(math.ceil(gf.nu * np.count_nonzero(gf.spectrum.values))) + 1
        m = support if n_max is None else max(n_max + 1, support)
    else:
        needed = _chernoff_quantile(gf, tail_mass)
        m = needed if n_max is None else max(n_max + 1, needed)
    m = next_fast_len(m)

    theta = 2.0 * np.pi * np.arange(m) / m
    char = np.exp(gf.eval_complex(1j * theta))
    p = fft(char).real / m

    if p.min() < -1e-9:
        raise OverflowError(f"inversion produced p_min = {p.min():.3e}")
    p = np.clip(p, 0.0, None)

    with np.errstate(divide="ignore"):
        log_p = np.log(p)
    if stats is not Statistics.FERMI:
        _fill_log_tail(gf, p, log_p)

    defect = abs(float(p.sum()) - 1.0)
    bound = 0.0 if stats is Statistics.FERMI else _chernoff_bound(gf, m)
    return CountDistribution(p=p, log_p=log_p, method="fourier_exact",
                             diagnostics=Diagnostics(defect, bound))


# ---------------------------------------------------------------------------
# Closed-form double-barrier generating function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleBarrierGF:
    """Large-N generating function S [1 - sqrt(1 - (e^xi - 1) f)].

    ``strength`` is the product nu * N * Gamma; the mean count is
    strength * f / 2 and the Fano factor exactly 1 + f/2.  Implements the
    same evaluation protocol as GeneratingFunction, so the inversion and
    saddle-point machinery apply unchanged.
    """

    occupation: float
    strength: float
    statistics: Statistics = Statistics.BOSE

    def __post_init__(self):
        if self.occupation <= 0 or self.strength <= 0:
            raise ValueError("occupation and strength must be positive")

    @property
    def xi_max(self) -> float:
        return math.log1p(1.0 / self.occupation)

    def eval_real(self, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi >= self.xi_max):
            raise OutOfDomain(f"xi >= xi_max = {self.xi_max!r}")
        out = self.strength * (1.0 - np.sqrt(1.0 - np.expm1(xi) * self.occupation))
        return out if out.ndim else float(out)

    def eval_imag(self, theta):
        return self.eval_complex(1j * np.asarray(theta, dtype=float))

    def eval_complex(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if np.any(zeta.real >= self.xi_max):
            raise OutOfDomain(f"Re zeta >= xi_max = {self.xi_max!r}")
        # Re(1 - (e^zeta - 1) f) > 0 on the strip: principal sqrt is safe.
        out = self.strength * (1.0 - np.sqrt(1.0 - _cexpm1(zeta) * self.occupation))
        return out if out.ndim else complex(out)

    def derivative(self, xi: float, order: int = 1) -> float:
        f, s = self.occupation, self.strength
        d = 1.0 - np.expm1(xi) * f
        if order == 1:
            return float(s * f / 2 * np.exp(xi) / np.sqrt(d))
        if order == 2:
            return float(s * f / 2 * (np.exp(xi) / np.sqrt(d)
                                      + f / 2 * np.exp(2 * xi) / d ** 1.5))
        raise ValueError("only first and second derivatives are provided")

    def log_prob_zero(self) -> float:
        return self.strength * (1.0 - math.sqrt(1.0 + self.occupation))

    def cumulants(self):
        from .genfn import CumulantSummary
        f, s = self.occupation, self.strength
        mean = s * f / 2
        return CumulantSummary(mean=mean,
                               variance=mean * (1 + f / 2),
                               fano=1 + f / 2,
                               third_cumulant=mean * (1 + 3 * f / 2 + 3 * f * f / 4))


def closed_form_double_barrier(f: float, strength: float, xi: float) -> float:
    """Value of the double-barrier generating function at real xi.

    ``strength`` is nu * N * Gamma.  Raises OutOfDomain once
    (e^xi - 1) f >= 1.
    """
    if np.expm1(xi) * f >= 1.0:
        raise OutOfDomain(f"(e^xi - 1) f = {np.expm1(xi) * f:.6f} >= 1")
    return float(strength * (1.0 - np.sqrt(1.0 - np.expm1(xi) * f)))


# ---------------------------------------------------------------------------
# Closed-form references
# ---------------------------------------------------------------------------

def poisson_log_pmf(mean: float, n) -> np.ndarray:
    """Poisson reference law (weak-transmission limit of the exact pmf)."""
    n = np.asarray(n, dtype=float)
    if mean == 0.0:
        return np.where(n == 0, 0.0, -np.inf)
    return n * math.log(mean) - mean - gammaln(n + 1.0)


def gaussian_log_pmf(mean: float, variance: float, n) -> np.ndarray:
    """Gaussian body reference with the given mean and variance."""
    n = np.asarray(n, dtype=float)
    return -0.5 * (n - mean) ** 2 / variance - 0.5 * math.log(2 * math.pi * variance)


def k_distribution_log(f: float, nbar: float, n) -> np.ndarray:
    """Log of the large-f closed form, with its left-shoulder saturation.

    For 1 << f << nbar the double-barrier pmf approaches
    C exp(-n/f - nbar^2/(n f)) with C = (pi f nbar)^(-1/2) exp(2 nbar / f).
    The essential singularity at n = 0 is unphysical; below roughly
    nbar/sqrt(f) the true distribution flattens out, which is modeled here
    by taking the max with the saturation value exp(-2 nbar / sqrt(f)).
    The crossover location is only qualitative, so this is an approximation.
    """
    n = np.asarray(n, dtype=float)
    log_c = -0.5 * math.log(math.pi * f * nbar) + 2.0 * nbar / f
    saturation = -2.0 * nbar / math.sqrt(f)
    with np.errstate(divide="ignore"):
        body = np.where(n > 0, log_c - n / f - nbar ** 2 / (np.where(n > 0, n, 1.0) * f),
                        -np.inf)
    return np.maximum(body, saturation)


def k_distribution(f: float, nbar: float, n: int) -> float:
    """Large-f double-barrier closed form at a single count.

    Issues a RegimeWarning outside the validity window 1 << f << nbar.
    """
    if not (f >= 3.0 and nbar >= 10.0 * f):
        warnings.warn(f"closed form assumes 1 << f << nbar (f={f}, nbar={nbar})",
                      RegimeWarning, stacklevel=2)
    return float(np.exp(k_distribution_log(f, nbar, np.asarray(float(n)))))


# ---------------------------------------------------------------------------
# Large-n tail
# ---------------------------------------------------------------------------

def tail_rate(spectrum: SpectralData) -> float:
    """Asymptotic decay rate of ln p_n per count: ln(1 + 1/lambda_max).

    This is the exact branch-point location of the generating function; the
    often-quoted 1/lambda_max is its lambda_max >> 1 limit.
    """
    lmax = spectrum.lambda_max
    if lmax == 0.0:
        raise ZeroSpectrum("vacuum spectrum has a super-exponential tail")
    return math.log1p(1.0 / lmax)


def fitted_tail_decay(dist: CountDistribution, decades: float = 1.0) -> float:
    """Decay rate per count fitted to the last resolvable decade(s) of log p.

    Fits a straight line to log p_n over the final ``decades`` of
    probability in the stored distribution (right of the mode) and returns
    the negated slope.
    """
    lp = dist.log_p
    finite = np.isfinite(lp)
    if finite.sum() < 8:
        raise ValueError("distribution too short for a tail fit")
    mode = int(np.argmax(lp))
    floor = lp[finite][-1] if finite[-1] else np.min(lp[finite])
    window = (lp >= floor) & (lp <= floor + decades * math.log(10.0)) & finite
    window[:mode + 1] = False
    ns = np.flatnonzero(window)
    if ns.size < 4:
        raise ValueError("fewer than 4 points in the requested tail decade")
    slope = np.polyfit(ns, lp[ns], 1)[0]
    return float(-slope)
