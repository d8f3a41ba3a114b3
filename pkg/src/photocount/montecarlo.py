"""Brute-force sampling oracle for the counting statistics.

Realizes the defining photodetection picture directly, with no shared code
path with the analytic modules: per trial and per coherence cell, a complex
mode amplitude is drawn from the Gaussian source ensemble (independent
circular Gaussians in the covariance eigenbasis, mean square modulus equal
to the covariance eigenvalue), propagated through the transmission matrix,
and the detector registers a Poisson count with mean equal to the
transmitted intensity.  The trial count is the sum over cells.

The continuous coherence-cell number of the analytic side is necessarily an
integer here; comparisons against analytic results are therefore always run
at integer cell counts, where the two notions coincide.

Trials are organized in fixed-size blocks, each owning a private random
substream spawned deterministically from the master seed, so results are
byte-identical regardless of scheduling or block execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .core import ModeCovariance, TransmissionSpec, reduce_to_spectrum


class EmptyCounts(ValueError):
    """Summary statistics requested for an empty sample."""


BLOCK_TRIALS = 2048
JACKKNIFE_BLOCKS = 50


@dataclass(frozen=True)
class McConfig:
    """Sampling configuration; the seed fully determines the output."""

    cells: int
    trials: int
    seed: int

    def __post_init__(self):
        if self.cells < 1:
            raise ValueError("cells must be a positive integer")
        if self.trials < 1:
            raise ValueError("trials must be a positive integer")


def _amplitude_factors(mu: ModeCovariance) -> tuple[np.ndarray | None, np.ndarray]:
    """Eigenbasis and per-mode amplitude scales sqrt(eigenvalue) of mu."""
    if mu.is_scalar:
        return None, np.full(mu.n, np.sqrt(mu.f))
    w, v = np.linalg.eigh(np.asarray(mu.matrix))
    w = np.clip(w, 0.0, None)
    return v, np.sqrt(w)


def _dense_t(t: TransmissionSpec) -> np.ndarray:
    if t.kind == "matrix":
        return np.asarray(t.matrix)
    if t.kind == "eigenvalues":
        return np.diag(np.sqrt(np.clip(np.asarray(t.eigenvalues), 0.0, 1.0))).astype(complex)
    raise ValueError("ensemble scatterer must be resolved to eigenvalues first")


def sample_counts(mu: ModeCovariance, t: TransmissionSpec, cfg: McConfig) -> np.ndarray:
    """Sampled photocounts, one integer per trial.

    Poisson mixing of the transmitted intensity reproduces the counting
    statistics exactly at integer cell counts; numpy's generator switches
    between inversion and rejection sampling internally, which covers the
    decades-wide intensity range of strongly bunched sources.
    """
    reduce_to_spectrum(mu, t)  # raises the typed validation errors
    basis, scales = _amplitude_factors(mu)
    tmat = _dense_t(t)
    propagate = tmat if basis is None else tmat @ basis

    n_modes = mu.n
    counts = np.empty(cfg.trials, dtype=np.int64)
    n_blocks = (cfg.trials + BLOCK_TRIALS - 1) // BLOCK_TRIALS
    streams = np.random.SeedSequence(cfg.seed).spawn(n_blocks)

    for b in range(n_blocks):
        rng = np.random.default_rng(streams[b])
        lo = b * BLOCK_TRIALS
        hi = min(lo + BLOCK_TRIALS, cfg.trials)
        size = (hi - lo, cfg.cells, n_modes)
        alpha = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
        alpha *= scales
        transmitted = np.einsum("mk,bck->bcm", propagate, alpha)
        intensity = np.sum(np.abs(transmitted) ** 2, axis=2)
        counts[lo:hi] = rng.poisson(intensity).sum(axis=1)

    return counts


@dataclass(frozen=True)
class EmpiricalSummary:
    mean: float
    variance: float
    fano: float
    histogram: np.ndarray
    se_mean: float
    se_variance: float
    se_fano: float
    trials: int = 0

    def __post_init__(self):
        h = np.asarray(self.histogram, dtype=np.int64)
        h.flags.writeable = False
        object.__setattr__(self, "histogram", h)


def empirical_summary(counts, blocks: int = JACKKNIFE_BLOCKS) -> EmpiricalSummary:
    """Mean, unbiased variance, Fano factor and delete-block jackknife errors."""
    counts = np.asarray(counts)
    if counts.size == 0:
        raise EmptyCounts("no counts to summarize")

    mean = float(counts.mean())
    variance = float(counts.var(ddof=1)) if counts.size > 1 else 0.0
    fano = variance / mean if mean > 0 else 1.0

    blocks = int(min(blocks, counts.size))
    se_mean = se_var = se_fano = float("nan")
    if blocks >= 2:
        edges = np.linspace(0, counts.size, blocks + 1).astype(int)
        est = np.empty((blocks, 3))
        for b in range(blocks):
            keep = np.concatenate([counts[:edges[b]], counts[edges[b + 1]:]])
            m = keep.mean()
            v = keep.var(ddof=1)
            est[b] = (m, v, v / m if m > 0 else 1.0)
        factor = (blocks - 1) / blocks
        se_mean, se_var, se_fano = np.sqrt(factor * ((est - est.mean(axis=0)) ** 2).sum(axis=0))

    return EmpiricalSummary(mean=mean, variance=variance, fano=fano,
                            histogram=np.bincount(counts.astype(np.int64)),
                            se_mean=float(se_mean), se_variance=float(se_var),
                            se_fano=float(se_fano), trials=counts.size)


def chi_square_vs_pmf(counts, p: np.ndarray, min_expected: float = 5.0):
    """Pearson chi-square of sampled counts against a reference pmf.

    Bins with expected occupancy below ``min_expected`` are merged into their
    right neighbor (the overflow region beyond the pmf is one final bin).
    Returns (statistic, dof, p_value).
    """
    counts = np.asarray(counts)
    if counts.size == 0:
        raise EmptyCounts("no counts to test")
    p = np.asarray(p, dtype=float)
    observed = np.bincount(counts.astype(np.int64), minlength=p.size + 1).astype(float)
    expected = np.append(p, max(1.0 - p.sum(), 0.0)) * counts.size
    if observed.size > expected.size:
        extra = observed[expected.size:].sum()
        observed = observed[:expected.size]
        observed[-1] += extra

    # greedy right-merge so every comparison bin is well populated
    obs_bins, exp_bins = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
            o_acc = e_acc = 0.0
    if obs_bins:
        obs_bins[-1] += o_acc
        exp_bins[-1] += e_acc
    obs = np.array(obs_bins)
    exp = np.array(exp_bins)
    if obs.size < 2:
        raise ValueError("fewer than two populated bins; increase trials")

    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    return stat, dof, float(chi2.sf(stat, dof))


def analytic_reference(mu: ModeCovariance, t: TransmissionSpec, cells: int):
    """Spectrum and generating function matching a sampling configuration."""
    from .genfn import GeneratingFunction

    spectrum = reduce_to_spectrum(mu, t)
    return spectrum, GeneratingFunction(spectrum=spectrum, nu=float(cells))
