"""Finite-dimensional Gaussian models with Toeplitz signal covariance.

A model is the zero-mean Gaussian with covariance sigma^2*I + Sigma_N, where
Sigma_N is the symmetric Toeplitz matrix built from the first n autocovariance
lags of a signal PSD.  Everything downstream (likelihood ratios, KL
divergences, the closed-form ratio expectation, sampling) works through the
cached Cholesky factor of that covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular, toeplitz

from .errors import NotPositiveDefiniteError, ParameterError
from .spectral import PsdGrid, autocovariance

#: Diagonal jitter ladder tried in order before declaring the covariance
#: not positive definite.  Valid PSDs give PD matrices in exact arithmetic;
#: jitter only absorbs roundoff.
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)

#: Trials per sampling substream; sample t lives in block t // SAMPLE_BLOCK
#: independent of the total trial count, so blocks can run concurrently and
#: shared-seed comparisons see identical draws.
SAMPLE_BLOCK = 4096


@dataclass(frozen=True)
class ToeplitzGaussian:
    """Zero-mean Gaussian N(0, sigma2*I + Toeplitz(autocov)) of dimension n."""

    n: int
    sigma2: float
    autocov: np.ndarray
    label: str = ""
    factor: np.ndarray = field(repr=False, compare=False, default=None)
    logdet: float = field(compare=False, default=None)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if self.sigma2 <= 0:
            raise ParameterError(f"sigma2 must be > 0, got {self.sigma2}")
        autocov = np.asarray(self.autocov, dtype=float)
        if autocov.shape != (self.n,):
            raise ParameterError(
                f"autocov must have length n={self.n}, got {autocov.shape}"
            )
        autocov = autocov.copy()
        autocov.setflags(write=False)
        object.__setattr__(self, "autocov", autocov)
        if self.factor is None:
            cov = self.covariance()
            factor = _cholesky_with_jitter(cov, self.label)
            factor.setflags(write=False)
            object.__setattr__(self, "factor", factor)
            object.__setattr__(
                self, "logdet", float(2.0 * np.sum(np.log(np.diag(factor))))
            )

    def covariance(self) -> np.ndarray:
        """Dense covariance sigma2*I + Sigma_N."""
        cov = toeplitz(self.autocov)
        cov[np.diag_indices(self.n)] += self.sigma2
        return cov

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Covariance solve C^{-1} rhs via the cached factor."""
        return cho_solve((self.factor, True), rhs)

    def quad_forms(self, samples: np.ndarray) -> np.ndarray:
        """y^T C^{-1} y for each row y of `samples`."""
        half = solve_triangular(self.factor, samples.T, lower=True)
        return np.einsum("ij,ij->j", half, half)


def _cholesky_with_jitter(cov: np.ndarray, label: str) -> np.ndarray:
    for jitter in JITTER_LADDER:
        try:
            work = cov if jitter == 0.0 else cov + jitter * np.eye(cov.shape[0])
            return cholesky(work, lower=True)
        except np.linalg.LinAlgError:
            continue
        except Exception:
            continue
    raise NotPositiveDefiniteError(
        f"covariance for PSD {label!r} is not positive definite "
        f"(jitter up to {JITTER_LADDER[-1]:g} exhausted)"
    )


def build_model(psd: PsdGrid, sigma2: float, n: int) -> ToeplitzGaussian:
    """Finite-n Gaussian model induced by a signal PSD over white noise."""
    return ToeplitzGaussian(
        n=n, sigma2=sigma2, autocov=autocovariance(psd, n - 1), label=psd.label
    )


def white_model(sigma2: float, n: int) -> ToeplitzGaussian:
    """The null model N(0, sigma2*I)."""
    return ToeplitzGaussian(n=n, sigma2=sigma2, autocov=np.zeros(n), label="white")


def gaussian_kl(p: ToeplitzGaussian, q: ToeplitzGaussian) -> float:
    """KL divergence D(p || q) between two zero-mean Gaussians, in nats."""
    if p.n != q.n:
        raise ParameterError(f"dimension mismatch: {p.n} vs {q.n}")
    trace = float(np.trace(q.solve(p.covariance())))
    return 0.5 * (trace - p.n + q.logdet - p.logdet)


def ratio_expectation(
    p0_sigma2: float, p1: ToeplitzGaussian, p2: ToeplitzGaussian
) -> float:
    """Closed-form E_{N(0, s2 I)}[p2(Y)/p1(Y)] for Gaussian densities p1, p2.

    Equals [|C1| / (|C2| * |I + s2 (C2^{-1} - C1^{-1})|)]^{1/2} where C_i is
    the covariance of p_i.  Returns +inf when the middle matrix is not
    positive definite (the defining integral diverges).
    """
    if p1.n != p2.n:
        raise ParameterError(f"dimension mismatch: {p1.n} vs {p2.n}")
    if p0_sigma2 <= 0:
        raise ParameterError(f"p0_sigma2 must be > 0, got {p0_sigma2}")
    n = p1.n
    eye = np.eye(n)
    middle = eye + p0_sigma2 * (p2.solve(eye) - p1.solve(eye))
    middle = 0.5 * (middle + middle.T)
    try:
        factor = cholesky(middle, lower=True)
    except np.linalg.LinAlgError:
        return float("inf")
    logdet_middle = float(2.0 * np.sum(np.log(np.diag(factor))))
    return float(np.exp(0.5 * (p1.logdet - p2.logdet - logdet_middle)))


def finite_n_dominates(
    p0_sigma2: float, p1: ToeplitzGaussian, p2: ToeplitzGaussian
) -> bool:
    """True iff N(0, C1) is dominated by N(0, C2) w.r.t. N(0, s2 I) at this n."""
    return ratio_expectation(p0_sigma2, p1, p2) <= 1.0 + 1e-10


def sample_blocks(
    model: ToeplitzGaussian, trials: int, seed: int, block: int = SAMPLE_BLOCK
) -> Iterator[np.ndarray]:
    """Yield consecutive blocks of i.i.d. draws from the model.

    Block b is generated from substream (seed, b) regardless of `trials`, so
    two runs with the same seed see identical draws sample-by-sample.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    for b, start in enumerate(range(0, trials, block)):
        size = min(block, trials - start)
        z = standard_normal_block(seed, b, size, model.n, block)
        yield z @ model.factor.T


def standard_normal_block(
    seed: int, block_index: int, size: int, n: int, block: int = SAMPLE_BLOCK
) -> np.ndarray:
    """Standard normal draws for substream (seed, block_index), shape (size, n).

    Shared across models so that detectors under comparison score coupled
    sample sets (the underlying white draws are identical).
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block_index,))
    rng = np.random.default_rng(ss)
    z = rng.standard_normal((block, n))
    return z[:size] if size < block else z


def sample_gaussian(model: ToeplitzGaussian, trials: int, seed: int) -> np.ndarray:
    """Matrix of `trials` i.i.d. rows from the model; bit-reproducible."""
    return np.concatenate(list(sample_blocks(model, trials, seed)), axis=0)
