"""Finite-n detectors: mixture statistics, thresholding, and Monte Carlo rates.

The decision statistic for weights q over candidate models p_1..p_K is

    g(y; q) = (1/n) * log sum_k q_k p_k(y) / p_0(y),

evaluated in the log domain.  The test decides the null when g <= tau, with
tau calibrated as an empirical quantile under the null at false-alarm
level alpha.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .errors import EstimationInfeasibleError, ParameterError
from .gaussian_model import (
    SAMPLE_BLOCK,
    ToeplitzGaussian,
    build_model,
    sample_blocks,
    standard_normal_block,
    white_model,
)
from .spectral import UncertaintySet

#: Default normalized tilt grid for Chernoff-type bounds: 41 points on [-2, 0].
DEFAULT_TILT_GRID = tuple(np.linspace(-2.0, 0.0, 41))

#: Miss estimates backed by fewer recorded miss events than this are censored.
MIN_MISS_EVENTS = 10


def derive_seed(seed: int, label: str) -> int:
    """Stable 64-bit substream seed for (master seed, stage label)."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class MixtureWeights:
    """Point on the K-simplex, used both as detector weights and operating point."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ParameterError("weights must be a nonempty vector")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ParameterError("weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError(f"weights must sum to 1, got {w.sum()!r}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def __len__(self) -> int:
        return self.w.size

    @staticmethod
    def singleton(index: int, size: int) -> "MixtureWeights":
        w = np.zeros(size)
        w[index] = 1.0
        return MixtureWeights(w)

    @staticmethod
    def uniform(size: int) -> "MixtureWeights":
        return MixtureWeights(np.full(size, 1.0 / size))


@dataclass
class DetectorSpec:
    """A fully calibrated mixture detector at one dimension n."""

    weights: MixtureWeights
    models: List[ToeplitzGaussian]
    null_sigma2: float
    threshold: float
    n: int
    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.threshold) and self.threshold == self.threshold:
            pass  # +-inf allowed for degenerate rules; NaN rejected below
        if self.threshold != self.threshold:
            raise ParameterError("threshold must not be NaN")
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must be in (0,1), got {self.alpha}")
        if len(self.models) != len(self.weights):
            raise ParameterError("weights and models must have equal length")
        for m in self.models:
            if m.n != self.n or m.sigma2 != self.null_sigma2:
                raise ParameterError("models must share n and sigma2 with the spec")


def log_likelihood_ratios(
    samples: np.ndarray, models: Sequence[ToeplitzGaussian], null_sigma2: float
) -> np.ndarray:
    """Per-model log density ratios log(p_k(y)/p_0(y)) for each sample row."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    trials, n = samples.shape
    yy = np.einsum("ij,ij->i", samples, samples)
    out = np.empty((trials, len(models)))
    for k, model in enumerate(models):
        if model.n != n:
            raise ParameterError(f"model {k} has n={model.n}, samples have n={n}")
        logdet_ratio = model.logdet - n * np.log(null_sigma2)
        out[:, k] = (
            -0.5 * logdet_ratio + yy / (2.0 * null_sigma2) - 0.5 * model.quad_forms(samples)
        )
    return out


def mixture_statistics(
    samples: np.ndarray,
    weights: MixtureWeights,
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
) -> np.ndarray:
    """Vector of g(y; q) over the sample rows (log-sum-exp combination)."""
    if np.all(weights.w == 0.0):
        raise ParameterError("at least one weight must be positive")
    active = np.flatnonzero(weights.w > 0.0)
    ratios = log_likelihood_ratios(
        samples, [models[k] for k in active], null_sigma2
    )
    n = models[0].n
    return logsumexp(ratios, b=weights.w[np.newaxis, active], axis=1) / n


def mixture_statistic(
    y: np.ndarray,
    weights: MixtureWeights,
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
) -> float:
    """g(y; q) for a single observation vector."""
    return float(mixture_statistics(np.atleast_2d(y), weights, models, null_sigma2)[0])


def h0_statistics(
    weights: MixtureWeights,
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
    trials: int,
    seed: int,
) -> np.ndarray:
    """g values on `trials` fresh null draws (block-streamed, reproducible)."""
    null = white_model(null_sigma2, models[0].n)
    chunks = [
        mixture_statistics(block, weights, models, null_sigma2)
        for block in sample_blocks(null, trials, seed)
    ]
    return np.concatenate(chunks)


def threshold_order_index(alpha: float, trials: int) -> int:
    """0-based order-statistic index of the calibration threshold."""
    return trials - int(np.ceil(alpha * trials))


def calibrate_threshold(
    weights: MixtureWeights,
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
    alpha: float,
    trials: int,
    seed: int,
) -> float:
    """Empirical (1-alpha)-quantile of g under the null (lower order statistic).

    With the returned threshold, regenerating the same trials yields exactly
    ceil(alpha*trials) - 1 strict exceedances (continuous statistics).
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0,1), got {alpha}")
    needed = int(np.ceil(100.0 / min(alpha, 1.0 - alpha)))
    if trials < needed:
        raise ParameterError(
            f"calibration needs >= {needed} trials at alpha={alpha}, got {trials}"
        )
    g = np.sort(h0_statistics(weights, models, null_sigma2, trials, seed))
    return float(g[threshold_order_index(alpha, trials)])


def estimate_error_probs(
    spec: DetectorSpec, true_psd_index: int, trials: int, seed: int
) -> Tuple[float, float, int]:
    """Monte Carlo false-alarm and miss rates of a calibrated detector.

    Null draws use substream (seed, "h0"); signal draws use (seed, "h1") with
    white-noise draws shared across truth models, so detectors and truths
    under comparison score coupled sample sets.
    """
    if trials < 1000:
        raise ParameterError(f"trials must be >= 1000, got {trials}")
    if not 0 <= true_psd_index < len(spec.models):
        raise ParameterError(f"true_psd_index {true_psd_index} out of range")
    null = white_model(spec.null_sigma2, spec.n)
    fa_count = 0
    for block in sample_blocks(null, trials, derive_seed(seed, "h0")):
        g = mixture_statistics(block, spec.weights, spec.models, spec.null_sigma2)
        fa_count += int(np.sum(g > spec.threshold))
    truth = spec.models[true_psd_index]
    miss_count = 0
    for block in sample_blocks(truth, trials, derive_seed(seed, "h1")):
        g = mixture_statistics(block, spec.weights, spec.models, spec.null_sigma2)
        miss_count += int(np.sum(g <= spec.threshold))
    return fa_count / trials, miss_count / trials, miss_count


@dataclass
class ExponentEstimate:
    """Empirical miss-exponent ladder for one detector/truth pairing."""

    n_values: np.ndarray
    miss_log: np.ndarray
    fa_hat: np.ndarray
    miss_hat: np.ndarray
    miss_count: np.ndarray
    censored: np.ndarray
    slope: float
    ci_half_width: float

    def to_rows(self) -> List[dict]:
        return [
            {
                "n": int(self.n_values[i]),
                "fa_hat": float(self.fa_hat[i]),
                "miss_hat": float(self.miss_hat[i]),
                "miss_count": int(self.miss_count[i]),
                "miss_log": float(self.miss_log[i]),
                "censored": bool(self.censored[i]),
            }
            for i in range(len(self.n_values))
        ]


def empirical_exponent(
    psd_set: UncertaintySet,
    sigma2: float,
    detector_weights: MixtureWeights,
    true_psd_index: int,
    n_values: Sequence[int],
    trials: int,
    alpha: float,
    seed: int,
) -> ExponentEstimate:
    """Estimate -(1/n) log(miss probability) across a ladder of dimensions.

    Each dimension calibrates its own threshold from the same master seed.
    Entries with fewer than MIN_MISS_EVENTS misses are censored and never
    contribute to the slope.
    """
    n_values = np.asarray(list(n_values), dtype=int)
    if np.any(np.diff(n_values) <= 0):
        raise ParameterError("n_values must be strictly increasing")
    if len(detector_weights) != len(psd_set):
        raise ParameterError("detector weights must match the PSD set size")
    miss_log = np.full(len(n_values), np.nan)
    fa_hat = np.empty(len(n_values))
    miss_hat = np.empty(len(n_values))
    miss_count = np.zeros(len(n_values), dtype=int)
    censored = np.zeros(len(n_values), dtype=bool)
    for i, n in enumerate(n_values):
        models = [build_model(psd, sigma2, int(n)) for psd in psd_set.members]
        tau = calibrate_threshold(
            detector_weights, models, sigma2, alpha, trials, derive_seed(seed, f"cal:{n}")
        )
        spec = DetectorSpec(
            weights=detector_weights,
            models=models,
            null_sigma2=sigma2,
            threshold=tau,
            n=int(n),
            alpha=alpha,
        )
        fa, miss, count = estimate_error_probs(
            spec, true_psd_index, trials, derive_seed(seed, f"mc:{n}")
        )
        fa_hat[i] = fa
        miss_hat[i] = miss
        miss_count[i] = count
        if count < MIN_MISS_EVENTS:
            censored[i] = True
        else:
            miss_log[i] = -np.log(miss) / n
    uncensored = np.flatnonzero(~censored)
    if uncensored.size == 0:
        raise EstimationInfeasibleError(
            "all miss estimates censored; use smaller n or more trials"
        )
    last = uncensored[-1]
    p_hat = miss_hat[last]
    # 3-sigma binomial CI on miss_hat mapped through -(1/n)log by delta method
    ci = 3.0 * np.sqrt((1.0 - p_hat) / (p_hat * trials)) / n_values[last]
    return ExponentEstimate(
        n_values=n_values,
        miss_log=miss_log,
        fa_hat=fa_hat,
        miss_hat=miss_hat,
        miss_count=miss_count,
        censored=censored,
        slope=float(miss_log[last]),
        ci_half_width=float(ci),
    )


def sample_mixture_blocks(
    models: Sequence[ToeplitzGaussian],
    weights: MixtureWeights,
    trials: int,
    seed: int,
    block: int = SAMPLE_BLOCK,
):
    """Blocks of draws from the Gaussian mixture sum_k w_k p_k.

    The white-noise draws and component-selection uniforms are generated from
    substreams of `seed` that do not depend on `weights`, so runs with
    different operating points are coupled sample-by-sample.
    """
    n = models[0].n
    cdf = np.cumsum(weights.w)
    for b, start in enumerate(range(0, trials, block)):
        size = min(block, trials - start)
        z = standard_normal_block(seed, b, size, n, block)
        ss = np.random.SeedSequence(entropy=derive_seed(seed, "mixsel"), spawn_key=(b,))
        u = np.random.default_rng(ss).random(block)[:size]
        comp = np.searchsorted(cdf, u, side="right")
        comp = np.minimum(comp, len(models) - 1)
        out = np.empty((size, n))
        for k, model in enumerate(models):
            rows = comp == k
            if np.any(rows):
                out[rows] = z[rows] @ model.factor.T
        yield out


def chernoff_exponent(
    spec: DetectorSpec,
    true_model_weights: MixtureWeights,
    tilt_grid: Sequence[float],
    trials: int,
    seed: int,
) -> float:
    """Monte Carlo Chernoff lower bound on the miss exponent of the detector.

    Maximizes t*tau - (1/n) log E_{mixture}[exp(t*n*g)] over normalized
    tilts t <= 0, with the expectation under the mixture of the true models.
    """
    tilt_grid = np.asarray(list(tilt_grid), dtype=float)
    if tilt_grid.size == 0:
        raise ParameterError("tilt grid must be nonempty")
    if np.any(tilt_grid > 0.0):
        raise ParameterError("all tilts must be <= 0")
    g_chunks = [
        mixture_statistics(block, spec.weights, spec.models, spec.null_sigma2)
        for block in sample_mixture_blocks(spec.models, true_model_weights, trials, seed)
    ]
    g = np.concatenate(g_chunks)
    n = spec.n
    brackets = [
        t * spec.threshold - (logsumexp(t * n * g) - np.log(trials)) / n
        for t in tilt_grid
    ]
    return float(np.max(brackets))
