"""The robustness game over mixture operating points on the simplex.

The engineer picks detector weights q, Nature picks an operating point r;
both live on the K-simplex.  The game value at the saddle is the normalized
KL divergence from the null to the least favorable mixture, which a
Frank-Wolfe descent over a frozen sample-average objective locates, and a
closed-form KKT certificate verifies to be the dominated singleton.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .detection import (
    DEFAULT_TILT_GRID,
    MixtureWeights,
    log_likelihood_ratios,
    sample_mixture_blocks,
)
from .errors import ParameterError
from .gaussian_model import ToeplitzGaussian, ratio_expectation

#: Closed-form KKT checks carry no sampling noise; violations beyond this
#: fail the certificate.
KKT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class KktCertificate:
    """First-order optimality certificate for the singleton operating point."""

    lam: float
    mu: np.ndarray
    max_violation: float
    singleton_verified: bool
    candidate_index: int
    diverged_indices: Tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {
            "lambda": float(self.lam),
            "mu": [float(m) for m in self.mu],
            "max_violation": float(self.max_violation),
            "singleton_verified": bool(self.singleton_verified),
            "candidate_index": int(self.candidate_index),
            "diverged_indices": list(self.diverged_indices),
        }


def _ratio_matrix(
    h0_samples: np.ndarray, models: Sequence[ToeplitzGaussian], null_sigma2: float
) -> np.ndarray:
    return log_likelihood_ratios(h0_samples, models, null_sigma2)


def _objective(log_r: np.ndarray, ratios: np.ndarray, n: int) -> float:
    # (1/n) * mean[ -log sum_k r_k p_k/p_0 ] over the frozen null samples
    return float(-np.mean(logsumexp(ratios + log_r, axis=1))) / n


def _log_weights(w: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(w)


def sample_average_kl(
    r: MixtureWeights,
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
    h0_samples: np.ndarray,
) -> float:
    """Sample-average (1/n) D(null || mixture r) on a frozen null sample set."""
    ratios = _ratio_matrix(h0_samples, models, null_sigma2)
    return _objective(_log_weights(r.w), ratios, models[0].n)


def minimize_mixture_weights(
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
    h0_samples: np.ndarray,
    init: MixtureWeights,
    max_iters: int = 200,
    tol: float = 1e-8,
) -> Tuple[MixtureWeights, float, dict]:
    """Frank-Wolfe minimization of the sample-average mixture KL over the simplex.

    The linear subproblem picks the vertex of the most negative gradient
    component; the nominal step 2/(iter+2) is halved as needed so the
    recorded objective trace is nonincreasing.  Returns (weights, value,
    trace) where trace holds per-iteration objectives and duality gaps.
    """
    k = len(models)
    if len(init) != k:
        raise ParameterError("init must match the number of models")
    if np.any(init.w < 1.0 / (10.0 * k)):
        raise ParameterError(f"init must be strictly interior (all >= 1/(10K))")
    ratios = _ratio_matrix(h0_samples, models, null_sigma2)
    n = models[0].n
    x = init.w.copy()
    objectives = [_objective(_log_weights(x), ratios, n)]
    gaps: List[float] = []
    for it in range(max_iters):
        mix = logsumexp(ratios + _log_weights(x), axis=1)
        grad = -np.mean(np.exp(ratios - mix[:, np.newaxis]), axis=0) / n
        if not np.all(np.isfinite(grad)):
            raise ParameterError("non-finite gradient in Frank-Wolfe step")
        vertex = int(np.argmin(grad))
        gap = float(grad @ x - grad[vertex])
        gaps.append(gap)
        if gap <= tol:
            break
        step = 2.0 / (it + 2.0)
        direction = -x.copy()
        direction[vertex] += 1.0
        current = objectives[-1]
        # halve until the move does not increase the frozen-sample objective
        for _ in range(40):
            candidate = x + step * direction
            value = _objective(_log_weights(candidate), ratios, n)
            if value <= current + 1e-15:
                break
            step *= 0.5
        else:
            break
        x = candidate
        objectives.append(value)
    x = np.clip(x, 0.0, 1.0)
    x /= x.sum()
    weights = MixtureWeights(x)
    trace = {"objectives": objectives, "gaps": gaps, "iterations": len(gaps)}
    return weights, objectives[-1], trace


def kkt_certificate(
    candidate_index: int,
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
) -> KktCertificate:
    """Closed-form KKT verification that the candidate singleton is optimal.

    At the singleton the equality multiplier is 1/n and the inequality
    multiplier for member k is (1 - E_null[p_k/p_cand])/n, computed from the
    exact Gaussian ratio expectation with no sampling.
    """
    if not 0 <= candidate_index < len(models):
        raise ParameterError(f"candidate_index {candidate_index} out of range")
    n = models[0].n
    mu = np.zeros(len(models))
    diverged = []
    max_violation = 0.0
    for k, model in enumerate(models):
        if k == candidate_index:
            continue
        ratio = ratio_expectation(null_sigma2, models[candidate_index], model)
        if np.isinf(ratio):
            diverged.append(k)
            mu[k] = -np.inf
            continue
        mu[k] = (1.0 - ratio) / n
        max_violation = max(max_violation, ratio - 1.0)
    verified = not diverged and max_violation <= KKT_TOLERANCE
    return KktCertificate(
        lam=1.0 / n,
        mu=mu,
        max_violation=max(0.0, max_violation) if not diverged else float("inf"),
        singleton_verified=verified,
        candidate_index=candidate_index,
        diverged_indices=tuple(diverged),
    )


def utility(
    q: MixtureWeights,
    r: MixtureWeights,
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
    h0_samples: np.ndarray,
    h1_sample_seed: int,
    tilt_grid: Sequence[float] = DEFAULT_TILT_GRID,
    h1_trials: Optional[int] = None,
    with_se: bool = False,
):
    """Game utility sup_{t<=0} [t E_null[g(.;q)] - (1/n) log E_mix(r)[e^{t n g(.;q)}]].

    The null expectation uses the frozen samples; the mixture expectation is
    Monte Carlo with component choices and white draws derived from
    h1_sample_seed only (operating points are coupled).  With with_se=True
    also returns a delta-method standard error at the maximizing tilt.
    """
    tilt_grid = np.asarray(list(tilt_grid), dtype=float)
    if tilt_grid.size == 0 or np.any(tilt_grid > 0.0):
        raise ParameterError("tilt grid must be nonempty with all tilts <= 0")
    n = models[0].n
    g0 = logsumexp(
        _ratio_matrix(h0_samples, models, null_sigma2) + _log_weights(q.w), axis=1
    ) / n
    mean_g0 = float(np.mean(g0))
    trials = h1_trials if h1_trials is not None else h0_samples.shape[0]
    g1_chunks = [
        logsumexp(
            _ratio_matrix(block, models, null_sigma2) + _log_weights(q.w), axis=1
        )
        / n
        for block in sample_mixture_blocks(models, r, trials, h1_sample_seed)
    ]
    g1 = np.concatenate(g1_chunks)
    best = -np.inf
    best_t = 0.0
    for t in tilt_grid:
        bracket = t * mean_g0 - (logsumexp(t * n * g1) - np.log(trials)) / n
        if bracket > best:
            best, best_t = float(bracket), float(t)
    if not with_se:
        return best
    # delta-method SE at the chosen tilt
    se0 = abs(best_t) * float(np.std(g0)) / np.sqrt(len(g0))
    shifted = np.exp(best_t * n * g1 - np.max(best_t * n * g1))
    se1 = float(np.std(shifted) / (np.sqrt(trials) * np.mean(shifted))) / n
    return best, float(np.hypot(se0, se1))


def regularity_probe(
    r_star: MixtureWeights,
    r_dir: MixtureWeights,
    beta_ladder: Sequence[float],
    models: Sequence[ToeplitzGaussian],
    null_sigma2: float,
    h0_samples: np.ndarray,
    h1_sample_seed: int,
    tilt_grid: Sequence[float] = DEFAULT_TILT_GRID,
    h1_trials: Optional[int] = None,
) -> List[dict]:
    """Utility gap of the saddle candidate under simplex perturbations.

    For each beta, perturbs the operating point toward r_dir and compares the
    best response (the perturbed log-likelihood ratio detector) against the
    unperturbed detector, on shared frozen/coupled samples.  Returns one
    record per beta with fields beta, gap, se.
    """
    betas = np.asarray(list(beta_ladder), dtype=float)
    if np.any(betas < 0.0):
        raise ParameterError("beta values must be >= 0")
    records = []
    for beta in betas:
        blend = MixtureWeights((1.0 - beta) * r_star.w + beta * r_dir.w)
        best_response, se_a = utility(
            blend, blend, models, null_sigma2, h0_samples, h1_sample_seed,
            tilt_grid, h1_trials, with_se=True,
        )
        candidate, se_b = utility(
            r_star, blend, models, null_sigma2, h0_samples, h1_sample_seed,
            tilt_grid, h1_trials, with_se=True,
        )
        records.append(
            {
                "beta": float(beta),
                "gap": float(best_response - candidate),
                "se": float(np.hypot(se_a, se_b)),
            }
        )
    return records
