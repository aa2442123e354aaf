"""Error exponents of the stationary-Gaussian-in-white-noise detection problem.

The matched-detector exponent of a signal PSD phi at noise floor sigma^2 is

    (1/4pi) * int [log(1 + phi/sigma^2) - (phi/sigma^2)/(1 + phi/sigma^2)] dw,

the large-n limit of the normalized KL divergence between the null and the
signal-plus-noise model.  `kl_rate` gives the finite-n counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ParameterError
from .gaussian_model import build_model, gaussian_kl, white_model
from .spectral import PsdGrid, UncertaintySet, circle_mean


@dataclass(frozen=True)
class ExponentValue:
    """Error exponent in nats per sample for one PSD."""

    value: float
    psd_label: str
    sigma2: float


def error_exponent(psd: PsdGrid, sigma2: float) -> ExponentValue:
    """Matched-LRT error exponent of the PSD by trapezoid quadrature."""
    if sigma2 <= 0:
        raise ParameterError(f"sigma2 must be > 0, got {sigma2}")
    snr = psd.values / sigma2
    integrand = np.log1p(snr) - snr / (1.0 + snr)
    return ExponentValue(
        value=0.5 * circle_mean(integrand), psd_label=psd.label, sigma2=sigma2
    )


def genie_bound(uset: UncertaintySet, sigma2: float) -> Tuple[float, int]:
    """Smallest matched exponent over the set and its member index.

    Upper-bounds any robust exponent; ties go to the first member.
    """
    values = [error_exponent(psd, sigma2).value for psd in uset.members]
    idx = int(np.argmin(values))
    return values[idx], idx


def kl_rate(psd: PsdGrid, sigma2: float, n: int) -> float:
    """Normalized finite-n KL divergence (1/n) D(white || signal model)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return gaussian_kl(white_model(sigma2, n), build_model(psd, sigma2, n)) / n
