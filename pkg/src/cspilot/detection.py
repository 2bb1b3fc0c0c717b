"""Massive-MIMO energy detection of an active UE.

With M_BS antennas, unit-variance noise and a received-power product gP,
the normalized energy ``(1/M_BS) ||y||^2`` concentrates around 1 when the
UE is silent and around 1 + gP when it transmits; a threshold between the
two separates the hypotheses with error probability vanishing in M_BS.

Both energies are Gamma distributed under the Gaussian signal model:
shape M_BS with scale 1/M_BS (silent) or (1+gP)/M_BS (active).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

_MC_CHUNK = 4096


@dataclass(frozen=True)
class DetectionConfig:
    """Antenna count, received-power product gP, and optional preset threshold.

    The threshold, when preset, must lie in the open interval (1, 1 + gP);
    with gP = 0 the hypotheses coincide, any threshold above 1 is accepted,
    and only Monte-Carlo operations are meaningful.
    """

    antenna_count: int
    pathloss_power: float
    threshold: float | None = None

    def __post_init__(self):
        if self.antenna_count < 1:
            raise ValueError("antenna_count must be at least 1")
        if self.pathloss_power < 0:
            raise ValueError("pathloss_power must be nonnegative")
        if self.threshold is not None:
            if self.threshold <= 1:
                raise ValueError("threshold must exceed 1")
            if self.pathloss_power > 0 and self.threshold >= 1 + self.pathloss_power:
                raise ValueError("threshold must be below 1 + pathloss_power")


def energy_metric(received: np.ndarray) -> float:
    """Average per-antenna energy ``(1/M_BS) ||y||^2``."""
    received = np.asarray(received)
    if received.size == 0:
        raise ValueError("received vector is empty")
    return float(np.mean(np.abs(received) ** 2))


def _energy_laws(config: DetectionConfig):
    m = config.antenna_count
    silent = stats.gamma(a=m, scale=1.0 / m)
    active = stats.gamma(a=m, scale=(1.0 + config.pathloss_power) / m)
    return silent, active


def optimal_threshold(config: DetectionConfig, tol: float = 1e-9) -> float:
    """Density-crossing threshold, located by bisection on (1, 1 + gP).

    The crossing of the two energy densities minimizes the equal-prior
    error probability.  Raises ``ValueError`` when the densities do not
    cross inside the open interval (degenerate gP close to 0).
    """
    if config.pathloss_power <= 0:
        raise ValueError("optimal threshold undefined for pathloss_power = 0")
    silent, active = _energy_laws(config)

    def gap(x: float) -> float:
        return silent.logpdf(x) - active.logpdf(x)

    lo, hi = 1.0, 1.0 + config.pathloss_power
    if not (gap(lo) > 0 > gap(hi)):
        raise ValueError("energy densities do not cross inside (1, 1 + gP)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect(energy: float, threshold: float) -> int:
    """1 when the energy strictly exceeds the threshold, else 0."""
    return int(energy > threshold)


def error_probability(config: DetectionConfig, threshold: float | None = None) -> float:
    """Analytic equal-prior error probability at the given (or optimal) threshold."""
    if threshold is None:
        threshold = config.threshold
    if threshold is None:
        threshold = optimal_threshold(config)
    silent, active = _energy_laws(config)
    return float(0.5 * (silent.sf(threshold) + active.cdf(threshold)))


def error_probability_mc(
    config: DetectionConfig, trials: int, rng: np.random.Generator
) -> float:
    """Monte-Carlo equal-prior error probability with explicit h, z draws.

    Activity alternates deterministically between trials (exact equal
    priors); each trial draws a fresh i.i.d. complex Gaussian channel and
    noise vector, so the active-case energy reflects the full signal model
    rather than the Gamma shorthand.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    threshold = config.threshold
    if threshold is None:
        threshold = optimal_threshold(config)
    m = config.antenna_count
    amp = np.sqrt(config.pathloss_power)
    errors = 0
    done = 0
    while done < trials:
        n = min(_MC_CHUNK, trials - done)
        sent = ((np.arange(done, done + n) % 2) == 0).astype(float)
        h = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)
        z = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)
        y = amp * h * sent[:, None] + z
        energies = np.mean(np.abs(y) ** 2, axis=1)
        decisions = (energies > threshold).astype(float)
        errors += int(np.sum(decisions != sent))
        done += n
    return errors / trials


def min_threshold_for_network(
    pathloss_powers,
    antenna_count: int,
    max_error_probability: float | None = None,
) -> float:
    """Smallest per-UE optimal threshold, optionally restricted to qualified UEs.

    A UE qualifies when its optimal-threshold error probability does not
    exceed ``max_error_probability`` (all UEs qualify when the cap is
    None).  Raises ``ValueError`` on an empty list or when no UE qualifies.
    """
    powers = list(pathloss_powers)
    if not powers:
        raise ValueError("pathloss_powers is empty")
    if any(p <= 0 for p in powers):
        raise ValueError("all pathloss powers must be positive")
    qualified = []
    for p in powers:
        config = DetectionConfig(antenna_count=antenna_count, pathloss_power=p)
        threshold = optimal_threshold(config)
        if max_error_probability is not None:
            if error_probability(config, threshold) > max_error_probability:
                continue
        qualified.append(threshold)
    if not qualified:
        raise ValueError("no UE meets the error-probability cap")
    return min(qualified)
