"""Network-level collision analysis for aggressive pilot reuse.

A group of K_G UEs shares one set of pilot dimensions across N cells.
Each UE lands in a uniformly chosen cell with probability alpha (its
coverage probability) or is in outage otherwise.  A cell holding exactly
one group member — a singleton — trains successfully; cells holding two
or more suffer a pilot collision.  Closed forms for the singleton count
and collision probability drive the multiplexing metrics and the reuse
gain; Monte-Carlo placement cross-validates them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import OfdmParams

_MC_CHUNK = 8192


@dataclass(frozen=True)
class NetworkModel:
    """N cells, per-UE coverage probability alpha, and the shared group size."""

    cell_count: int
    coverage_prob: float
    group_size: int
    groups: int | None = None  # bookkeeping: how many groups the band hosts

    def __post_init__(self):
        if self.cell_count < 1:
            raise ValueError("cell_count must be positive")
        if not (0 < self.coverage_prob <= 1):
            raise ValueError("coverage_prob must lie in (0, 1]")
        if self.group_size < 1:
            raise ValueError("group_size must be positive")
        if self.groups is not None and self.groups < 1:
            raise ValueError("groups must be positive when given")


@dataclass
class PlacementOutcome:
    """Per-UE cell assignment (-1 marks outage) and the singleton-cell count."""

    cell_of_ue: np.ndarray
    singleton_count: int


def place_ues(model: NetworkModel, rng: np.random.Generator) -> PlacementOutcome:
    """Drop each group member independently: outage w.p. 1-alpha, else uniform cell."""
    covered = rng.random(model.group_size) < model.coverage_prob
    cells = rng.integers(0, model.cell_count, size=model.group_size)
    assignment = np.where(covered, cells, -1)
    occupancy = np.bincount(assignment[covered], minlength=model.cell_count)
    return PlacementOutcome(
        cell_of_ue=assignment, singleton_count=int((occupancy == 1).sum())
    )


def expected_singletons(model: NetworkModel) -> float:
    """E[number of singleton cells] = alpha K_G (1 - alpha/N)^(K_G - 1)."""
    a, n, k = model.coverage_prob, model.cell_count, model.group_size
    return a * k * (1.0 - a / n) ** (k - 1)


def collision_probability(model: NetworkModel) -> float:
    """Probability a given UE fails to train: 1 - alpha (1 - alpha/N)^(K_G - 1)."""
    a, n, k = model.coverage_prob, model.cell_count, model.group_size
    return 1.0 - a * (1.0 - a / n) ** (k - 1)


def optimal_group_size(model: NetworkModel) -> int:
    """Integer group size maximizing the expected singleton count.

    Scans K_G from 1 to ceil(10 N / alpha), which safely brackets the peak
    near N / alpha.  Exact ties resolve to the larger group size.
    """
    a, n = model.coverage_prob, model.cell_count
    upper = int(np.ceil(10.0 * n / a))
    sizes = np.arange(1, upper + 1, dtype=float)
    values = a * sizes * (1.0 - a / n) ** (sizes - 1.0)
    best = 0
    for k in range(1, len(values)):
        if values[k] >= values[best]:
            best = k
    return int(sizes[best])


@dataclass(frozen=True)
class RhoMetrics:
    """Simultaneously supportable UEs under the four training schemes."""

    fq: float
    cs: float
    ag_fq: float
    ag_cs: float


def rho_metrics(model: NetworkModel, params: OfdmParams) -> RhoMetrics:
    """Evaluate the four multiplexing metrics.

    Orthogonal schemes divide the WT tones by the per-UE budget (tap_count
    for dense training, pilot_count for sparse training).  Aggressive reuse
    instead packs one group per L = budget + 1 dimensions and harvests the
    expected singletons of every group.
    """
    wt = params.bandwidth_time_product
    a = model.coverage_prob
    singles = expected_singletons(model)
    return RhoMetrics(
        fq=wt * a / params.tap_count,
        cs=wt * a / params.pilot_count,
        ag_fq=wt * singles / (params.tap_count + 1),
        ag_cs=wt * singles / (params.pilot_count + 1),
    )


def reuse_gain(p_out: float, model: NetworkModel, params: OfdmParams) -> float:
    """Aggressive-over-orthogonal ratio rho_ag_cs / rho_cs at outage p_out.

    Equals ``(M K_G / (M+1)) (1 - (1-p_out)/N)^(K_G-1)``; increasing in
    p_out because emptier cells leave more singletons per group.
    """
    if not (0 <= p_out < 1):
        raise ValueError("p_out must lie in [0, 1)")
    m = params.pilot_count
    n, k = model.cell_count, model.group_size
    alpha = 1.0 - p_out
    return (m * k / (m + 1.0)) * (1.0 - alpha / n) ** (k - 1)


def collision_probability_mc(
    model: NetworkModel, trials: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte-Carlo collision probability with its standard error.

    Each trial places a full group and scores 1 - singletons/K_G, the
    fraction of the group that failed to train.  Placement is vectorized
    in fixed-size chunks; the chunk layout does not affect the stream of
    draws for a given generator.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    n, k = model.cell_count, model.group_size
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        batch = min(_MC_CHUNK, trials - done)
        covered = rng.random((batch, k)) < model.coverage_prob
        cells = rng.integers(0, n, size=(batch, k))
        flat = (np.arange(batch)[:, None] * n + cells)[covered]
        occupancy = np.bincount(flat, minlength=batch * n).reshape(batch, n)
        singles = (occupancy == 1).sum(axis=1)
        scores = 1.0 - singles / k
        total += float(scores.sum())
        total_sq += float((scores**2).sum())
        done += batch
    mean = total / trials
    var = max(total_sq / trials - mean**2, 0.0)
    stderr = float(np.sqrt(var / trials))
    return mean, stderr
