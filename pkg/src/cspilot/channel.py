"""OFDM system parameters, sparse multipath channels, and the pilot measurement model.

A wideband channel of delay spread tau_max sampled at bandwidth W has
``W*tau_max`` resolvable taps, of which only ``S`` are significant.  Pilot
symbols on a subset of the ``W*T`` subcarriers observe the channel through a
partial-DFT sensing matrix; this module builds those objects and synthesizes
noisy measurements ``y = sqrt(E) X h + z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OfdmParams:
    """Dimensions and energy of the pilot training problem.

    Parameters
    ----------
    bandwidth_time_product : int
        Number of OFDM subcarriers (W*T).
    tap_count : int
        Channel length in taps (W*tau_max).
    sparsity : int
        Number of significant taps S.
    pilot_count : int
        Pilot tones per UE; the usual working point is ``5 * sparsity``.
    symbol_energy : float
        Per-tone pilot symbol energy E.
    """

    bandwidth_time_product: int
    tap_count: int
    sparsity: int
    pilot_count: int
    symbol_energy: float = 1.0

    def __post_init__(self):
        if not (1 <= self.sparsity <= self.tap_count <= self.bandwidth_time_product):
            raise ValueError(
                "need 1 <= sparsity <= tap_count <= bandwidth_time_product, got "
                f"S={self.sparsity}, taps={self.tap_count}, WT={self.bandwidth_time_product}"
            )
        if self.pilot_count < self.sparsity:
            raise ValueError("pilot_count must be at least sparsity")
        if self.pilot_count > self.bandwidth_time_product:
            raise ValueError("pilot_count cannot exceed the number of subcarriers")
        if self.symbol_energy <= 0:
            raise ValueError("symbol_energy must be positive")


def default_params(**overrides) -> OfdmParams:
    """Standard working point: WT=1000, 100 taps, S=4, M=20, unit energy."""
    base = dict(
        bandwidth_time_product=1000,
        tap_count=100,
        sparsity=4,
        pilot_count=20,
        symbol_energy=1.0,
    )
    base.update(overrides)
    return OfdmParams(**base)


@dataclass
class SparseChannel:
    """S-sparse complex tap vector with its support set."""

    taps: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=complex)
        self.support = np.asarray(self.support, dtype=int)
        nz = np.flatnonzero(self.taps)
        if not np.array_equal(np.sort(self.support), nz):
            raise ValueError("support must be exactly the nonzero tap indices")


@dataclass
class SensingMatrix:
    """Partial-DFT pilot observation matrix.

    ``rows[m, d] = exp(-2j*pi*n_m*d / WT)`` for the m-th selected tone n_m and
    delay column d; every entry has unit magnitude.
    """

    rows: np.ndarray
    tone_set: np.ndarray


def sample_channel(params: OfdmParams, rng: np.random.Generator) -> SparseChannel:
    """Draw an S-sparse channel: uniform support, unit-variance complex Gaussian gains."""
    support = np.sort(rng.choice(params.tap_count, size=params.sparsity, replace=False))
    gains = (
        rng.standard_normal(params.sparsity) + 1j * rng.standard_normal(params.sparsity)
    ) / np.sqrt(2.0)
    taps = np.zeros(params.tap_count, dtype=complex)
    taps[support] = gains
    return SparseChannel(taps=taps, support=support)


def select_pilot_tones(
    params: OfdmParams, rng: np.random.Generator, exclude=()
) -> np.ndarray:
    """Pick ``pilot_count`` distinct tones uniformly from the non-excluded subcarriers.

    Returns the tone indices in ascending order.  Raises ``ValueError`` when
    fewer than ``pilot_count`` tones remain available.
    """
    excluded = np.zeros(params.bandwidth_time_product, dtype=bool)
    excl = np.asarray(list(exclude), dtype=int)
    if excl.size:
        excluded[excl] = True
    available = np.flatnonzero(~excluded)
    if available.size < params.pilot_count:
        raise ValueError(
            f"only {available.size} tones available, need {params.pilot_count}"
        )
    chosen = rng.choice(available, size=params.pilot_count, replace=False)
    return np.sort(chosen)


def build_sensing_matrix(tone_set, params: OfdmParams) -> SensingMatrix:
    """Assemble the partial-DFT matrix for the given tones, rows in ascending tone order."""
    tones = np.sort(np.asarray(list(tone_set), dtype=int))
    if tones.size and (tones[0] < 0 or tones[-1] >= params.bandwidth_time_product):
        raise ValueError("tone indices out of range")
    if np.unique(tones).size != tones.size:
        raise ValueError("tone indices must be distinct")
    n = tones[:, None].astype(float)
    d = np.arange(params.tap_count)[None, :].astype(float)
    rows = np.exp(-2j * np.pi * n * d / params.bandwidth_time_product)
    return SensingMatrix(rows=rows, tone_set=tones)


def synthesize_measurement(
    X: SensingMatrix,
    h: SparseChannel,
    params: OfdmParams,
    noise_variance: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Noisy matched-filter outputs ``y = sqrt(E) X h + z``.

    ``z`` is i.i.d. circularly-symmetric complex Gaussian with per-entry
    variance ``noise_variance``; variance 0 yields an exact noiseless
    measurement (no RNG draw).
    """
    if X.rows.shape[1] != h.taps.shape[0]:
        raise ValueError(
            f"sensing matrix has {X.rows.shape[1]} delay columns, channel has "
            f"{h.taps.shape[0]} taps"
        )
    if noise_variance < 0:
        raise ValueError("noise_variance must be nonnegative")
    y = np.sqrt(params.symbol_energy) * (X.rows @ h.taps)
    if noise_variance > 0:
        m = X.rows.shape[0]
        z = np.sqrt(noise_variance / 2.0) * (
            rng.standard_normal(m) + 1j * rng.standard_normal(m)
        )
        y = y + z
    return y
