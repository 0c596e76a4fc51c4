"""Simulation-only ground truth for the bound-state spectrum.

Nothing here uses the closed-form bound-state algebra: eigenphases come
from the DFT of the return amplitude and the decay factor from a fit to
time-averaged probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from qwalk.core import CoinOperator, DefectConfig, InitialState, WalkerState, window_for
from qwalk.evolution import step, time_averaged_probability

__all__ = [
    "InsufficientSignalError",
    "SpectrumEstimate",
    "autocorrelation_series",
    "decay_profile_fit",
    "estimate_eigenphases",
    "probe_state",
]

PEAK_FACTOR = 3.0
NOISE_FLOOR = 1e-9  # round-off level of a normalized DFT
SHARPEN_FACTOR = 16
SHARPEN_MIN_LEN = 256
SHARPEN_RATIO = 0.5
STATIONARITY_TOL = 0.1
FLAT_RATE = 0.99
FIT_OFFSETS = range(1, 6)  # in units of two sites


class InsufficientSignalError(RuntimeError):
    """No stationary decaying profile to fit."""


@dataclass(frozen=True)
class SpectrumEstimate:
    eigenphases: list[float]
    resolution: float
    peak_weights: list[float]


def probe_state(m: int, n_max: int) -> WalkerState:
    """Coin state ``(1, 1)/sqrt(2)`` at the defect, windowed for ``2 n_max`` steps.

    At half-integer defect phase the two bound states come in a conjugate
    pair and ``(1, +-i)/sqrt(2)`` is orthogonal to one of them; the real
    coin state overlaps both equally.
    """
    lo, size = window_for(m, 2 * n_max)
    alpha = np.zeros(size, dtype=np.complex128)
    beta = np.zeros(size, dtype=np.complex128)
    alpha[m - lo] = 1 / math.sqrt(2)
    beta[m - lo] = 1 / math.sqrt(2)
    return WalkerState(lo=lo, alpha=alpha, beta=beta)


def autocorrelation_series(
    ini: WalkerState, coin: CoinOperator, defect: DefectConfig, n_max: int
) -> NDArray[np.complex128]:
    """Return amplitudes ``<ini|U^(2N)|ini>`` for ``N = 0 .. n_max - 1``."""
    out = np.empty(n_max, dtype=np.complex128)
    state = ini
    for n in range(n_max):
        out[n] = ini.vdot(state)
        if n + 1 < n_max:
            state = step(step(state, coin, defect), coin, defect)
    return out


def estimate_eigenphases(c: NDArray[np.complex128]) -> SpectrumEstimate:
    """Point-spectrum phases from the DFT of an autocorrelation series.

    A bin is a peak if it is a circular local maximum of the DFT magnitude
    and exceeds three times the median magnitude (and the round-off
    floor). For series of at least
    256 samples a peak must also be sharp: its normalized height may not
    fall below half of what the first sixteenth of the series shows near
    the same phase. Point-spectrum weight keeps its height as the series
    grows, while band-edge continuum spikes shrink.
    """
    c = np.asarray(c, dtype=np.complex128)
    size = len(c)
    if size == 0 or size & (size - 1):
        raise ValueError(f"series length must be a power of two, got {size}")
    mag = np.abs(np.fft.fft(c)) / size
    thresh = max(PEAK_FACTOR * np.median(mag), NOISE_FLOOR)
    is_peak = (mag > np.roll(mag, 1)) & (mag >= np.roll(mag, -1)) & (mag > thresh)
    bins = np.flatnonzero(is_peak)
    if size >= SHARPEN_MIN_LEN:
        short = size // SHARPEN_FACTOR
        mag_short = np.abs(np.fft.fft(c[:short])) / short
        keep = []
        for b in bins:
            js = int(round(b / SHARPEN_FACTOR))
            near = mag_short[[(js - 1) % short, js % short, (js + 1) % short]].max()
            if mag[b] >= SHARPEN_RATIO * near:
                keep.append(b)
        bins = np.asarray(keep, dtype=np.int64)
    res = 2 * math.pi / size
    return SpectrumEstimate(
        eigenphases=[float(b * res) for b in bins],
        resolution=res,
        peak_weights=[float(mag[b]) for b in bins],
    )


def _fit_rate(ks: NDArray[np.float64], p: NDArray[np.float64]) -> float:
    slope = np.polyfit(ks, np.log(p), 1)[0]
    return float(math.exp(slope / 2))


def decay_profile_fit(
    coin: CoinOperator,
    defect: DefectConfig,
    ini: InitialState,
    t_window: tuple[int, int],
    side: str | None = None,
) -> float:
    """Estimate ``|y|`` from the spatial decay of time-averaged probability.

    Probabilities at offsets ``+-2, +-4, ... +-10`` from the defect fall as
    ``|y|**|k|``; the slope of their logarithm gives the rate. Both sides
    share one rate unless ``side`` is ``"left"`` or ``"right"``.

    Raises
    ------
    InsufficientSignalError
        If a fit site carries less than 1e-12 probability, the profile is
        not stationary in time, or it does not decay in space.
    """
    if side not in (None, "left", "right"):
        raise ValueError(f"side must be 'left', 'right' or None, got {side!r}")
    t0, t1 = t_window
    m = defect.m
    ks = np.array(list(FIT_OFFSETS), dtype=np.float64)
    left_sites = [m - 2 * int(k) for k in ks]
    right_sites = [m + 2 * int(k) for k in ks]
    sites = left_sites + right_sites
    mid = (t0 + t1) // 2
    early = time_averaged_probability(ini, coin, defect, sites, t0, mid)
    late = time_averaged_probability(ini, coin, defect, sites, mid + 1, t1)
    p_early = np.array([early[n][0] for n in sites])
    p_late = np.array([late[n][0] for n in sites])
    if np.any(p_early < 1e-12) or np.any(p_late < 1e-12):
        raise InsufficientSignalError("probability below 1e-12 at a fit site")
    drift = np.abs(p_late - p_early) / p_early
    if np.max(drift) > STATIONARITY_TOL:
        raise InsufficientSignalError(
            f"profile drifts by {np.max(drift):.1%} across the window; nothing localized to fit"
        )
    p = 0.5 * (p_early + p_late)
    pl, pr = p[: len(ks)], p[len(ks) :]
    if side == "left":
        rate = _fit_rate(ks, pl)
    elif side == "right":
        rate = _fit_rate(ks, pr)
    else:
        # common slope, separate intercepts
        ones, zeros = np.ones_like(ks), np.zeros_like(ks)
        X = np.column_stack([np.r_[ks, ks], np.r_[ones, zeros], np.r_[zeros, ones]])
        coef = np.linalg.lstsq(X, np.log(p), rcond=None)[0]
        rate = float(math.exp(coef[0] / 2))
    if rate >= FLAT_RATE:
        raise InsufficientSignalError(f"no spatial decay (fitted rate {rate:.4f})")
    return rate

