"""Asymptotic localized probabilities from bound-state overlaps.

Each bound state contributes ``|<psi|Phi>|^2 (|alpha_bar|^2 + |beta_bar|^2)``
at a site; contributions of different bound states are summed as
probabilities. Cross terms oscillate in time and are averaged out when
comparing with simulation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

from qwalk.boundstate import BoundState, find_bound_states
from qwalk.core import CoinOperator, DefectConfig, InitialState, make_coin
from qwalk.evolution import time_averaged_probability

__all__ = [
    "LocalizationReport",
    "asymptotic_probability",
    "defect_position_scan",
    "dress_one_step",
    "localization_report",
    "overlap_even",
    "overlap_odd",
    "theta_scan",
]

T = TypeVar("T")
R = TypeVar("R")


def overlap_even(ini: InitialState, bs: BoundState) -> complex:
    """``<psi|Phi_ini>`` for a walker sitting at ``ini.start``."""
    a0, b0 = ini.coin_amplitudes
    ab, bb = bs.amplitudes(ini.start - bs.m)
    return a0 * ab.conjugate() + b0 * bb.conjugate()


def dress_one_step(
    ini: InitialState, coin: CoinOperator, defect: DefectConfig
) -> tuple[complex, complex]:
    """Amplitudes ``(coin 0 at start-1, coin 1 at start+1)`` after one step."""
    a0, b0 = ini.coin_amplitudes
    c, s = coin.cos, coin.sin
    w = defect.omega if defect.m == ini.start else 1.0
    return w * (a0 * c + b0 * s), w * (a0 * s - b0 * c)


def overlap_odd(
    ini: InitialState, coin: CoinOperator, defect: DefectConfig, bs: BoundState
) -> complex:
    """``<psi|U Phi_ini>`` using the one-step dressed initial state."""
    left, right = dress_one_step(ini, coin, defect)
    ab, _ = bs.amplitudes(ini.start - 1 - bs.m)
    _, bb = bs.amplitudes(ini.start + 1 - bs.m)
    return ab.conjugate() * left + bb.conjugate() * right


def asymptotic_probability(
    ini: InitialState,
    coin: CoinOperator,
    defect: DefectConfig,
    bounds: Sequence[BoundState],
    l: int,
    n_steps: int | None = None,
) -> float:
    """Localized probability at site ``l`` in the long-time limit.

    The overlap uses the bare initial state when ``m - start`` is even and
    the one-step dressed state when it is odd. Sites farther than a bound
    state's window contribute zero.

    ``n_steps`` optionally inserts the ``lam**N`` phase explicitly; being
    unimodular it does not change the result.
    """
    odd = (defect.m - ini.start) % 2 == 1
    total = 0.0
    for bs in bounds:
        k = l - bs.m
        if abs(k) > bs.window:
            continue
        ov = overlap_odd(ini, coin, defect, bs) if odd else overlap_even(ini, bs)
        if n_steps is not None:
            ov = ov * bs.lam ** n_steps
        ab, bb = bs.amplitudes(k)
        total += abs(ab * ov) ** 2 + abs(bb * ov) ** 2
    return total


def _pmap(fn: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _predict(theta: float, phi: float, m: int, ini: InitialState, l: int) -> float:
    bounds = find_bound_states(theta, phi, m)
    return asymptotic_probability(ini, make_coin(theta), DefectConfig(m, phi), bounds, l)


def theta_scan(
    thetas: Iterable[float],
    phi: float,
    m: int,
    ini: InitialState,
    l: int,
    workers: int = 1,
) -> dict[float, float]:
    thetas = list(thetas)
    vals = _pmap(lambda th: _predict(th, phi, m, ini, l), thetas, workers)
    return dict(zip(thetas, vals))


def defect_position_scan(
    positions: Iterable[int],
    theta: float,
    phi: float,
    ini: InitialState,
    workers: int = 1,
) -> dict[int, float]:
    """Asymptotic probability at the defect site for each defect position."""
    positions = list(positions)
    vals = _pmap(lambda m: _predict(theta, phi, m, ini, m), positions, workers)
    return dict(zip(positions, vals))


@dataclass(frozen=True)
class LocalizationReport:
    theta: float
    phi: float
    m: int
    predicted: dict[int, float]
    simulated: dict[int, float]
    oscillation: dict[int, float]
    steps_used: tuple[int, int]
    truncated: frozenset[int] = field(default_factory=frozenset)

    def relative_deviation(self, n: int) -> float:
        p = self.predicted[n]
        return abs(self.simulated[n] - p) / p if p > 0 else math.inf


def localization_report(
    theta: float,
    phi: float,
    m: int,
    ini: InitialState,
    positions: Iterable[int],
    t_start: int,
    t_stop: int,
) -> LocalizationReport:
    """Compare predicted localized probabilities with time-averaged simulation.

    ``oscillation`` records the standard deviation of the simulated
    probability over the sampled steps.
    """
    positions = list(positions)
    coin = make_coin(theta)
    defect = DefectConfig(m, phi)
    bounds = find_bound_states(theta, phi, m)
    predicted = {n: asymptotic_probability(ini, coin, defect, bounds, n) for n in positions}
    truncated = frozenset(n for n in positions if any(abs(n - b.m) > b.window for b in bounds))
    sim = time_averaged_probability(ini, coin, defect, positions, t_start, t_stop)
    return LocalizationReport(
        theta=theta,
        phi=phi,
        m=m,
        predicted=predicted,
        simulated={n: v[0] for n, v in sim.items()},
        oscillation={n: v[1] for n, v in sim.items()},
        steps_used=(t_start, t_stop),
        truncated=truncated,
    )
