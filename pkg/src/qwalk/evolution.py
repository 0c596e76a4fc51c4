"""Exact time evolution under one coin-then-shift step."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from qwalk.core import CoinOperator, DefectConfig, InitialState, WalkerState, make_initial_state

__all__ = [
    "Distribution",
    "WindowOverflowError",
    "distribution",
    "evolve",
    "spread_stddev",
    "step",
    "time_averaged_probability",
]


class WindowOverflowError(RuntimeError):
    """The walk reached the edge of its storage window."""


@dataclass(frozen=True)
class Distribution:
    lo: int
    p: NDArray[np.float64] = field(repr=False)

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.lo, self.lo + len(self.p))

    def __getitem__(self, n: int) -> float:
        i = n - self.lo
        if 0 <= i < len(self.p):
            return float(self.p[i])
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(n): float(v) for n, v in zip(self.positions, self.p)}


def step(state: WalkerState, coin: CoinOperator, defect: DefectConfig) -> WalkerState:
    """Apply the coin, then the conditional shift.

    Amplitude leaving the defect site is multiplied by ``defect.omega``:
    coin-0 moves one site left, coin-1 one site right.
    """
    a, b = state.alpha, state.beta
    if a[0] != 0 or b[0] != 0 or a[-1] != 0 or b[-1] != 0:
        raise WindowOverflowError(
            f"amplitude at window edge (window [{state.lo}, {state.hi}], t={state.t})"
        )
    c, s = coin.cos, coin.sin
    left = c * a + s * b
    right = s * a - c * b
    k = defect.m - state.lo
    if 0 <= k < len(a):
        w = defect.omega
        left[k] *= w
        right[k] *= w
    new_a = np.zeros_like(a)
    new_b = np.zeros_like(b)
    new_a[:-1] = left[1:]
    new_b[1:] = right[:-1]
    return WalkerState(lo=state.lo, alpha=new_a, beta=new_b, t=state.t + 1)


def evolve(state: WalkerState, coin: CoinOperator, defect: DefectConfig, steps: int) -> WalkerState:
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    for _ in range(steps):
        state = step(state, coin, defect)
    return state


def distribution(state: WalkerState) -> Distribution:
    p = np.abs(state.alpha) ** 2 + np.abs(state.beta) ** 2
    return Distribution(lo=state.lo, p=p)


def spread_stddev(dist: Distribution) -> float:
    x = dist.positions.astype(np.float64)
    mean = float(np.dot(dist.p, x))
    var = float(np.dot(dist.p, (x - mean) ** 2))
    return var ** 0.5


def time_averaged_probability(
    ini: InitialState,
    coin: CoinOperator,
    defect: DefectConfig,
    sites: Iterable[int],
    t_start: int,
    t_stop: int,
) -> dict[int, tuple[float, float]]:
    """Mean and standard deviation of P(n) over late same-parity steps.

    Only steps ``t`` in ``[t_start, t_stop]`` with ``t - (m - start)`` even
    are sampled; the other parity leaves the defect site empty.

    Returns
    -------
    dict
        ``site -> (mean, std)`` over the sampled steps.
    """
    if t_stop < t_start:
        raise ValueError("t_stop must not precede t_start")
    sites = list(sites)
    parity = (defect.m - ini.start) % 2
    first = t_start + ((parity - t_start) % 2)
    state = evolve(make_initial_state(ini, t_stop), coin, defect, first)
    samples = []
    t = first
    while t <= t_stop:
        d = distribution(state)
        samples.append([d[n] for n in sites])
        if t + 2 > t_stop:
            break
        state = step(step(state, coin, defect), coin, defect)
        t += 2
    if not samples:
        raise ValueError(f"no step of the required parity in [{t_start}, {t_stop}]")
    arr = np.asarray(samples)
    mean, std = arr.mean(axis=0), arr.std(axis=0)
    return {n: (float(mu), float(sd)) for n, mu, sd in zip(sites, mean, std)}
