"""Value types shared across the package.

Amplitudes are stored as ``complex128`` numpy arrays; scalars use Python
``complex``. All types are frozen dataclasses and safe to share between
threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "CoinOperator",
    "DefectConfig",
    "InitialState",
    "WalkerState",
    "make_coin",
    "make_initial_state",
    "phase_factor",
    "window_for",
]


@dataclass(frozen=True)
class CoinOperator:
    """Real symmetric coin ``[[cos t, sin t], [sin t, -cos t]]``."""

    theta: float
    matrix: NDArray[np.complex128] = field(repr=False, compare=False)

    @property
    def cos(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def sin(self) -> float:
        return float(self.matrix[0, 1].real)


@dataclass(frozen=True)
class DefectConfig:
    """Phase defect at site ``m``; departing amplitudes pick up ``exp(2 pi i phi)``."""

    m: int
    phi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.phi < 1.0):
            raise ValueError(f"phi must lie in [0, 1), got {self.phi!r}")

    @property
    def omega(self) -> complex:
        return phase_factor(self.phi)


@dataclass(frozen=True)
class InitialState:
    """Localized coin state ``(cos(varphi) e^{i delta}, sin(varphi))`` at ``start``."""

    varphi: float = math.pi / 4
    delta: float = math.pi / 2
    start: int = 0

    @property
    def coin_amplitudes(self) -> tuple[complex, complex]:
        return (
            math.cos(self.varphi) * cmath.exp(1j * self.delta),
            complex(math.sin(self.varphi)),
        )


@dataclass(frozen=True)
class WalkerState:
    """Amplitudes on the contiguous window ``lo .. lo + len(alpha) - 1``.

    ``alpha`` holds the coin-0 component, ``beta`` the coin-1 component.
    """

    lo: int
    alpha: NDArray[np.complex128] = field(repr=False)
    beta: NDArray[np.complex128] = field(repr=False)
    t: int = 0

    def __post_init__(self) -> None:
        if self.alpha.shape != self.beta.shape or self.alpha.ndim != 1:
            raise ValueError("alpha and beta must be 1-D arrays of equal length")
        self.alpha.flags.writeable = False
        self.beta.flags.writeable = False

    @property
    def hi(self) -> int:
        return self.lo + len(self.alpha) - 1

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.lo, self.hi + 1)

    def index(self, n: int) -> int:
        i = n - self.lo
        if not 0 <= i < len(self.alpha):
            raise IndexError(f"position {n} outside window [{self.lo}, {self.hi}]")
        return i

    def amplitudes(self, n: int) -> tuple[complex, complex]:
        i = self.index(n)
        return complex(self.alpha[i]), complex(self.beta[i])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.alpha) ** 2 + np.abs(self.beta) ** 2))

    def vdot(self, other: WalkerState) -> complex:
        """Inner product ``<self|other>``; windows must coincide."""
        if self.lo != other.lo or len(self.alpha) != len(other.alpha):
            raise ValueError("states live on different windows")
        return complex(np.vdot(self.alpha, other.alpha) + np.vdot(self.beta, other.beta))


def phase_factor(phi: float) -> complex:
    """``exp(2 pi i phi)``, exact at ``phi`` in {0, 1/2}."""
    if phi == 0.0:
        return 1.0 + 0.0j
    if phi == 0.5:
        return -1.0 + 0.0j
    return cmath.exp(2j * math.pi * phi)


def make_coin(theta: float) -> CoinOperator:
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    c, s = math.cos(theta), math.sin(theta)
    matrix = np.array([[c, s], [s, -c]], dtype=np.complex128)
    matrix.flags.writeable = False
    return CoinOperator(theta=theta, matrix=matrix)


def window_for(start: int, steps: int) -> tuple[int, int]:
    """Light-cone window ``(lo, size)`` for a ``steps``-long run from ``start``."""
    lo = start - steps - 2
    return lo, 2 * steps + 5


def make_initial_state(ini: InitialState, steps: int = 0) -> WalkerState:
    """Place the initial coin state at ``ini.start``.

    The window is sized for a run of ``steps`` steps so the walk never
    reaches its edge.
    """
    lo, size = window_for(ini.start, steps)
    alpha = np.zeros(size, dtype=np.complex128)
    beta = np.zeros(size, dtype=np.complex128)
    a, b = ini.coin_amplitudes
    alpha[ini.start - lo] = a
    beta[ini.start - lo] = b
    return WalkerState(lo=lo, alpha=alpha, beta=beta, t=0)
