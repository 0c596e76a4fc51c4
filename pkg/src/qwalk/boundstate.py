"""Localized eigenstates of the two-step operator.

A bound state on the sublattice of even offsets ``k = n - m`` from the
defect decays as ``y**(|k|/2)`` on both sides, where ``y`` is the squared
spatial decay factor. Eigenvalues ``lam = exp(i kappa)`` are the zeros of
the defect condition on the unit circle with ``|y| < 1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from qwalk.core import WalkerState, phase_factor

__all__ = [
    "BoundState",
    "DegenerateCoefficientError",
    "SingularError",
    "bulk_decay_factor",
    "build_bound_state",
    "compute_y",
    "default_window",
    "defect_residual",
    "defect_system_residual",
    "embed",
    "find_bound_states",
    "find_eigenvalues",
]

log = logging.getLogger(__name__)

GRID_POINTS = 8192
GRID_THRESHOLD = 1e-4  # on |f|**2
ROOT_TOL = 1e-9
Y_MARGIN = 1e-8
UNIT_GAP = 1e-9
DEDUP_PHASE = 1e-6
SYSTEM_TOL = 1e-7
TRUNCATION = 1e-14
MAX_WINDOW = 400
BUILD_TOL = 1e-7


class SingularError(ArithmeticError):
    """A denominator in the closed-form expressions vanished."""


class DegenerateCoefficientError(ArithmeticError):
    """The ratio of the left and right decay coefficients is undefined."""


def _check_theta(theta: float) -> None:
    if not (0.0 < theta < math.pi / 2):
        raise ValueError(f"theta must lie in (0, pi/2), got {theta!r}")


def _trig2(theta: float) -> tuple[float, float]:
    return math.cos(theta) ** 2, math.sin(theta) ** 2


def compute_y(lam: complex, omega: complex, theta: float) -> complex:
    """Squared decay factor ``y`` as a function of eigenvalue and defect phase."""
    _, s2 = _trig2(theta)
    den = lam * (1 + omega * omega - 2 * omega * s2)
    if abs(den) < 1e-14:
        raise SingularError("y denominator vanishes")
    return complex((lam * lam + omega * omega - 2 * lam * omega * s2) / den)


def defect_residual(lam: complex, omega: complex, theta: float) -> complex:
    """Defect condition ``f(lam)``; bound eigenvalues are its zeros.

    Raises
    ------
    SingularError
        At ``lam == 1``, ``lam * y == 1`` or a vanishing ``y`` denominator.
    """
    if abs(lam - 1) <= UNIT_GAP:
        raise SingularError("lam = 1 is excluded")
    c2, s2 = _trig2(theta)
    y = compute_y(lam, omega, theta)
    if abs(1 - lam * y) < 1e-14:
        raise SingularError("lam * y = 1")
    first = y * c2 + (y - lam) / (lam - 1) * c2 + omega * s2 - lam
    second = lam - y * c2 - omega * s2 + (lam - 1) / (1 - lam * y) * y * s2
    return complex(omega * omega * s2 * c2 - first * second)


def _residual_grid(kappa: NDArray[np.float64], omega: complex, theta: float) -> NDArray[np.float64]:
    """Vectorised ``|f|**2`` on eigenphases; singular points map to ``inf``."""
    c2, s2 = _trig2(theta)
    lam = np.exp(1j * kappa)
    with np.errstate(all="ignore"):
        y = (lam * lam + omega * omega - 2 * lam * omega * s2) / (
            lam * (1 + omega * omega - 2 * omega * s2)
        )
        first = y * c2 + (y - lam) / (lam - 1) * c2 + omega * s2 - lam
        second = lam - y * c2 - omega * s2 + (lam - 1) / (1 - lam * y) * y * s2
        out = np.abs(omega * omega * s2 * c2 - first * second) ** 2
    out[~np.isfinite(out)] = np.inf
    out[np.abs(lam - 1) <= UNIT_GAP] = np.inf
    return out


def bulk_decay_factor(lam: complex, theta: float) -> complex:
    """Decaying root of ``lam c^2 y^2 - (lam^2 - 2 lam s^2 + 1) y + lam c^2 = 0``.

    This is the decay per two sites forced by the defect-free recurrence
    alone, independent of the defect phase.
    """
    c2, s2 = _trig2(theta)
    a = lam * c2
    b = -(lam * lam - 2 * lam * s2 + 1)
    disc = np.sqrt(complex(b * b - 4 * a * a))
    r1, r2 = (-b + disc) / (2 * a), (-b - disc) / (2 * a)
    return complex(r1 if abs(r1) <= abs(r2) else r2)


def _defect_matrix(lam: complex, omega: complex, theta: float) -> NDArray[np.complex128]:
    """Two-step equations at sites m-2, m, m+2 for unknowns (C+, C-, alpha_m, beta_m)."""
    c, s = math.cos(theta), math.sin(theta)
    cot = c / s
    y = bulk_decay_factor(lam, theta)
    # amplitudes next to the defect per unit coefficient
    a_r, b_r = y, (y - lam) / (lam - 1) * cot
    a_l, b_l = y, y * (1 - lam * y) / (lam - 1) * cot
    w = omega
    return np.array(
        [
            # alpha at m
            [c * c * a_r + c * s * b_r, 0, w * s * s - lam, -w * c * s],
            # beta at m
            [0, -c * s * a_l + c * c * b_l, w * c * s, w * s * s - lam],
            # alpha at m-2
            [0, s * s * a_l - c * s * b_l - lam * a_l, w * c * c, w * c * s],
            # beta at m+2
            [c * s * a_r + s * s * b_r - lam * b_r, 0, -w * c * s, w * c * c],
        ],
        dtype=np.complex128,
    )


def defect_system_residual(lam: complex, omega: complex, theta: float) -> float:
    """Smallest singular value of the defect-site linear system.

    Built directly from the two-step update at ``m-2, m, m+2`` with the
    defect-free decaying modes on each side. It vanishes exactly at bound
    eigenvalues and shares no algebra with :func:`defect_residual`.
    """
    if abs(lam - 1) <= UNIT_GAP:
        raise SingularError("lam = 1 is excluded")
    sv = np.linalg.svd(_defect_matrix(lam, omega, theta), compute_uv=False)
    return float(sv[-1])


def _polish(kappa: float, omega: complex, theta: float, iters: int = 8) -> float:
    """Gauss-Newton on the complex residual as a function of the real phase."""
    h = 1e-7
    for _ in range(iters):
        try:
            g = defect_residual(complex(np.exp(1j * kappa)), omega, theta)
            gp = (
                defect_residual(complex(np.exp(1j * (kappa + h))), omega, theta)
                - defect_residual(complex(np.exp(1j * (kappa - h))), omega, theta)
            ) / (2 * h)
        except SingularError:
            break
        if gp == 0:
            break
        dk = -(g * gp.conjugate()).real / abs(gp) ** 2
        kappa += dk
        if abs(dk) < 1e-15:
            break
    return kappa


def find_eigenvalues(theta: float, phi: float) -> list[complex]:
    """Bound eigenvalues of the two-step operator, sorted by eigenphase.

    Dense scan of ``|f|**2`` on the unit circle, bounded refinement of
    every local minimum below a loose threshold, then Gauss-Newton polish.
    A root is kept only if it also zeroes the independent defect-site
    system; Eq.-level disagreement is logged and the root dropped.
    """
    _check_theta(theta)
    if not (0.0 <= phi < 1.0):
        raise ValueError(f"phi must lie in [0, 1), got {phi!r}")
    omega = phase_factor(phi)
    h = 2 * math.pi / GRID_POINTS
    kappa = h * np.arange(GRID_POINTS)
    F = _residual_grid(kappa, omega, theta)
    is_min = (F < np.roll(F, 1)) & (F <= np.roll(F, -1)) & (F < GRID_THRESHOLD)

    found: list[float] = []
    for i in np.flatnonzero(is_min):

        def obj(k: float) -> float:
            try:
                return abs(defect_residual(complex(np.exp(1j * k)), omega, theta))
            except SingularError:
                return math.inf

        res = minimize_scalar(
            obj, bounds=(kappa[i] - h, kappa[i] + h), method="bounded", options={"xatol": 1e-13}
        )
        k = _polish(float(res.x), omega, theta) % (2 * math.pi)
        lam = complex(np.exp(1j * k))
        if abs(lam - 1) <= UNIT_GAP:
            continue
        try:
            f = defect_residual(lam, omega, theta)
            y = compute_y(lam, omega, theta)
        except SingularError:
            continue
        if abs(f) >= ROOT_TOL or abs(y) >= 1 - Y_MARGIN:
            continue
        if defect_system_residual(lam, omega, theta) > SYSTEM_TOL:
            log.warning(
                "root kappa=%.12f of the condensed condition fails the defect-site system; dropped", k
            )
            continue
        if any(abs(np.angle(np.exp(1j * (k - q)))) <= DEDUP_PHASE for q in found):
            continue
        found.append(k)
    found.sort()
    return [complex(np.exp(1j * k)) for k in found]


@dataclass(frozen=True)
class BoundState:
    """Normalized bound eigenstate, stored on offsets ``-window .. window`` from ``m``."""

    lam: complex
    y: complex
    c_plus: complex
    c_minus: complex
    m: int
    window: int
    alpha_bar: NDArray[np.complex128] = field(repr=False)
    beta_bar: NDArray[np.complex128] = field(repr=False)
    theta: float = math.nan
    phi: float = math.nan

    @property
    def eigenphase(self) -> float:
        return float(np.angle(self.lam) % (2 * math.pi))

    @property
    def offsets(self) -> NDArray[np.int64]:
        return np.arange(-self.window, self.window + 1)

    def amplitudes(self, k: int) -> tuple[complex, complex]:
        """``(alpha_bar_k, beta_bar_k)`` at offset ``k`` from the defect."""
        if abs(k) > self.window:
            raise IndexError(f"offset {k} outside bound-state window +-{self.window}")
        return complex(self.alpha_bar[k + self.window]), complex(self.beta_bar[k + self.window])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.alpha_bar) ** 2 + np.abs(self.beta_bar) ** 2))


def default_window(y: complex) -> int:
    """Smallest even half-width with ``|y|**(W/2) < 1e-14``, capped at 400."""
    r = abs(y)
    if r == 0:
        return 2
    half = math.floor(math.log(TRUNCATION) / math.log(r)) + 1
    return min(2 * max(half, 1), MAX_WINDOW)


def coefficient_ratio(lam: complex, omega: complex, theta: float) -> complex:
    """``C- / C+`` linking the left and right decaying branches."""
    c2, s2 = _trig2(theta)
    den = omega * c2 * (2 * omega * s2 - lam - 1)
    if abs(den) < 1e-14:
        raise DegenerateCoefficientError("coefficient-ratio denominator vanishes")
    num = c2 * (lam - omega * omega) + (omega * s2 - lam) * (1 + omega * omega - 2 * omega * s2)
    return complex(num / den)


def build_bound_state(
    lam: complex, theta: float, phi: float, m: int, window: int | None = None
) -> BoundState:
    """Assemble and normalize the bound state for an accepted eigenvalue.

    Parameters
    ----------
    lam : complex
        Root returned by :func:`find_eigenvalues` for the same ``theta``, ``phi``.
    m : int
        Defect site; only sets where the state sits on the line.
    window : int, optional
        Even half-width in sites. Defaults to :func:`default_window`.
    """
    _check_theta(theta)
    omega = phase_factor(phi)
    if abs(lam - 1) <= UNIT_GAP:
        raise SingularError("lam = 1 is excluded")
    y = compute_y(lam, omega, theta)
    if abs(y) >= 1:
        raise ValueError(f"|y| = {abs(y):.6g} is not decaying; lam is not a bound eigenvalue")
    if abs(defect_residual(lam, omega, theta)) > BUILD_TOL:
        raise ValueError("lam does not satisfy the defect condition")
    if window is None:
        window = default_window(y)
    elif window <= 0 or window % 2:
        raise ValueError(f"window must be a positive even integer, got {window}")
    elif abs(y) ** (window // 2) >= TRUNCATION:
        raise ValueError(f"window {window} too small for |y| = {abs(y):.6g}")

    cot = math.cos(theta) / math.sin(theta)
    cp = 1.0 + 0.0j
    cm = coefficient_ratio(lam, omega, theta)
    right_beta = (y - lam) / (lam - 1) * cot
    left_beta = (1 - lam * y) / (lam - 1) * cot

    j = np.arange(1, window // 2 + 1)
    ypow = y ** j
    alpha = np.zeros(2 * window + 1, dtype=np.complex128)
    beta = np.zeros(2 * window + 1, dtype=np.complex128)
    centre = window
    alpha[centre] = cp
    beta[centre] = cm * left_beta
    alpha[centre + 2 * j] = cp * ypow
    beta[centre + 2 * j] = cp * right_beta * y ** (j - 1)
    alpha[centre - 2 * j] = cm * ypow
    beta[centre - 2 * j] = cm * left_beta * ypow

    scale = math.sqrt(float(np.sum(np.abs(alpha) ** 2 + np.abs(beta) ** 2)))
    alpha /= scale
    beta /= scale
    alpha.flags.writeable = False
    beta.flags.writeable = False
    return BoundState(
        lam=complex(lam),
        y=y,
        c_plus=cp / scale,
        c_minus=cm / scale,
        m=m,
        window=window,
        alpha_bar=alpha,
        beta_bar=beta,
        theta=theta,
        phi=phi,
    )


def find_bound_states(theta: float, phi: float, m: int, window: int | None = None) -> list[BoundState]:
    return [build_bound_state(lam, theta, phi, m, window) for lam in find_eigenvalues(theta, phi)]


def embed(bs: BoundState, slack: int = 2) -> WalkerState:
    """Place the bound state on the line as a walker state with ``slack`` empty sites each side."""
    pad = np.zeros(slack, dtype=np.complex128)
    return WalkerState(
        lo=bs.m - bs.window - slack,
        alpha=np.concatenate([pad, bs.alpha_bar, pad]),
        beta=np.concatenate([pad, bs.beta_bar, pad]),
        t=0,
    )
