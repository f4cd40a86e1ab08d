"""Thermodynamic reference laws and fits.

Diffusive transport in momentum follows dw/dt = (D/2) d2w/dy2 with
D ~ <x^2> = 1/12, so the free-space solution is a Gaussian of variance D*t.
On the torus the solution is the image sum of that Gaussian and relaxes to
the uniform density 1/L on a time scale t_D ~ L^2/D.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .lattice import KS_ENTROPY, PhaseSpaceConfig

DIFFUSION_COEFFICIENT = 1.0 / 12.0


class FitError(ValueError):
    """A requested fit is degenerate or has no usable data."""


@dataclass
class YDistribution:
    """Probability per momentum bin j, with y_j = -L/2 + j/N."""

    cfg: PhaseSpaceConfig
    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)
        if self.p.shape != (self.cfg.LN,):
            raise ValueError(f"expected {self.cfg.LN} bins, got shape {self.p.shape}")
        if np.any(self.p < -1e-12):
            raise ValueError("negative probability entries")
        total = float(self.p.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def y_values(self) -> np.ndarray:
        return -self.cfg.L / 2 + np.arange(self.cfg.LN) / self.cfg.N


@dataclass
class MomentSeries:
    """Records of (t, <y>, <y^2>) with strictly increasing t."""

    ts: list[int] = field(default_factory=list)
    mean_y: list[float] = field(default_factory=list)
    mean_y2: list[float] = field(default_factory=list)

    def append(self, t: int, my: float, my2: float) -> None:
        if self.ts and t <= self.ts[-1]:
            raise ValueError(f"t={t} does not increase past {self.ts[-1]}")
        self.ts.append(t)
        self.mean_y.append(my)
        self.mean_y2.append(my2)

    def __len__(self) -> int:
        return len(self.ts)


@dataclass
class FidelitySeries:
    """Fidelity f(t) of a noisy run against its exact reference."""

    n_q: int
    n_q_prime: int
    epsilon: float
    seed: int
    ts: list[int] = field(default_factory=list)
    fs: list[float] = field(default_factory=list)

    def append(self, t: int, f: float) -> None:
        if self.ts and t <= self.ts[-1]:
            raise ValueError("t must increase")
        if not (-1e-9 <= f <= 1.0 + 1e-9):
            raise ValueError(f"fidelity {f} outside [0, 1]")
        if not self.ts and t == 0 and abs(f - 1.0) > 1e-9:
            raise ValueError("fidelity at t=0 must be 1")
        self.ts.append(t)
        self.fs.append(min(1.0, max(0.0, f)))


def fokker_planck_gaussian(y, t: float, y0: float, D: float, L: float):
    """Torus-periodized Gaussian density at momentum y and time t.

    The free-space solution exp(-(y-y0)^2 / (2 D t)) / sqrt(2 pi D t) is
    summed over images y + k L, truncating once a term falls below 1e-12 of
    the peak.  Accepts scalar or array y.
    """
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    if D <= 0:
        raise ValueError(f"D must be > 0, got {D}")
    y = np.asarray(y, dtype=np.float64)
    var = D * t
    peak = 1.0 / math.sqrt(2.0 * math.pi * var)
    # Terms at distance d contribute peak * exp(-d^2 / (2 var)).
    reach = math.sqrt(2.0 * var * math.log(1e12)) + L
    kmax = int(math.ceil(reach / L))
    out = np.zeros_like(y)
    for k in range(-kmax, kmax + 1):
        out += np.exp(-((y + k * L - y0) ** 2) / (2.0 * var))
    out *= peak
    return out if out.shape else float(out)


def second_moment(dist: YDistribution) -> float:
    y = dist.y_values()
    return float(np.sum(dist.p * y * y))


def distribution_mean(dist: YDistribution) -> float:
    return float(np.sum(dist.p * dist.y_values()))


def distribution_distance(a: YDistribution, b: YDistribution) -> float:
    """Total-variation distance, (1/2) sum |p_a - p_b|, in [0, 1]."""
    if a.cfg != b.cfg:
        raise ValueError("distributions live on different lattices")
    return 0.5 * float(np.abs(a.p - b.p).sum())


def fit_diffusion(series: MomentSeries, t_window: tuple[float, float]) -> float:
    """Least-squares slope of <y^2> versus t over the window (the D estimate)."""
    lo, hi = t_window
    ts = np.asarray(series.ts, dtype=np.float64)
    y2 = np.asarray(series.mean_y2, dtype=np.float64)
    mask = (ts >= lo) & (ts <= hi)
    if int(mask.sum()) < 5:
        raise FitError(f"need >= 5 records in window [{lo}, {hi}], have {int(mask.sum())}")
    ts, y2 = ts[mask], y2[mask]
    if np.ptp(ts) == 0:
        raise FitError("degenerate window: all t equal")
    slope, _ = np.polyfit(ts, y2, 1)
    return float(slope)


def escape_time(epsilon: float) -> float:
    """Classical error-amplification horizon |ln eps| / h."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return abs(math.log(epsilon)) / KS_ENTROPY


def fidelity_timescale(n_q: int, epsilon: float, C: float = 0.5) -> float:
    """Quantum fidelity horizon t_f = C / (n_q eps^2), where f drops to 0.5."""
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    return C / (n_q * epsilon * epsilon)


@dataclass
class CollapseFit:
    """Result of collapsing fidelity curves onto x = eps^2 n_q t."""

    c_fit: float
    diagnostic: float
    crossings: dict[tuple[int, float], float]
    excluded: list[tuple[int, float]]


def _half_crossing(xs: np.ndarray, fs: np.ndarray) -> float | None:
    """First x where f crosses 0.5, linearly interpolated; None if it never does."""
    below = np.nonzero(fs <= 0.5)[0]
    if below.size == 0:
        return None
    k = int(below[0])
    if k == 0:
        return float(xs[0])
    x0, x1 = xs[k - 1], xs[k]
    f0, f1 = fs[k - 1], fs[k]
    if f0 == f1:
        return float(x1)
    return float(x0 + (f0 - 0.5) * (x1 - x0) / (f0 - f1))


def fit_collapse_constant(runs: list[FidelitySeries]) -> CollapseFit:
    """Median f = 0.5 crossing of the rescaled curves, plus a spread diagnostic.

    Runs that never reach 0.5 are excluded with a warning; it is an error if
    nothing is left.
    """
    if len(runs) < 1:
        raise FitError("no runs supplied")
    crossings: dict[tuple[int, float], float] = {}
    excluded: list[tuple[int, float]] = []
    for run in runs:
        xs = np.asarray(run.ts, dtype=np.float64) * run.epsilon**2 * run.n_q
        fs = np.asarray(run.fs, dtype=np.float64)
        xc = _half_crossing(xs, fs)
        key = (run.n_q, run.epsilon)
        if xc is None:
            warnings.warn(f"run n_q={run.n_q} eps={run.epsilon} never crosses f=0.5; excluded")
            excluded.append(key)
        else:
            crossings[key] = xc
    if not crossings:
        raise FitError("no run crosses f = 0.5; cannot fit collapse constant")
    values = sorted(crossings.values())
    c_fit = float(np.median(values))
    diagnostic = values[-1] / values[0] if values[0] > 0 else math.inf
    return CollapseFit(c_fit, diagnostic, crossings, excluded)
