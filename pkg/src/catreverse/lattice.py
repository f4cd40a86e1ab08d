"""Exact lattice dynamics and double-precision trajectory ensembles.

The map is the generalized Arnold cat map on a torus of integer length L in
momentum:

    y' = y + x  (mod L),    x' = x + y'  (mod 1)

with x in [-0.5, 0.5) and y in [-L/2, L/2).  On the lattice x_i = -0.5 + i/N,
y_j = -L/2 + j/N this becomes the exact integer permutation

    j' = (j + i - N/2) mod LN,    i' = (i + j') mod N

where the x-update constant LN/2 vanishes modulo N because L >= 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng

#: Largest Lyapunov exponent of the cat map, ln((3 + sqrt(5)) / 2).
KS_ENTROPY = math.log((3.0 + math.sqrt(5.0)) / 2.0)


@dataclass(frozen=True)
class PhaseSpaceConfig:
    """Lattice and register geometry: N = 2^n_q points per cell, L = 2^(n_q' - n_q) cells."""

    n_q: int
    n_q_prime: int

    def __post_init__(self):
        if self.n_q < 2:
            raise ValueError(f"n_q must be >= 2, got {self.n_q}")
        if self.n_q_prime < self.n_q + 1:
            raise ValueError(
                f"n_q_prime must be >= n_q + 1 (torus length L >= 2), "
                f"got n_q={self.n_q}, n_q_prime={self.n_q_prime}"
            )

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def L(self) -> int:
        return 1 << (self.n_q_prime - self.n_q)

    @property
    def LN(self) -> int:
        return 1 << self.n_q_prime


@dataclass(frozen=True)
class LatticePoint:
    i: int
    j: int


@dataclass(frozen=True)
class ContinuousPoint:
    x: float
    y: float


@dataclass(frozen=True)
class InversionImprecision:
    """Amplitude of the additive error made when the demon inverts velocities."""

    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


def _check_point(p: LatticePoint, cfg: PhaseSpaceConfig) -> None:
    if not (0 <= p.i < cfg.N and 0 <= p.j < cfg.LN):
        raise ValueError(f"lattice point {p} outside [0,{cfg.N}) x [0,{cfg.LN})")


def wrap(v: float, width: float) -> float:
    """Wrap v into [-width/2, width/2); the boundary +width/2 maps to -width/2."""
    return v - width * math.floor(v / width + 0.5)


def wrap_array(v: np.ndarray, width: float) -> np.ndarray:
    return v - width * np.floor(v / width + 0.5)


def lattice_to_continuous(p: LatticePoint, cfg: PhaseSpaceConfig) -> ContinuousPoint:
    return ContinuousPoint(-0.5 + p.i / cfg.N, -cfg.L / 2 + p.j / cfg.N)


def continuous_to_lattice(p: ContinuousPoint, cfg: PhaseSpaceConfig) -> LatticePoint:
    """Quantize onto the grid; exact for dyadic coordinates."""
    i = int(math.floor((p.x + 0.5) * cfg.N)) % cfg.N
    j = int(math.floor((p.y + cfg.L / 2) * cfg.N)) % cfg.LN
    return LatticePoint(i, j)


def map_forward_lattice(p: LatticePoint, cfg: PhaseSpaceConfig) -> LatticePoint:
    _check_point(p, cfg)
    j_new = (p.j + p.i + cfg.LN - cfg.N // 2) % cfg.LN
    i_new = (p.i + j_new) % cfg.N
    return LatticePoint(i_new, j_new)


def map_inverse_lattice(p: LatticePoint, cfg: PhaseSpaceConfig) -> LatticePoint:
    _check_point(p, cfg)
    i_old = (p.i - p.j) % cfg.N
    j_old = (p.j - i_old + cfg.N // 2) % cfg.LN
    return LatticePoint(i_old, j_old)


def invert_velocity_lattice(p: LatticePoint, cfg: PhaseSpaceConfig) -> LatticePoint:
    """Velocity inversion: j -> -j with the induced shear i -> i - j.

    An involution that conjugates the forward map into its inverse.
    """
    _check_point(p, cfg)
    i_new = (p.i - p.j) % cfg.N
    j_new = (cfg.LN - p.j) % cfg.LN
    return LatticePoint(i_new, j_new)


def map_forward_continuous(p: ContinuousPoint, L: float) -> ContinuousPoint:
    y_new = wrap(p.y + p.x, L)
    x_new = wrap(p.x + y_new, 1.0)
    return ContinuousPoint(x_new, y_new)


def map_inverse_continuous(p: ContinuousPoint, L: float) -> ContinuousPoint:
    x_old = wrap(p.x - p.y, 1.0)
    y_old = wrap(p.y - x_old, L)
    return ContinuousPoint(x_old, y_old)


def invert_velocity_continuous(
    p: ContinuousPoint,
    imp: InversionImprecision,
    L: float,
    seed: int = 0,
    stream: int = 0,
    epoch: int = 0,
) -> ContinuousPoint:
    """Invert the velocity of one point, with additive imprecision.

    The exact operation x' = x - y, y' = -y is followed by independent
    perturbations uniform in [-eps, eps] on both coordinates, drawn from the
    counter-based stream (seed, stream, epoch).  With eps = 0 no draw is made
    and the operation is an exact involution.
    """
    x_new = wrap(p.x - p.y, 1.0)
    y_new = wrap(-p.y, L)
    if imp.epsilon > 0:
        u, v = rng.uniform_pair(seed, stream, epoch)
        x_new = wrap(x_new + imp.epsilon * (2.0 * u - 1.0), 1.0)
        y_new = wrap(y_new + imp.epsilon * (2.0 * v - 1.0), L)
    return ContinuousPoint(x_new, y_new)


@dataclass
class Ensemble:
    """A set of trajectories evolved in double precision.

    Coordinates are stored as flat arrays; ``master_seed`` keys every random
    draw the ensemble ever makes, so evolution is reproducible bit for bit.
    """

    xs: np.ndarray
    ys: np.ndarray
    L: float
    master_seed: int
    t: int = 0

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=np.float64)
        self.ys = np.asarray(self.ys, dtype=np.float64)
        if self.xs.shape != self.ys.shape:
            raise ValueError("xs and ys must have identical shape")

    def __len__(self) -> int:
        return self.xs.size

    @property
    def points(self) -> list[ContinuousPoint]:
        return [ContinuousPoint(float(x), float(y)) for x, y in zip(self.xs, self.ys)]

    def mean_y(self) -> float:
        return float(np.mean(self.ys))

    def mean_y2(self) -> float:
        return float(np.mean(self.ys**2))


# Stream tag separating the initial-position draws from inversion draws.
_INIT_STREAM = 0x494E4954  # "INIT"


def uniform_cell_ensemble(count: int, L: float, master_seed: int) -> Ensemble:
    """Points uniform over the central cell -0.5 <= x, y < 0.5."""
    if count < 1:
        raise ValueError("count must be >= 1")
    gen = rng.generator(master_seed, _INIT_STREAM)
    xs = gen.uniform(-0.5, 0.5, size=count)
    ys = gen.uniform(-0.5, 0.5, size=count)
    return Ensemble(xs, ys, L, master_seed)


def pixel_ensemble(
    points: list[LatticePoint], cfg: PhaseSpaceConfig, count: int, master_seed: int
) -> Ensemble:
    """Points jittered uniformly inside the given lattice cells."""
    if not points:
        raise ValueError("need at least one occupied pixel")
    gen = rng.generator(master_seed, _INIT_STREAM)
    idx = gen.integers(0, len(points), size=count)
    ii = np.array([p.i for p in points], dtype=np.float64)[idx]
    jj = np.array([p.j for p in points], dtype=np.float64)[idx]
    xs = -0.5 + (ii + gen.uniform(0.0, 1.0, size=count)) / cfg.N
    ys = -cfg.L / 2 + (jj + gen.uniform(0.0, 1.0, size=count)) / cfg.N
    return Ensemble(xs, ys, float(cfg.L), master_seed)


def evolve_ensemble(e: Ensemble, steps: int, L: float | None = None) -> Ensemble:
    """Advance every point by the forward map ``steps`` times."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    L = e.L if L is None else L
    xs = e.xs.copy()
    ys = e.ys.copy()
    for _ in range(steps):
        ys = wrap_array(ys + xs, L)
        xs = wrap_array(xs + ys, 1.0)
    return Ensemble(xs, ys, L, e.master_seed, e.t + steps)


def invert_ensemble_velocities(e: Ensemble, imp: InversionImprecision) -> Ensemble:
    """Velocity-invert every point, each perturbed from its own stream.

    Point k draws from the counter-based stream (master_seed, k, epoch=t), so
    any partition of the ensemble over workers reproduces the serial result.
    """
    xs = wrap_array(e.xs - e.ys, 1.0)
    ys = wrap_array(-e.ys, e.L)
    if imp.epsilon > 0:
        u, v = rng.uniform_pairs(e.master_seed, np.arange(len(e), dtype=np.uint64), epoch=e.t)
        xs = wrap_array(xs + imp.epsilon * (2.0 * u - 1.0), 1.0)
        ys = wrap_array(ys + imp.epsilon * (2.0 * v - 1.0), e.L)
    return Ensemble(xs, ys, e.L, e.master_seed, e.t)


def ensemble_histogram(e: Ensemble, cfg: PhaseSpaceConfig) -> np.ndarray:
    """Normalized occupation of the (i, j) lattice cells, shape (N, LN)."""
    ii = np.floor((e.xs + 0.5) * cfg.N).astype(np.int64) % cfg.N
    jj = np.floor((e.ys + cfg.L / 2) * cfg.N).astype(np.int64) % cfg.LN
    counts = np.bincount(ii * cfg.LN + jj, minlength=cfg.N * cfg.LN)
    return counts.reshape(cfg.N, cfg.LN).astype(np.float64) / len(e)


def lyapunov_exponent(steps: int) -> float:
    """Largest Lyapunov exponent from the tangent map [[1, 1], [1, 2]].

    The Jacobian is constant, so iterating any tangent vector with periodic
    renormalization converges to ln((3 + sqrt(5)) / 2) ~ 0.9624.
    """
    if steps < 100:
        raise ValueError("steps must be >= 100")
    jac = np.array([[1.0, 1.0], [1.0, 2.0]])
    v = np.array([1.0, 0.0])
    total = 0.0
    for _ in range(steps):
        v = jac @ v
        norm = math.hypot(v[0], v[1])
        total += math.log(norm)
        v /= norm
    return total / steps
