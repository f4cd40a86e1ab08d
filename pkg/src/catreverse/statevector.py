"""Dense state-vector simulation of the three-register machine.

Registers are little-endian and concatenated x | y | workspace, so the basis
index of (i, j, w) is i + N*j + N*LN*w.  Exact gates (NOT, CNOT, TOFFOLI)
permute amplitudes without arithmetic; noise enters only through single-qubit
rotations about random axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, rng
from .analysis import YDistribution
from .lattice import LatticePoint, PhaseSpaceConfig


@dataclass(frozen=True)
class RegisterLayout:
    """Bit assignment of the x, y and workspace registers."""

    n_q: int
    n_q_prime: int

    @classmethod
    def from_config(cls, cfg: PhaseSpaceConfig) -> "RegisterLayout":
        return cls(cfg.n_q, cfg.n_q_prime)

    @property
    def total_qubits(self) -> int:
        return self.n_q + 2 * self.n_q_prime - 1

    @property
    def x_qubits(self) -> range:
        return range(0, self.n_q)

    @property
    def y_qubits(self) -> range:
        return range(self.n_q, self.n_q + self.n_q_prime)

    @property
    def work_qubits(self) -> range:
        return range(self.n_q + self.n_q_prime, self.total_qubits)

    @property
    def N(self) -> int:
        return 1 << self.n_q

    @property
    def LN(self) -> int:
        return 1 << self.n_q_prime

    def basis_index(self, i: int, j: int, w: int = 0) -> int:
        if not (0 <= i < self.N and 0 <= j < self.LN and 0 <= w < (1 << (self.n_q_prime - 1))):
            raise ValueError(f"(i={i}, j={j}, w={w}) invalid for layout {self}")
        return i + self.N * j + self.N * self.LN * w

    def split_index(self, index: int) -> tuple[int, int, int]:
        i = index % self.N
        j = (index // self.N) % self.LN
        w = index // (self.N * self.LN)
        return i, j, w


class QuantumState:
    """Owns a complex128 amplitude vector of length 2**total_qubits."""

    def __init__(self, layout: RegisterLayout, amplitudes: np.ndarray | None = None):
        self.layout = layout
        size = 1 << layout.total_qubits
        if amplitudes is None:
            self.amplitudes = np.zeros(size, dtype=np.complex128)
        else:
            if amplitudes.shape != (size,):
                raise ValueError(f"expected {size} amplitudes, got {amplitudes.shape}")
            self.amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)

    @classmethod
    def basis_state(cls, layout: RegisterLayout, i: int, j: int, w: int = 0) -> "QuantumState":
        state = cls(layout)
        state.amplitudes[layout.basis_index(i, j, w)] = 1.0
        return state

    def copy(self) -> "QuantumState":
        return QuantumState(self.layout, self.amplitudes.copy())

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass(frozen=True)
class Gate:
    """One elementary gate: NOT, CNOT, TOFFOLI, or a single-qubit rotation."""

    kind: str
    qubits: tuple[int, ...]
    axis: tuple[float, float, float] | None = None
    angle: float | None = None

    def __post_init__(self):
        expected = {"NOT": 1, "CNOT": 2, "TOFFOLI": 3, "ROT": 1}
        if self.kind not in expected:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != expected[self.kind]:
            raise ValueError(f"{self.kind} takes {expected[self.kind]} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate qubits must be distinct, got {self.qubits}")
        if self.kind == "ROT" and (self.axis is None or self.angle is None):
            raise ValueError("ROT needs an axis and an angle")

    def text(self) -> str:
        return " ".join([self.kind] + [str(q) for q in self.qubits])


def x_gate(target: int) -> Gate:
    return Gate("NOT", (target,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def toffoli(control1: int, control2: int, target: int) -> Gate:
    return Gate("TOFFOLI", (control1, control2, target))


def rotation(target: int, axis: tuple[float, float, float], angle: float) -> Gate:
    return Gate("ROT", (target,), axis=axis, angle=angle)


def rotation_matrix(axis: tuple[float, float, float], angle: float) -> np.ndarray:
    """exp(-i * angle * (axis . sigma) / 2) for a unit axis."""
    nx, ny, nz = axis
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    return np.array(
        [
            [c - 1j * s * nz, (-s * ny) - 1j * s * nx],
            [(s * ny) - 1j * s * nx, c + 1j * s * nz],
        ],
        dtype=np.complex128,
    )


class NoiseModel:
    """Random-axis rotation errors of angle amplitude epsilon per touched qubit.

    Draw order is fixed: after each exact gate, its qubits are perturbed in
    ascending index, each consuming three uniforms (axis z-component, axis
    azimuth, angle).  Identical (seed, draw order) gives identical errors.
    """

    def __init__(self, epsilon: float, seed: int):
        if epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        self.epsilon = epsilon
        self.seed = seed
        self.draw_counter = 0
        self._gen = rng.generator(seed)

    def next_rotation(self) -> tuple[tuple[float, float, float], float]:
        u = self._gen.uniform(size=3)
        self.draw_counter += 3
        z = 2.0 * u[0] - 1.0
        phi = 2.0 * math.pi * u[1]
        r = math.sqrt(max(0.0, 1.0 - z * z))
        axis = (r * math.cos(phi), r * math.sin(phi), z)
        angle = self.epsilon * (2.0 * u[2] - 1.0)
        return axis, angle


def _check_gate(gate: Gate, layout: RegisterLayout) -> None:
    for q in gate.qubits:
        if not (0 <= q < layout.total_qubits):
            raise ValueError(f"qubit {q} out of range for {layout.total_qubits}-qubit layout")


def prepare_uniform_superposition(layout: RegisterLayout, points) -> QuantumState:
    """Uniform superposition over the given (i, j) cells with workspace |0>."""
    pts = list(points)
    if not pts:
        raise ValueError("need at least one point")
    state = QuantumState(layout)
    amp = 1.0 / math.sqrt(len(pts))
    seen = set()
    for p in pts:
        idx = layout.basis_index(p.i, p.j, 0)
        if idx in seen:
            raise ValueError(f"duplicate point {p}")
        seen.add(idx)
        state.amplitudes[idx] = amp
    return state


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    """Apply one exact gate in place."""
    _check_gate(gate, state.layout)
    a = state.amplitudes
    if gate.kind == "NOT":
        kernels.apply_not(a, gate.qubits[0])
    elif gate.kind == "CNOT":
        kernels.apply_cnot(a, gate.qubits[0], gate.qubits[1])
    elif gate.kind == "TOFFOLI":
        kernels.apply_toffoli(a, gate.qubits[0], gate.qubits[1], gate.qubits[2])
    else:
        kernels.apply_single_qubit(a, gate.qubits[0], rotation_matrix(gate.axis, gate.angle))
    return state


def apply_gate_noisy(state: QuantumState, gate: Gate, noise: NoiseModel) -> QuantumState:
    """Apply an exact gate, then perturb each touched qubit."""
    if gate.kind == "ROT":
        raise ValueError("noise applies to NOT/CNOT/TOFFOLI gates only")
    apply_gate(state, gate)
    if noise.epsilon == 0:
        return state
    for q in sorted(gate.qubits):
        axis, angle = noise.next_rotation()
        kernels.apply_single_qubit(state.amplitudes, q, rotation_matrix(axis, angle))
    return state


def apply_circuit(state: QuantumState, gates, noise: NoiseModel | None = None) -> QuantumState:
    for gate in gates:
        if noise is None:
            apply_gate(state, gate)
        else:
            apply_gate_noisy(state, gate, noise)
    return state


_CHUNK = 1 << 20


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """|<a|b>|^2, accumulated in fixed chunk order for determinism."""
    if a.layout != b.layout:
        raise ValueError("states have different layouts")
    total = 0.0 + 0.0j
    va, vb = a.amplitudes, b.amplitudes
    for lo in range(0, va.size, _CHUNK):
        total += np.sum(np.conj(va[lo : lo + _CHUNK]) * vb[lo : lo + _CHUNK])
    return float(abs(total) ** 2)


def marginal_xy(state: QuantumState) -> np.ndarray:
    """p(i, j) = sum_w |amplitude|^2, shape (N, LN)."""
    lay = state.layout
    prob = np.abs(state.amplitudes) ** 2
    cube = prob.reshape(-1, lay.LN, lay.N)  # (w, j, i) in C order
    return np.ascontiguousarray(cube.sum(axis=0).T)


def marginal_y(state: QuantumState) -> YDistribution:
    lay = state.layout
    prob = np.abs(state.amplitudes) ** 2
    cube = prob.reshape(-1, lay.LN, lay.N)
    p = cube.sum(axis=(0, 2))
    return YDistribution(PhaseSpaceConfig(lay.n_q, lay.n_q_prime), p / p.sum())


def sample_measurements(state: QuantumState, count: int, seed: int) -> np.ndarray:
    """Independent (i, j) samples from the position marginal, shape (count, 2)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    p = marginal_xy(state).ravel()
    p = p / p.sum()
    gen = rng.generator(seed)
    flat = gen.choice(p.size, size=count, p=p)
    lay = state.layout
    ii = flat // lay.LN
    jj = flat % lay.LN
    return np.stack([ii, jj], axis=1)
