"""Reversible circuits for one map iteration and for velocity inversion.

Arithmetic is ripple-carry addition from NOT/CNOT/TOFFOLI only, in the
MAJ/UMA style: carries ripple through the source register and are uncomputed
on the way back, with one workspace qubit seeding the carry chain.  Additive
constants enter as classically-conditioned gates.  The kick's constant
LN - N/2 is exactly the two's-complement sign extension of the x register,
so the momentum update is a single signed addition

    j' = j + (i - N/2)  (mod LN)

driven by the (temporarily negated) top x qubit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import FidelitySeries, MomentSeries
from .lattice import PhaseSpaceConfig
from .statevector import (
    Gate,
    NoiseModel,
    QuantumState,
    RegisterLayout,
    apply_circuit,
    cnot,
    fidelity,
    marginal_xy,
    marginal_y,
    toffoli,
    x_gate,
)


class ConstructionError(ValueError):
    """A circuit cannot be built from the given registers."""


@dataclass(frozen=True)
class Circuit:
    """An ordered elementary-gate sequence with count metadata."""

    gates: tuple[Gate, ...]

    @property
    def counts(self) -> dict[str, int]:
        tally: dict[str, int] = {}
        for g in self.gates:
            tally[g.kind] = tally.get(g.kind, 0) + 1
        return tally

    @property
    def total_gates(self) -> int:
        return len(self.gates)

    @property
    def touched_qubit_total(self) -> int:
        return sum(len(g.qubits) for g in self.gates)

    def text(self) -> str:
        """One gate per line: KIND q1 [q2 [q3]]."""
        return "\n".join(g.text() for g in self.gates) + ("\n" if self.gates else "")


class CircuitBuilder:
    """Accumulates gates; an appended gate cancels an identical predecessor.

    NOT, CNOT and TOFFOLI are self-inverse, so two identical adjacent gates
    are a wasteful identity and are dropped pairwise.
    """

    def __init__(self):
        self._gates: list[Gate] = []

    def append(self, gate: Gate) -> None:
        if gate.kind == "ROT":
            raise ConstructionError("circuits are built from NOT/CNOT/TOFFOLI only")
        if self._gates and self._gates[-1] == gate:
            self._gates.pop()
        else:
            self._gates.append(gate)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def build(self) -> Circuit:
        return Circuit(tuple(self._gates))


def simulate_basis(circuit: Circuit, index: int) -> int:
    """Track one basis state through the circuit (gates are classical here)."""
    for g in circuit.gates:
        if g.kind == "NOT":
            index ^= 1 << g.qubits[0]
        elif g.kind == "CNOT":
            if (index >> g.qubits[0]) & 1:
                index ^= 1 << g.qubits[1]
        elif g.kind == "TOFFOLI":
            if (index >> g.qubits[0]) & 1 and (index >> g.qubits[1]) & 1:
                index ^= 1 << g.qubits[2]
        else:
            raise ValueError("only NOT/CNOT/TOFFOLI act as basis permutations")
    return index


def permutation_table(circuit: Circuit, n_qubits: int) -> np.ndarray:
    """Image of every basis index under the circuit, vectorized."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    for g in circuit.gates:
        if g.kind == "NOT":
            idx ^= 1 << g.qubits[0]
        elif g.kind == "CNOT":
            on = (idx >> g.qubits[0]) & 1 == 1
            idx[on] ^= 1 << g.qubits[1]
        else:
            on = ((idx >> g.qubits[0]) & 1 == 1) & ((idx >> g.qubits[1]) & 1 == 1)
            idx[on] ^= 1 << g.qubits[2]
    return idx


def _maj(builder: CircuitBuilder, c: int, b: int, a: int) -> None:
    builder.append(cnot(a, b))
    builder.append(cnot(a, c))
    builder.append(toffoli(c, b, a))


def _uma(builder: CircuitBuilder, c: int, b: int, a: int) -> None:
    builder.append(toffoli(c, b, a))
    builder.append(cnot(a, c))
    builder.append(cnot(c, b))


def _ripple_add_register(
    builder: CircuitBuilder,
    src: list[int],
    dst: list[int],
    workspace: list[int],
) -> None:
    """dst += src (mod 2^len(dst)); src and workspace are restored.

    src may be narrower than dst; carries then continue through workspace
    qubits.  Discarding the final carry realizes the modular reduction, so
    the top position needs no carry computation at all.
    """
    m = len(dst)
    m_s = len(src)
    if m_s == 0:
        return
    if m_s > m:
        raise ConstructionError(f"source wider than destination ({m_s} > {m})")
    need = 1 + max(0, m - 1 - m_s)
    if len(workspace) < need:
        raise ConstructionError(f"need {need} workspace qubits, have {len(workspace)}")
    if m_s == m:
        builder.append(cnot(src[m - 1], dst[m - 1]))  # top addend bit, source intact
    if m == 1:
        return
    seed = workspace[0]
    chain = min(m_s, m - 1)  # positions whose carries live in source qubits
    carry = seed
    for t in range(chain):
        _maj(builder, carry, dst[t], src[t])
        carry = src[t]
    extra = workspace[1 : 1 + (m - 1 - chain)]  # carries beyond the source width
    for k, t in enumerate(range(chain, m - 1)):
        builder.append(toffoli(carry, dst[t], extra[k]))
        carry = extra[k]
    builder.append(cnot(carry, dst[m - 1]))  # carry into the (discarded-carry) top bit
    for k, t in zip(range(m - 2 - chain, -1, -1), range(m - 2, chain - 1, -1)):
        prev = extra[k - 1] if k > 0 else src[chain - 1]
        builder.append(toffoli(prev, dst[t], extra[k]))
        builder.append(cnot(prev, dst[t]))
    for t in range(chain - 1, -1, -1):
        carry = seed if t == 0 else src[t - 1]
        _uma(builder, carry, dst[t], src[t])


def _ripple_add_constant(
    builder: CircuitBuilder,
    constant: int,
    dst: list[int],
    workspace: list[int],
) -> None:
    """dst += constant (mod 2^len(dst)); workspace carries are uncomputed.

    The constant's bits condition the gates classically: where a source bit
    would control a Toffoli or CNOT, a set constant bit leaves a CNOT or NOT.
    Positions below the lowest set bit carry nothing and need no gates.
    """
    m = len(dst)
    constant &= (1 << m) - 1
    if constant == 0:
        return
    low = (constant & -constant).bit_length() - 1  # lowest set bit
    if low == m - 1:
        builder.append(x_gate(dst[low]))
        return
    carries = workspace[: m - 1 - low]
    if len(carries) < m - 1 - low:
        raise ConstructionError(f"need {m - 1 - low} workspace qubits, have {len(workspace)}")

    def kbit(t: int) -> int:
        return (constant >> t) & 1

    builder.append(cnot(dst[low], carries[0]))
    builder.append(x_gate(dst[low]))
    for t in range(low + 1, m - 1):
        w_prev = carries[t - 1 - low]
        w_here = carries[t - low]
        if kbit(t):
            builder.append(cnot(dst[t], w_here))
            builder.append(x_gate(dst[t]))
        builder.append(toffoli(w_prev, dst[t], w_here))
    if kbit(m - 1):
        builder.append(x_gate(dst[m - 1]))
    builder.append(cnot(carries[m - 2 - low], dst[m - 1]))
    for t in range(m - 2, low, -1):
        w_prev = carries[t - 1 - low]
        w_here = carries[t - low]
        builder.append(toffoli(w_prev, dst[t], w_here))
        if kbit(t):
            builder.append(x_gate(dst[t]))
            builder.append(cnot(dst[t], w_here))
            builder.append(x_gate(dst[t]))
        builder.append(cnot(w_prev, dst[t]))
    builder.append(x_gate(dst[low]))
    builder.append(cnot(dst[low], carries[0]))
    builder.append(x_gate(dst[low]))


def build_adder(
    src: list[int],
    dst: list[int],
    constant: int,
    layout: RegisterLayout,
) -> Circuit:
    """Circuit mapping |s>|d>|0> to |s>|(d + s + constant) mod 2^m>|0>.

    ``src`` and ``dst`` are qubit index lists, least significant first; the
    layout's workspace register supplies carry qubits.
    """
    if constant < 0:
        raise ConstructionError("constant must be >= 0")
    used = set(src) | set(dst)
    workspace = [q for q in layout.work_qubits if q not in used]
    builder = CircuitBuilder()
    _ripple_add_register(builder, src, dst, workspace)
    _ripple_add_constant(builder, constant, dst, workspace)
    return builder.build()


def build_map_circuit(cfg: PhaseSpaceConfig, layout: RegisterLayout) -> Circuit:
    """One forward map iteration as a basis-state permutation.

    Momentum update: y += (i - N/2) as a signed addition, realized by
    negating the top x qubit and sign-extending it across the high source
    positions (workspace qubits hold the copies).  Phase update: x += y over
    the low n_q bits; the constant LN/2 vanishes modulo N because L >= 2.
    """
    _check_layout(cfg, layout)
    x = list(layout.x_qubits)
    y = list(layout.y_qubits)
    work = list(layout.work_qubits)
    n_q, n_qp = cfg.n_q, cfg.n_q_prime
    delta = n_qp - n_q
    x_top = x[-1]
    if len(work) < delta:
        raise ConstructionError("workspace too small for sign extension")
    seed = work[0]
    copies = work[1:delta]

    builder = CircuitBuilder()
    builder.append(x_gate(x_top))
    builder.append(cnot(x_top, y[n_qp - 1]))  # sign bit is the top addend bit
    for w in copies:
        builder.append(cnot(x_top, w))
    sources = x[: n_q - 1] + [x_top] + copies
    carry = seed
    for t in range(n_qp - 1):
        _maj(builder, carry, y[t], sources[t])
        carry = sources[t]
    builder.append(cnot(sources[n_qp - 2], y[n_qp - 1]))
    for t in range(n_qp - 2, -1, -1):
        carry = seed if t == 0 else sources[t - 1]
        _uma(builder, carry, y[t], sources[t])
    for w in reversed(copies):
        builder.append(cnot(x_top, w))
    builder.append(x_gate(x_top))

    _ripple_add_register(builder, y[:n_q], x, [seed])
    return builder.build()


def build_inversion_circuit(cfg: PhaseSpaceConfig, layout: RegisterLayout) -> Circuit:
    """Velocity inversion as a permutation: y -> -y, then x += y.

    Negation is two's complement (NOT every y qubit, add one); adding the
    negated momentum's low bits into x realizes i -> i - j mod N.  Applied
    twice, the circuit is the identity.
    """
    _check_layout(cfg, layout)
    x = list(layout.x_qubits)
    y = list(layout.y_qubits)
    work = list(layout.work_qubits)
    builder = CircuitBuilder()
    for q in y:
        builder.append(x_gate(q))
    _ripple_add_constant(builder, 1, y, work)
    _ripple_add_register(builder, y[: cfg.n_q], x, [work[0]])
    return builder.build()


def _check_layout(cfg: PhaseSpaceConfig, layout: RegisterLayout) -> None:
    if (layout.n_q, layout.n_q_prime) != (cfg.n_q, cfg.n_q_prime):
        raise ConstructionError(f"layout {layout} does not match config {cfg}")


def reference_map_gate_count(n_q: int, n_q_prime: int) -> int:
    """Linear gate-count target for one map iteration: 10 n_q + 6 n_q' - 17."""
    return 10 * n_q + 6 * n_q_prime - 17


def reference_inversion_gate_count(n_q: int, n_q_prime: int) -> int:
    """Linear gate-count target for the inversion: 8 n_q + 4 n_q' - 13."""
    return 8 * n_q + 4 * n_q_prime - 13


@dataclass(frozen=True)
class GateCountReport:
    """Side-by-side view of a built circuit and the linear reference counts."""

    n_q: int
    n_q_prime: int
    counts: dict[str, int]
    total: int
    touched_qubit_total: int
    reference_map: int
    reference_inversion: int

    @property
    def map_ratio(self) -> float:
        return self.total / self.reference_map

    def lines(self) -> list[str]:
        out = [f"config n_q={self.n_q} n_q_prime={self.n_q_prime}"]
        for kind in ("NOT", "CNOT", "TOFFOLI"):
            out.append(f"{kind.lower():8s} {self.counts.get(kind, 0)}")
        out.append(f"total    {self.total}")
        out.append(f"touched  {self.touched_qubit_total}")
        out.append(f"reference map {self.reference_map}  inversion {self.reference_inversion}")
        return out


def gate_count_report(circuit: Circuit, cfg: PhaseSpaceConfig) -> GateCountReport:
    return GateCountReport(
        n_q=cfg.n_q,
        n_q_prime=cfg.n_q_prime,
        counts=circuit.counts,
        total=circuit.total_gates,
        touched_qubit_total=circuit.touched_qubit_total,
        reference_map=reference_map_gate_count(cfg.n_q, cfg.n_q_prime),
        reference_inversion=reference_inversion_gate_count(cfg.n_q, cfg.n_q_prime),
    )


def check_affine_gate_growth(build, configs: list[PhaseSpaceConfig]) -> bool:
    """True if per-kind counts change by a constant vector per unit n_q (and n_q')."""
    kinds = ("NOT", "CNOT", "TOFFOLI")

    def vec(cfg):
        c = build(cfg, RegisterLayout.from_config(cfg)).counts
        return tuple(c.get(k, 0) for k in kinds)

    deltas = set()
    for a, b in zip(configs, configs[1:]):
        va, vb = vec(a), vec(b)
        step_q = b.n_q - a.n_q
        step_p = b.n_q_prime - a.n_q_prime
        if (step_q, step_p) == (0, 0):
            continue
        deltas.add(tuple((y - x) for x, y in zip(va, vb)))
    return len(deltas) <= 1


def resource_estimate(n_particles: float, L: int) -> tuple[int, int, int]:
    """Smallest register sizes representing n_particles points on an L-cell torus.

    Returns (n_q, n_q_prime, total_qubits) with 2^(2 n_q) >= n_particles and
    n_q' = n_q + log2(L).
    """
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    if L < 2 or (L & (L - 1)) != 0:
        raise ValueError(f"L must be a power of two >= 2, got {L}")
    n_q = max(2, math.ceil(math.log2(n_particles) / 2))
    while n_q > 2 and 2 ** (2 * (n_q - 1)) >= n_particles:
        n_q -= 1
    while 2 ** (2 * n_q) < n_particles:
        n_q += 1
    n_q_prime = n_q + int(math.log2(L))
    return n_q, n_q_prime, n_q + 2 * n_q_prime - 1


@dataclass
class IterationLog:
    """Per-step observables from a map-iteration run."""

    moments: MomentSeries
    fidelity_series: FidelitySeries | None
    state: QuantumState
    reference: QuantumState | None
    reference_moments: MomentSeries | None = None
    snapshots: dict[int, np.ndarray] | None = None


def run_iterations(
    state: QuantumState,
    cfg: PhaseSpaceConfig,
    t: int,
    noise: NoiseModel | None = None,
    invert_at: int | None = None,
    track_reference: bool = False,
    readout_invert: bool | None = None,
    snapshot_times: tuple[int, ...] = (),
    stop_below_fidelity: float | None = None,
) -> IterationLog:
    """Apply the map circuit t times, optionally inverting velocities once.

    The inversion circuit is inserted immediately after step ``invert_at``;
    when it is, a second inversion is applied after the final step by default
    (``readout_invert``), reading the state out in the re-inverted frame so a
    perfect echo reproduces the initial state exactly.  With a noise model,
    every gate of every circuit is noisy.  A noise-free reference can be
    co-evolved to record fidelity per step; ``stop_below_fidelity`` ends the
    run early once the recorded fidelity drops below the bound.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if invert_at is not None and not (0 <= invert_at <= t):
        raise ValueError(f"invert_at={invert_at} outside [0, {t}]")
    if readout_invert is None:
        readout_invert = invert_at is not None
    layout = state.layout
    _check_layout(cfg, layout)
    map_circ = build_map_circuit(cfg, layout)
    inv_circ = build_inversion_circuit(cfg, layout)

    reference = state.copy() if track_reference else None
    moments = MomentSeries()
    ref_moments = MomentSeries() if track_reference else None
    fseries = (
        FidelitySeries(cfg.n_q, cfg.n_q_prime, noise.epsilon if noise else 0.0,
                       noise.seed if noise else 0)
        if track_reference
        else None
    )
    snapshots: dict[int, np.ndarray] = {}

    def advance(circ: Circuit) -> None:
        apply_circuit(state, circ.gates, noise)
        if reference is not None:
            apply_circuit(reference, circ.gates, None)

    def y_moments(st: QuantumState) -> tuple[float, float]:
        dist = marginal_y(st)
        y = dist.y_values()
        return float(np.sum(dist.p * y)), float(np.sum(dist.p * y * y))

    def record(step: int) -> float:
        moments.append(step, *y_moments(state))
        if ref_moments is not None:
            ref_moments.append(step, *y_moments(reference))
        if step in snapshot_times:
            snapshots[step] = marginal_xy(state)
        if fseries is not None:
            f = fidelity(reference, state)
            fseries.append(step, f)
            return f
        return 1.0

    record(0)
    if invert_at == 0 and t > 0:
        advance(inv_circ)
    for step in range(1, t + 1):
        advance(map_circ)
        if invert_at == step:
            advance(inv_circ)
        if step == t and invert_at is not None and readout_invert:
            advance(inv_circ)
        f = record(step)
        if stop_below_fidelity is not None and f < stop_below_fidelity:
            break
    return IterationLog(moments, fseries, state, reference, ref_moments, snapshots)
