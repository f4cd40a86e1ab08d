"""Exhaustive small-lattice invariant checks.

Every check enumerates all N * LN lattice points (workspace zero), comparing
the circuit permutations against the integer-map oracles and against each
other.  Sizes are capped so the full battery runs in seconds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import (
    Circuit,
    build_inversion_circuit,
    build_map_circuit,
    check_affine_gate_growth,
    permutation_table,
)
from .lattice import (
    LatticePoint,
    PhaseSpaceConfig,
    continuous_to_lattice,
    invert_velocity_lattice,
    lattice_to_continuous,
    map_forward_continuous,
    map_forward_lattice,
    map_inverse_lattice,
)
from .statevector import Gate, QuantumState, RegisterLayout, apply_circuit


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _lattice_perm(cfg: PhaseSpaceConfig, fn) -> np.ndarray:
    size = cfg.N * cfg.LN
    out = np.empty(size, dtype=np.int64)
    for i in range(cfg.N):
        for j in range(cfg.LN):
            q = fn(LatticePoint(i, j), cfg)
            out[i + cfg.N * j] = q.i + cfg.N * q.j
    return out


def _corrupt_circuit(circuit: Circuit) -> Circuit:
    """Break one Toffoli target (test hook for the negative control)."""
    gates = list(circuit.gates)
    for k, g in enumerate(gates):
        if g.kind == "TOFFOLI":
            c1, c2, t = g.qubits
            gates[k] = Gate("TOFFOLI", (c1, c2, (t + 1) % (max(g.qubits) + 2)))
            break
    return Circuit(tuple(gates))


def run_all_checks(cfg: PhaseSpaceConfig, corrupt: str | None = None) -> list[CheckResult]:
    """Run every exhaustive invariant at this size; see run_verify in the CLI.

    ``corrupt='adder'`` deliberately breaks the map circuit to prove the
    battery can fail loudly.
    """
    if cfg.n_q > 4 or cfg.n_q_prime > 6:
        raise ValueError("exhaustive checks are limited to n_q <= 4, n_q_prime <= 6")
    results: list[CheckResult] = []
    layout = RegisterLayout.from_config(cfg)
    size = cfg.N * cfg.LN
    ident = np.arange(size)

    fwd = _lattice_perm(cfg, map_forward_lattice)
    inv = _lattice_perm(cfg, map_inverse_lattice)
    vel = _lattice_perm(cfg, invert_velocity_lattice)

    results.append(
        CheckResult("lattice-bijectivity", len(np.unique(fwd)) == size,
                    "forward map must be a permutation")
    )
    results.append(
        CheckResult("lattice-inverse", bool(np.array_equal(inv[fwd], ident)),
                    "inverse(forward(p)) == p")
    )
    results.append(
        CheckResult("velocity-involution", bool(np.array_equal(vel[vel], ident)),
                    "velocity inversion applied twice is the identity")
    )
    results.append(
        CheckResult("conjugation", bool(np.array_equal(vel[fwd[vel]], inv)),
                    "Inv o F o Inv == F^-1 pointwise")
    )

    cont_ok = True
    for i in range(cfg.N):
        for j in range(cfg.LN):
            p = LatticePoint(i, j)
            via_cont = continuous_to_lattice(
                map_forward_continuous(lattice_to_continuous(p, cfg), cfg.L), cfg
            )
            if via_cont != map_forward_lattice(p, cfg):
                cont_ok = False
    results.append(
        CheckResult("continuum-consistency", cont_ok,
                    "quantized continuum step equals the integer step")
    )

    map_circ = build_map_circuit(cfg, layout)
    if corrupt == "adder":
        map_circ = _corrupt_circuit(map_circ)
    inv_circ = build_inversion_circuit(cfg, layout)
    perm_map_full = permutation_table(map_circ, layout.total_qubits)
    perm_inv_full = permutation_table(inv_circ, layout.total_qubits)
    pm = perm_map_full[:size]
    pi = perm_inv_full[:size]

    results.append(
        CheckResult(
            "map-circuit-oracle",
            bool(np.all(pm < size)) and bool(np.array_equal(pm, fwd)),
            "map circuit equals the integer map with workspace restored",
        )
    )
    results.append(
        CheckResult(
            "inversion-circuit-oracle",
            bool(np.all(pi < size)) and bool(np.array_equal(pi, vel)),
            "inversion circuit equals velocity inversion with workspace restored",
        )
    )
    results.append(
        CheckResult("inversion-circuit-involution",
                    bool(np.all(pi < size)) and bool(np.array_equal(pi[pi], ident)),
                    "inversion circuit squared is the identity")
    )

    echo_ok = bool(np.all(pm < size)) and bool(np.all(pi < size))
    if echo_ok:
        for k in range(1, 6):
            p = ident
            for _ in range(k):
                p = pm[p]
            p = pi[p]
            for _ in range(k):
                p = pm[p]
            p = pi[p]
            if not np.array_equal(p, ident):
                echo_ok = False
    results.append(
        CheckResult("reversal-echo", echo_ok,
                    "Inv o F^k o Inv o F^k == identity for k <= 5")
    )

    sv_ok = True
    probe = [(0, 0), (1, min(2, cfg.LN - 1)), (cfg.N - 1, cfg.LN - 1), (cfg.N // 2, cfg.LN // 2)]
    for i, j in probe:
        state = QuantumState.basis_state(layout, i, j)
        apply_circuit(state, map_circ.gates)
        idx = int(np.argmax(np.abs(state.amplitudes)))
        if idx != perm_map_full[layout.basis_index(i, j, 0)]:
            sv_ok = False
        if abs(abs(state.amplitudes[idx]) - 1.0) > 1e-12:
            sv_ok = False
    results.append(
        CheckResult("statevector-spot-check", sv_ok,
                    "amplitude kernels agree with the bit-level permutation")
    )

    configs = [
        PhaseSpaceConfig(cfg.n_q, cfg.n_q_prime),
        PhaseSpaceConfig(cfg.n_q + 1, cfg.n_q_prime + 1),
        PhaseSpaceConfig(cfg.n_q + 2, cfg.n_q_prime + 2),
    ]
    results.append(
        CheckResult(
            "affine-gate-counts",
            check_affine_gate_growth(build_map_circuit, configs)
            and check_affine_gate_growth(build_inversion_circuit, configs),
            "per-kind gate counts grow affinely in register widths",
        )
    )
    return results
