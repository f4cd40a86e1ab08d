"""Scenario runner: the headline experiments as reproducible file-producing runs.

Each scenario writes CSV tables, portable graymaps and a manifest into its
output directory.  Outputs are byte-identical for identical configurations
(seed included) at any parallelism degree: kernels partition work disjointly,
reductions run in fixed order, and floats are written with shortest exact
repr.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .analysis import (
    DIFFUSION_COEFFICIENT,
    FidelitySeries,
    FitError,
    MomentSeries,
    fidelity_timescale,
    fit_collapse_constant,
    fokker_planck_gaussian,
)
from .circuits import resource_estimate, run_iterations
from .images import (
    BinaryImage,
    density_to_image,
    generate_demon_image,
    image_to_points,
    load_portable_bitmap,
    recovery_overlap,
    save_portable_graymap,
)
from .lattice import (
    Ensemble,
    InversionImprecision,
    PhaseSpaceConfig,
    ensemble_histogram,
    evolve_ensemble,
    invert_ensemble_velocities,
    pixel_ensemble,
)
from .statevector import NoiseModel, RegisterLayout, prepare_uniform_superposition

SCENARIOS = ("diffusion", "profile", "image", "fidelity", "verify", "resources")


@dataclass
class RunConfig:
    """Run parameters; plain key=value files plus overrides populate this."""

    scenario: str = "diffusion"
    n_q: int = 5
    n_q_prime: int = 8
    epsilon_quantum: float = 0.01
    epsilon_classical: list[float] = field(default_factory=lambda: [1e-4, 1e-8])
    t_total: int = 70
    t_r: int = 35
    orbit_count: int = 100_000
    seed: int = 1
    out: str = ""
    image: str = ""
    threads: int = 0
    full: bool = False
    nq_list: list[int] = field(default_factory=lambda: [4, 5, 6])
    eps_list: list[float] = field(default_factory=lambda: [0.03, 0.1])
    n_seeds: int = 1
    stop_fidelity: float = 0.35
    particles: list[float] = field(default_factory=lambda: [6.022e23, 16384.0])
    collapse_constant: float = 0.5

    def phase_config(self) -> PhaseSpaceConfig:
        return PhaseSpaceConfig(self.n_q, self.n_q_prime)

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}, expected one of {SCENARIOS}")
        if self.scenario in ("diffusion", "image") and self.t_r > self.t_total:
            raise ValueError(f"t_r={self.t_r} exceeds t_total={self.t_total}")
        self.phase_config()


_SCENARIO_DEFAULTS: dict[str, dict] = {
    "verify": {"n_q": 3, "n_q_prime": 4},
}

_FULL_OVERRIDES = {"n_q": 7, "n_q_prime": 10, "orbit_count": 1_000_000}

# Manifest and determinism contract: execution details that must not change
# output bytes are excluded from the manifest.
_MANIFEST_EXCLUDE = {"out", "threads"}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read key=value lines; '#' starts a comment."""
    entries: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def _coerce(name: str, text: str, template) -> object:
    if isinstance(template, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected boolean, got {text!r}")
    if isinstance(template, int):
        return int(text)
    if isinstance(template, float):
        return float(text)
    if isinstance(template, list):
        items = [tok for tok in text.split(",") if tok.strip()]
        if template and isinstance(template[0], int):
            return [int(tok) for tok in items]
        return [float(tok) for tok in items]
    return text


def build_run_config(
    scenario: str,
    file_entries: dict[str, str] | None = None,
    overrides: dict[str, str] | None = None,
    full: bool = False,
) -> RunConfig:
    """Assemble a RunConfig: scenario defaults, then file, then overrides."""
    config = RunConfig(scenario=scenario)
    for key, value in _SCENARIO_DEFAULTS.get(scenario, {}).items():
        setattr(config, key, value)
    fields = {f.name: getattr(config, f.name) for f in dataclasses.fields(RunConfig)}
    for source in (file_entries or {}), (overrides or {}):
        for key, text in source.items():
            if key == "scenario":
                continue
            if key not in fields:
                raise ValueError(f"unknown config key {key!r}")
            setattr(config, key, _coerce(key, text, fields[key]))
            fields[key] = getattr(config, key)
    if full:
        config.full = True
        for key, value in _FULL_OVERRIDES.items():
            if key not in (overrides or {}):
                setattr(config, key, value)
    if not config.out:
        config.out = f"runs/{scenario}"
    config.validate()
    return config


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(config: RunConfig, out_dir: Path) -> None:
    lines = [f"catreverse={__version__}"]
    for f in sorted(dataclasses.fields(RunConfig), key=lambda f: f.name):
        if f.name in _MANIFEST_EXCLUDE:
            continue
        lines.append(f"{f.name}={_fmt(getattr(config, f.name))}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")


def _prepare(config: RunConfig) -> Path:
    kernels.set_thread_count(config.threads if config.threads else kernels.default_thread_count())
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(config, out_dir)
    return out_dir


def _initial_image(config: RunConfig, cfg: PhaseSpaceConfig) -> BinaryImage:
    if config.image:
        img = load_portable_bitmap(Path(config.image).read_bytes())
        if img.side != cfg.N:
            raise ValueError(f"image side {img.side} does not match N={cfg.N}")
        return img
    return generate_demon_image(cfg.N)


@dataclass
class ClassicalTrack:
    """Ensemble evolution with one imprecise inversion and a read-out inversion."""

    moments: MomentSeries
    histograms: dict[int, np.ndarray]
    ensemble: Ensemble


def run_classical_track(
    points,
    cfg: PhaseSpaceConfig,
    epsilon: float,
    orbit_count: int,
    seed: int,
    t_total: int,
    t_r: int | None,
    snapshot_times: tuple[int, ...] = (),
) -> ClassicalTrack:
    """Classical side: jittered orbits, imprecise inversion at t_r.

    The read-out inversion at the end is exact; only the demon's action at
    t_r carries the imprecision.
    """
    ens = pixel_ensemble(points, cfg, orbit_count, seed)
    moments = MomentSeries()
    histograms: dict[int, np.ndarray] = {}

    def record(step: int) -> None:
        moments.append(step, ens.mean_y(), ens.mean_y2())
        if step in snapshot_times:
            histograms[step] = ensemble_histogram(ens, cfg)

    record(0)
    for step in range(1, t_total + 1):
        ens = evolve_ensemble(ens, 1)
        if t_r is not None and step == t_r:
            ens = invert_ensemble_velocities(ens, InversionImprecision(epsilon))
        if t_r is not None and step == t_total:
            ens = invert_ensemble_velocities(ens, InversionImprecision(0.0))
        record(step)
    return ClassicalTrack(moments, histograms, ens)


def _moment_rows(track: str, moments: MomentSeries):
    for t, my, my2 in zip(moments.ts, moments.mean_y, moments.mean_y2):
        yield (t, track, my, my2)


def run_diffusion(config: RunConfig) -> Path:
    """Second moment <y^2> versus time for classical and quantum tracks."""
    out_dir = _prepare(config)
    cfg = config.phase_config()
    layout = RegisterLayout.from_config(cfg)
    image = _initial_image(config, cfg)
    points = image_to_points(image, cfg)

    rows = []
    for eps in config.epsilon_classical:
        track = run_classical_track(
            points, cfg, eps, config.orbit_count, config.seed, config.t_total, config.t_r
        )
        rows.extend(_moment_rows(f"classical_eps{eps:g}", track.moments))

    state = prepare_uniform_superposition(layout, points)
    noise = NoiseModel(config.epsilon_quantum, config.seed)
    log = run_iterations(
        state, cfg, config.t_total, noise=noise, invert_at=config.t_r, track_reference=True
    )
    rows.extend(_moment_rows("quantum_noisy", log.moments))
    rows.extend(_moment_rows("quantum_exact", log.reference_moments))

    y2_0 = log.moments.mean_y2[0]
    y0 = log.moments.mean_y[0]
    for t in range(config.t_total + 1):
        rows.append((t, "theory", y0, y2_0 + DIFFUSION_COEFFICIENT * t))

    write_csv(out_dir / "moments.csv", ["t", "track", "mean_y", "mean_y2"], rows)
    return out_dir


def run_profile(config: RunConfig) -> Path:
    """Momentum distribution w(y) at t = 20 and t = t_r, with the diffusive reference."""
    out_dir = _prepare(config)
    cfg = config.phase_config()
    layout = RegisterLayout.from_config(cfg)
    points = image_to_points(_initial_image(config, cfg), cfg)
    times = tuple(sorted({min(20, config.t_r), config.t_r}))

    classical = run_classical_track(
        points, cfg, 0.0, config.orbit_count, config.seed, max(times), None,
        snapshot_times=times,
    )
    state = prepare_uniform_superposition(layout, points)
    log = run_iterations(state, cfg, max(times), snapshot_times=times)
    y0 = log.moments.mean_y[0]

    y = -cfg.L / 2 + np.arange(cfg.LN) / cfg.N
    rows = []
    for t in times:
        cl = classical.histograms[t].sum(axis=0)
        qm = log.snapshots[t].sum(axis=0)
        ref = fokker_planck_gaussian(y, t, y0, DIFFUSION_COEFFICIENT, cfg.L) / cfg.N
        for j in range(cfg.LN):
            rows.append((t, "classical", j, y[j], float(cl[j])))
        for j in range(cfg.LN):
            rows.append((t, "quantum", j, y[j], float(qm[j])))
        for j in range(cfg.LN):
            rows.append((t, "fokker_planck", j, y[j], float(ref[j])))
    write_csv(out_dir / "profile.csv", ["t", "track", "j", "y", "w"], rows)
    return out_dir


_IMAGE_TRACKS = ("classical", "quantum")


def run_image(config: RunConfig) -> Path:
    """Demon-image echo: renders at t=0, t_r, 2t_r and recovery metrics."""
    out_dir = _prepare(config)
    cfg = config.phase_config()
    layout = RegisterLayout.from_config(cfg)
    image = _initial_image(config, cfg)
    points = image_to_points(image, cfg)
    t_r = config.t_r
    t_end = 2 * t_r
    times = (0, t_r, t_end)

    eps_cl = config.epsilon_classical[-1] if config.epsilon_classical else 1e-8
    classical = run_classical_track(
        points, cfg, eps_cl, config.orbit_count, config.seed, t_end, t_r, snapshot_times=times
    )
    state = prepare_uniform_superposition(layout, points)
    noise = NoiseModel(config.epsilon_quantum, config.seed) if config.epsilon_quantum > 0 else None
    log = run_iterations(state, cfg, t_end, noise=noise, invert_at=t_r, snapshot_times=times)

    densities = {"classical": classical.histograms, "quantum": log.snapshots}
    cell = (0, cfg.N, cfg.LN // 2 - cfg.N // 2, cfg.LN // 2 + cfg.N // 2)
    full_space = (0, cfg.N, 0, cfg.LN)
    two_cells = (0, cfg.N, cfg.LN // 2 - cfg.N, cfg.LN // 2 + cfg.N)
    for track in _IMAGE_TRACKS:
        frames = {
            "initial": (densities[track][0], cell),
            "tr": (densities[track][t_r], full_space),
            "2tr": (densities[track][t_end], two_cells),
        }
        for label, (density, region) in frames.items():
            img = density_to_image(density, region)
            (out_dir / f"image_{label}_{track}.pgm").write_bytes(save_portable_graymap(img))

    rows = []
    for track in _IMAGE_TRACKS:
        overlap = recovery_overlap(image, densities[track][t_end], cfg)
        rows.append((track, overlap))
    write_csv(out_dir / "summary.csv", ["track", "recovery_overlap"], rows)
    return out_dir


def _fidelity_cap(n_q: int, eps: float, t_total: int) -> int:
    if eps <= 0:
        return min(t_total, 12)
    return min(t_total, max(16, math.ceil(1.2 / (n_q * eps * eps))))


def run_fidelity(config: RunConfig) -> Path:
    """Fidelity decay runs over (n_q, eps) plus the scaling-collapse fit."""
    out_dir = _prepare(config)
    log2_l = config.n_q_prime - config.n_q
    rows = []
    runs: list[FidelitySeries] = []
    for n_q in config.nq_list:
        cfg = PhaseSpaceConfig(n_q, n_q + log2_l)
        layout = RegisterLayout.from_config(cfg)
        points = image_to_points(generate_demon_image(cfg.N), cfg)
        for eps in config.eps_list:
            cap = _fidelity_cap(n_q, eps, config.t_total if config.t_total > 0 else 10**9)
            seeds = [config.seed + 1000 * k for k in range(max(1, config.n_seeds))]
            curves = []
            for seed in seeds:
                state = prepare_uniform_superposition(layout, points)
                noise = NoiseModel(eps, seed) if eps > 0 else None
                log = run_iterations(
                    state, cfg, cap, noise=noise, track_reference=True,
                    stop_below_fidelity=config.stop_fidelity if eps > 0 else None,
                )
                curves.append(log.fidelity_series)
            steps = min(len(c.ts) for c in curves)
            mean = FidelitySeries(n_q, cfg.n_q_prime, eps, config.seed)
            for k in range(steps):
                mean.append(curves[0].ts[k], float(np.mean([c.fs[k] for c in curves])))
            runs.append(mean)
            for t, f in zip(mean.ts, mean.fs):
                rows.append((n_q, cfg.n_q_prime, eps, t, eps * eps * n_q * t, f))
    write_csv(
        out_dir / "fidelity.csv",
        ["n_q", "n_q_prime", "epsilon", "t", "eps2_nq_t", "f"],
        rows,
    )

    lines = []
    try:
        fit = fit_collapse_constant(runs)
        lines.append(f"C_fit={fit.c_fit!r}")
        lines.append(f"diagnostic={fit.diagnostic!r}")
        for (n_q, eps), xc in sorted(fit.crossings.items()):
            lines.append(f"crossing_nq{n_q}_eps{eps:g}={xc!r}")
        for n_q, eps in fit.excluded:
            lines.append(f"excluded_nq{n_q}_eps{eps:g}=never_crossed")
    except FitError as exc:
        lines.append("C_fit=nan")
        lines.append(f"error={exc}")
    (out_dir / "collapse.txt").write_text("\n".join(lines) + "\n")
    return out_dir


def run_verify(config: RunConfig, corrupt: str | None = None) -> tuple[Path, bool]:
    """Exhaustive oracle checks; returns False when any invariant fails."""
    from .verify import run_all_checks

    out_dir = _prepare(config)
    cfg = config.phase_config()
    results = run_all_checks(cfg, corrupt=corrupt)
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    ok = all(r.passed for r in results)
    lines.append(f"{'PASS' if ok else 'FAIL'} overall")
    (out_dir / "verify.txt").write_text("\n".join(lines) + "\n")
    return out_dir, ok


def run_resources(config: RunConfig) -> Path:
    """Register sizes and fidelity horizons for particle counts of interest."""
    out_dir = _prepare(config)
    L = 1 << (config.n_q_prime - config.n_q)
    rows = []
    for n_particles in config.particles:
        n_q, n_q_prime, total = resource_estimate(n_particles, L)
        t_f = fidelity_timescale(n_q, config.epsilon_quantum, config.collapse_constant)
        rows.append(
            (n_particles, L, n_q, n_q_prime, total, config.epsilon_quantum,
             config.collapse_constant, t_f)
        )
    write_csv(
        out_dir / "resources.csv",
        ["n_particles", "L", "n_q", "n_q_prime", "total_qubits", "epsilon", "C", "t_f"],
        rows,
    )
    return out_dir


def run_scenario(config: RunConfig) -> int:
    """Dispatch a scenario; returns the process exit code."""
    if config.scenario == "diffusion":
        run_diffusion(config)
    elif config.scenario == "profile":
        run_profile(config)
    elif config.scenario == "image":
        run_image(config)
    elif config.scenario == "fidelity":
        run_fidelity(config)
    elif config.scenario == "verify":
        _, ok = run_verify(config)
        return 0 if ok else 1
    elif config.scenario == "resources":
        run_resources(config)
    else:  # pragma: no cover - guarded by validate()
        raise ValueError(config.scenario)
    return 0
