"""Monte Carlo orchestration: trials, sweeps, aggregation, and report files.

Every trial is a pure function of (config, trial index): randomness comes
from a counter-based Philox stream keyed by seed XOR trial index, so trials
can run serially or across threads with identical results, and reruns with
the same seed reproduce every output byte.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._version import __version__
from .baselines import evaluate_csit_baseline
from .channel import (
    ChannelRealization,
    UserGeometry,
    doppler_rotations,
    draw_noise,
    realize_channel,
    sample_geometry,
)
from .config import SweepSpec, SystemConfig, apply_sweep_value
from .receiver import (
    estimate_user,
    detect_symbols,
    expected_sinr,
    pilot_projections,
    scan_codebook,
    spectral_efficiency,
)
from .signal_core import (
    codebook_angles,
    cp_dft_stack,
    doppler_codebook,
    precoder_stack,
    steering_codebook,
    subcarrier_wavenumbers,
)
from .transmitter import Frame, assemble_frame, precode_frame

METHODS = ("proposed", "perfect_limit", "no_doppler", "ZF", "MRT")

CSV_COLUMNS = (
    "sweep_var",
    "sweep_value",
    "method",
    "mean_sum_se",
    "stderr",
    "mean_sum_se_overhead",
    "stderr_overhead",
    "mean_sum_se_estimated",
    "trials",
    "seed",
)


class Workspace:
    """Read-only per-configuration precomputations shared across trials."""

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg
        self.wavenumbers = subcarrier_wavenumbers(
            cfg.carrier_hz, cfg.bandwidth_hz, cfg.subcarriers,
            carrier_only=cfg.carrier_wavenumber_only,
        )
        self.u_stack = cp_dft_stack(cfg.antennas)
        self.precoders = precoder_stack(cfg.antennas)
        self.angles = codebook_angles(cfg.codebook_size)
        self.steering_cb = steering_codebook(
            self.angles, self.wavenumbers, cfg.antennas, cfg.antenna_spacing_m
        )
        self.t_pilot1, self.t_pilot2 = pilot_projections(self.u_stack, self.steering_cb)
        self.ones_doppler = np.ones_like(self.steering_cb)


@dataclass
class MethodResult:
    """Per-trial outcome of one method."""

    sum_se: float
    per_user_se: np.ndarray
    sum_se_estimated: Optional[float]
    symbol_errors: Optional[int]
    n_symbols: Optional[int]
    degenerate: bool


@dataclass
class TrialReport:
    index: int
    methods: dict


@dataclass(frozen=True)
class SweepRow:
    sweep_var: str
    sweep_value: float
    method: str
    mean_sum_se: float
    stderr: float
    mean_sum_se_overhead: float
    stderr_overhead: float
    mean_sum_se_estimated: Optional[float]
    trials: int
    seed: int


@dataclass
class SweepReport:
    rows: list
    metadata: dict
    per_user_summary: list


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based substream for one trial."""
    return np.random.Generator(np.random.Philox(key=seed ^ index))


def synthesize_observations(
    cfg: SystemConfig,
    workspace: Workspace,
    realization: ChannelRealization,
    frame: Frame,
    rotations: np.ndarray,
    noise: np.ndarray,
) -> np.ndarray:
    """Received samples y[k, l, b] = h_{k,l,b}^T x_{l,b} + z for every block."""
    x = precode_frame(frame.symbols, cfg.slot_power_w, workspace.precoders)
    return np.einsum("kli,lbi->klb", realization.composite, x) * rotations + noise


def _true_steering(cfg: SystemConfig, workspace: Workspace, geometry: UserGeometry) -> np.ndarray:
    phase = (
        -1j
        * workspace.wavenumbers[:, None]
        * cfg.antenna_spacing_m
        * np.arange(cfg.antennas)
        * np.sin(geometry.aod)
    )
    return np.exp(phase)


def _run_unitary_receiver(
    cfg: SystemConfig,
    workspace: Workspace,
    geometries: list,
    realization: ChannelRealization,
    frame: Frame,
    rotations: np.ndarray,
    y: np.ndarray,
    mode: str,
) -> MethodResult:
    """Shared receiver chain for the proposed scheme and its two variants.

    mode 'estimated' runs the codebook scan with Doppler probes, 'no_doppler'
    scans with all-ones Doppler vectors, 'perfect' bypasses the search and
    uses the exact gain, angle, and Doppler shift.
    """
    n = cfg.antennas
    n_users = cfg.users
    powers = cfg.slot_power_w
    cap = cfg.sinr_cap
    per_user_se = np.empty(n_users)
    per_user_est = np.empty(n_users)
    errors = 0
    for k in range(n_users):
        geo = geometries[k]
        if mode == "perfect":
            steering_sel = _true_steering(cfg, workspace, geo)
            doppler_sel = rotations[k]
            gain_sel = realization.gains[k] * np.sqrt(powers[n - 2])
            t1 = np.einsum("im,li->lm", workspace.u_stack[n - 2], steering_sel)[:, None, :]
            t2 = np.einsum("im,li->lm", workspace.u_stack[n - 1], steering_sel)[:, None, :]
            _, gamma_hat = scan_codebook(
                y[k], t1, t2, doppler_sel[:, None, :], frame.pilots, powers, cap
            )
            per_user_est[k] = float(np.mean(np.log2(1.0 + gamma_hat)))
        else:
            if mode == "no_doppler":
                dcb = workspace.ones_doppler
            else:
                dcb = doppler_codebook(
                    workspace.angles, workspace.wavenumbers, n,
                    cfg.block_duration_s, geo.speed, geo.heading,
                )
            est = estimate_user(
                y[k], workspace.t_pilot1, workspace.t_pilot2, dcb,
                workspace.angles, frame.pilots, powers, cap,
            )
            steering_sel = workspace.steering_cb[:, est.index, :]
            doppler_sel = dcb[:, est.index, :]
            gain_sel = est.gain
            per_user_est[k] = est.selected_se
        gamma = expected_sinr(
            workspace.u_stack, k, steering_sel, doppler_sel,
            rotations[k], realization.composite[k], powers, cfg.noise_power_w,
        )
        per_user_se[k] = spectral_efficiency(gamma)
        _, hard = detect_symbols(
            y[k], workspace.u_stack, steering_sel, doppler_sel, gain_sel, powers, n_users
        )
        errors += int(np.count_nonzero(hard[:, k] != frame.symbols[:, k]))
    return MethodResult(
        sum_se=float(np.sum(per_user_se)),
        per_user_se=per_user_se,
        sum_se_estimated=float(np.sum(per_user_est)),
        symbol_errors=errors,
        n_symbols=n_users * cfg.subcarriers,
        degenerate=False,
    )


def run_trial(
    cfg: SystemConfig,
    index: int,
    workspace: Optional[Workspace] = None,
    geometries: Optional[list] = None,
) -> TrialReport:
    """One Monte Carlo trial: one geometry and channel realization evaluated
    under all five methods. `geometries` overrides the sampled geometry
    (a test hook; the trial substream is unchanged otherwise)."""
    ws = workspace if workspace is not None else Workspace(cfg)
    rng = trial_rng(cfg.seed, index)
    geos = geometries if geometries is not None else sample_geometry(rng, cfg)
    realization = realize_channel(rng, geos, cfg, ws.wavenumbers)
    frame = assemble_frame(rng, cfg)
    noise = draw_noise(rng, cfg.noise_power_w, (cfg.users, cfg.subcarriers, cfg.antennas))
    rotations = doppler_rotations(geos, cfg, ws.wavenumbers)
    y = synthesize_observations(cfg, ws, realization, frame, rotations, noise)

    methods = {}
    methods["proposed"] = _run_unitary_receiver(
        cfg, ws, geos, realization, frame, rotations, y, mode="estimated"
    )
    methods["perfect_limit"] = _run_unitary_receiver(
        cfg, ws, geos, realization, frame, rotations, y, mode="perfect"
    )
    methods["no_doppler"] = _run_unitary_receiver(
        cfg, ws, geos, realization, frame, rotations, y, mode="no_doppler"
    )
    for name in ("ZF", "MRT"):
        base = evaluate_csit_baseline(
            name, realization.composite, cfg.noise_power_w,
            cfg.average_block_power_w, cfg.baseline_power_split,
        )
        methods[name] = MethodResult(
            sum_se=base.sum_se,
            per_user_se=base.per_user_se,
            sum_se_estimated=None,
            symbol_errors=None,
            n_symbols=None,
            degenerate=base.degenerate,
        )
    return TrialReport(index=index, methods=methods)


def run_point(
    cfg: SystemConfig,
    trials: int,
    threads: int = 1,
    workspace: Optional[Workspace] = None,
) -> list:
    """Run `trials` independent trials; results are ordered by trial index
    regardless of the thread count."""
    ws = workspace if workspace is not None else Workspace(cfg)
    if threads <= 1:
        return [run_trial(cfg, i, ws) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda i: run_trial(cfg, i, ws), range(trials)))


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def _summarize_users(samples: np.ndarray) -> dict:
    qs = np.percentile(samples, [0, 25, 50, 75, 100])
    return {
        "min": float(qs[0]),
        "q25": float(qs[1]),
        "median": float(qs[2]),
        "q75": float(qs[3]),
        "max": float(qs[4]),
    }


def aggregate_point(
    reports: list,
    sweep_var: str,
    sweep_value: float,
    overhead_factor: float,
    seed: int,
) -> tuple[list, list]:
    """Collapse one sweep point's trials into per-method rows and summaries."""
    rows = []
    summaries = []
    for method in METHODS:
        sums = np.array([r.methods[method].sum_se for r in reports])
        mean = float(np.mean(sums))
        err = _stderr(sums)
        est_vals = [r.methods[method].sum_se_estimated for r in reports]
        est_mean = None if any(v is None for v in est_vals) else float(np.mean(est_vals))
        rows.append(
            SweepRow(
                sweep_var=sweep_var,
                sweep_value=float(sweep_value),
                method=method,
                mean_sum_se=mean,
                stderr=err,
                mean_sum_se_overhead=mean * overhead_factor,
                stderr_overhead=err * overhead_factor,
                mean_sum_se_estimated=est_mean,
                trials=len(reports),
                seed=seed,
            )
        )
        pooled = np.concatenate([r.methods[method].per_user_se for r in reports])
        summaries.append(
            {
                "sweep_value": float(sweep_value),
                "method": method,
                "per_user_se": _summarize_users(pooled),
                "degenerate_trials": int(
                    sum(1 for r in reports if r.methods[method].degenerate)
                ),
            }
        )
    return rows, summaries


def complexity_count(n_sub: int, resolution: int, n: int) -> int:
    """Complex multiplications of the estimation combiner: (2L + LQ)N^2 + LQN."""
    if n_sub < 0 or resolution < 0 or n < 0:
        raise ValueError("complexity arguments must be nonnegative")
    return (2 * n_sub + n_sub * resolution) * n * n + n_sub * resolution * n


def _config_digest(cfg: SystemConfig, spec: SweepSpec) -> str:
    payload = json.dumps(
        {"config": cfg.echo(), "variable": spec.variable, "values": list(spec.values),
         "trials": spec.trials},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepReport:
    """Evaluate every sweep value over `spec.trials` trials per point."""
    base = spec.base
    overhead = base.users / base.antennas
    rows: list = []
    summaries: list = []
    for value in spec.values:
        cfg = apply_sweep_value(base, spec.variable, value)
        cfg = replace(cfg, trials=spec.trials)
        ws = Workspace(cfg)
        reports = run_point(cfg, spec.trials, threads=threads, workspace=ws)
        point_rows, point_summaries = aggregate_point(
            reports, spec.variable, value, overhead, base.seed
        )
        rows.extend(point_rows)
        summaries.extend(point_summaries)
    metadata = {
        "version": __version__,
        "config_digest": _config_digest(base, spec),
        "config": base.echo(),
        "sweep": {"variable": spec.variable, "values": list(spec.values), "trials": spec.trials},
        "seed": base.seed,
        "methods": list(METHODS),
        "complexity_multiplications": complexity_count(
            base.subcarriers, base.codebook_size, base.antennas
        ),
        "overhead_factor": overhead,
        "power_convention": (
            "baseline beams share the unitary scheme's per-block average power"
            if base.baseline_power_split == "equal_total"
            else "each baseline user beam carries the full per-block average power"
        ),
    }
    return SweepReport(rows=rows, metadata=metadata, per_user_summary=summaries)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(report: SweepReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in report.rows:
        lines.append(
            ",".join(
                _format_value(getattr(row, column)) for column in CSV_COLUMNS
            )
        )
    return "\n".join(lines) + "\n"


def render_json(report: SweepReport) -> str:
    payload = {
        "metadata": report.metadata,
        "rows": [
            {column: getattr(row, column) for column in CSV_COLUMNS}
            for row in report.rows
        ],
        "per_user_summary": report.per_user_summary,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report(report: SweepReport, path: str, fmt: str = "csv") -> None:
    """Serialize the report; reruns with the same seed are byte-identical."""
    if fmt == "csv":
        text = render_csv(report)
    elif fmt == "json":
        text = render_json(report)
    else:
        raise ValueError(f"unknown report format '{fmt}'")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeError(f"cannot write report '{path}': {exc}") from exc
