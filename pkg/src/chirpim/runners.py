"""Monte Carlo experiment runners with deterministic, seed-keyed output.

Every runner draws its randomness from per-batch streams seeded by
(master seed, experiment id, sweep index, batch index), so results are
byte-identical for a fixed config regardless of the worker count. Rows are
returned as dicts and optionally written as CSV with one comment line
recording the preset, seed, and a config hash.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from typing import Iterable, Literal

import numpy as np

from .channel import RadarScene, radar_cfr, rician_realize
from .config import EXPERIMENT_IDS, ExperimentConfig
from .indexing import rank_to_indices
from .modem import ModemConfig, detect_words_batch, frame_from_symbols, \
    post_equalization_snr, tx_bins, union_bound_bler
from .chirps import measure_pmepr
from .radar import RadarObservation, crlb_range, crlb_range_no_phase, \
    estimate_lmmse, estimate_multi_mf, min_resolution

PMEPR_THRESHOLDS = np.round(np.arange(0.0, 12.0 + 1e-9, 0.05), 2)
RADAR_BATCH = 64


def _rng(cfg: ExperimentConfig, experiment: str, sweep_idx: int,
         batch_idx: int) -> np.random.Generator:
    return np.random.default_rng(
        [cfg.seed, EXPERIMENT_IDS[experiment], sweep_idx, batch_idx])


def _workers(cfg: ExperimentConfig) -> int:
    return int(os.environ.get("CHIRPIM_WORKERS", cfg.workers))


def _map_ordered(fn, tasks: Iterable[tuple], workers: int):
    """Apply ``fn`` over tasks, yielding results in task order.

    Parallel execution submits one wave of ``workers`` tasks at a time so a
    consumer that stops early (error-count stopping) wastes at most one
    wave; results are reduced strictly in task order either way.
    """
    if workers <= 1:
        for task in tasks:
            yield fn(task)
        return
    it = iter(tasks)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        while True:
            wave = list(islice(it, workers))
            if not wave:
                return
            for fut in [pool.submit(fn, task) for task in wave]:
                yield fut.result()


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str, cfg: ExperimentConfig, experiment: str,
              fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# chirpim {experiment} preset={cfg.preset} seed={cfg.seed} "
                 f"config={cfg.sha()}\n")
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[name]) for name in fieldnames])


def random_words(mcfg: ModemConfig, batch: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Uniform random codewords: index rows, PSK rows, modulation vectors.

    Ranks are drawn from the 2**index_bits codebook the bit mapper uses,
    which is equivalent to encoding uniform random bits.
    """
    p1 = mcfg.capacity.index_bits
    ranks = rng.integers(1, (1 << p1) + 1, size=batch)
    idx = np.array([rank_to_indices(int(n), mcfg.m, mcfg.length, mcfg.delta)
                    for n in ranks], dtype=np.int64)
    psk = rng.integers(0, mcfg.h, size=(batch, mcfg.length))
    d = np.zeros((batch, mcfg.m), dtype=complex)
    np.put_along_axis(d, idx, np.sqrt(mcfg.e_s) * np.exp(2j * np.pi * psk / mcfg.h), axis=1)
    return idx, psk, d


# ---------------------------------------------------------------------------
# PMEPR CCDF
# ---------------------------------------------------------------------------

def _pmepr_batch(task) -> np.ndarray:
    cfg, batch_idx, batch = task
    mcfg = cfg.modem_config()
    rng = _rng(cfg, "pmepr", 0, batch_idx)
    _, _, d = random_words(mcfg, batch, rng)
    frame = frame_from_symbols(d, mcfg)
    # reference the peak against the nominal transmit power sum|g|^2 = M
    return np.atleast_1d(measure_pmepr(frame, oversample=8, p_av=float(mcfg.m)))


def run_pmepr_ccdf(cfg: ExperimentConfig, out: str | None = None) -> list[dict]:
    """Empirical CCDF of the oversampled PMEPR over random frames.

    Rows: (scheme, pmepr_db, ccdf) on a fixed 0.05 dB threshold grid; every
    row also carries the observed maximum. Peaks are referenced against the
    nominal transmit power (sum |g_k|^2 = M), i.e. the average power of the
    whole transmission rather than the individual frame.
    """
    batches = [(cfg, bi, min(cfg.batch, cfg.trials - bi * cfg.batch))
               for bi in range((cfg.trials + cfg.batch - 1) // cfg.batch)]
    exceed = np.zeros(len(PMEPR_THRESHOLDS), dtype=np.int64)
    total = 0
    max_pmepr = -np.inf
    for values in _map_ordered(_pmepr_batch, batches, _workers(cfg)):
        exceed += (values[:, None] > PMEPR_THRESHOLDS[None, :]).sum(axis=0)
        total += len(values)
        max_pmepr = max(max_pmepr, float(values.max()))
    rows = [{"scheme": cfg.scheme.value, "pmepr_db": float(t),
             "ccdf": float(exceed[i] / total), "max_pmepr_db": max_pmepr}
            for i, t in enumerate(PMEPR_THRESHOLDS)]
    if out:
        write_csv(out, cfg, "pmepr", ["scheme", "pmepr_db", "ccdf", "max_pmepr_db"], rows)
    return rows


# ---------------------------------------------------------------------------
# BLER
# ---------------------------------------------------------------------------

def _bler_batch(task) -> tuple[int, int]:
    cfg, sweep_idx, batch_idx, sigma2, batch = task
    mcfg = cfg.modem_config()
    rng = _rng(cfg, "bler", sweep_idx, batch_idx)
    idx, psk, d = random_words(mcfg, batch, rng)
    w = tx_bins(d, mcfg)
    if cfg.fading:
        h_c = np.stack([rician_realize(cfg.pdp, rng).cfr(mcfg.k, cfg.t_s)
                        for _ in range(batch)])
    else:
        h_c = np.ones_like(w)
    noise = (rng.standard_normal(w.shape) + 1j * rng.standard_normal(w.shape)) \
        * np.sqrt(sigma2 / 2.0)
    det_i, det_z = detect_words_batch(h_c * w + noise, h_c, sigma2, mcfg)
    errors = np.any((det_i != idx) | (det_z != psk), axis=1)
    return batch, int(errors.sum())


def _wilson(errors: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials ** 2)) / denom
    return float(max(center - half, 0.0)), float(min(center + half, 1.0))


def run_bler(cfg: ExperimentConfig, out: str | None = None) -> list[dict]:
    """Simulated block-error rate plus the analytical union bound.

    Sweeps ``cfg.snr_db`` (or ``cfg.ebn0_db``, converted through the frame's
    bit count). Each point accumulates batches until ``target_errors`` block
    errors or ``max_trials`` frames. The bound column is the AWGN union
    bound at the post-equalization noise level; under fading it is reported
    unchanged as a reference curve.
    """
    mcfg = cfg.modem_config()
    if cfg.fading:
        if not cfg.pdp:
            raise ValueError("fading runs need a power-delay profile")
        longest = max(tap[0] for tap in cfg.pdp)
        if longest >= cfg.t_cp:
            raise ValueError(
                f"tap delay {longest:.3e}s reaches the cyclic prefix {cfg.t_cp:.3e}s")
    bits = mcfg.capacity.total
    use_ebn0 = len(cfg.ebn0_db) > 0
    points = cfg.ebn0_db if use_ebn0 else cfg.snr_db
    rows = []
    workers = _workers(cfg)
    for sweep_idx, value in enumerate(points):
        snr_db = value + 10 * np.log10(bits / cfg.m) if use_ebn0 else value
        sigma2 = 10.0 ** (-snr_db / 10.0)
        n0 = 1.0 / post_equalization_snr(mcfg.fdss, sigma2)
        bound = union_bound_bler(mcfg, n0)
        trials = errors = 0
        max_batches = (cfg.max_trials + cfg.batch - 1) // cfg.batch
        tasks = ((cfg, sweep_idx, bi, sigma2, cfg.batch) for bi in range(max_batches))
        for n, e in _map_ordered(_bler_batch, tasks, workers):
            trials += n
            errors += e
            if errors >= cfg.target_errors or trials >= cfg.max_trials:
                break
        lo, hi = _wilson(errors, trials)
        rows.append({
            "axis_db": float(value), "snr_db": float(snr_db),
            "bler": float(errors / trials), "union_bound": bound,
            "trials": trials, "errors": errors, "ci_lo": lo, "ci_hi": hi,
        })
    if out:
        write_csv(out, cfg, "bler",
                  ["axis_db", "snr_db", "bler", "union_bound", "trials",
                   "errors", "ci_lo", "ci_hi"], rows)
    return rows


# ---------------------------------------------------------------------------
# Radar RMSE and resolution
# ---------------------------------------------------------------------------

def _draw_scene(cfg: ExperimentConfig, scenario: str, rng: np.random.Generator,
                spacing_m: float | None = None) -> RadarScene:
    t_cp = cfg.t_cp
    if scenario == "single":
        d0 = rng.uniform(*cfg.single_range_m)
        targets = ((d0, cfg.single_coeff),)
    else:
        d0 = rng.uniform(*cfg.two_range_m)
        if spacing_m is None:
            spacing_m = rng.uniform(*cfg.two_spacing_rmin) * min_resolution(cfg.bandwidth_hz)
        targets = ((d0, cfg.two_coeff), (d0 + spacing_m, cfg.two_coeff))
    return RadarScene(targets=targets, f_c=cfg.f_c, t_s=cfg.t_s, t_cp=t_cp)


def _radar_batch(task) -> np.ndarray:
    """Accumulates [sum err2 MF, sum err2 LMMSE, sum crlb, sum crlb_expected,
    sum crlb_nophase, trials] over one batch."""
    cfg, scenario, sweep_idx, batch_idx, sigma2, batch, spacing_m = task
    mcfg = cfg.modem_config()
    rng = _rng(cfg, "radar-rmse" if spacing_m is None else "resolution",
               sweep_idx, batch_idx)
    n_targets = 1 if scenario == "single" else 2
    acc = np.zeros(6)
    for _ in range(batch):
        _, _, d = random_words(mcfg, 1, rng)
        w = tx_bins(d[0], mcfg)
        scene = _draw_scene(cfg, scenario, rng, spacing_m)
        noise = (rng.standard_normal(mcfg.m) + 1j * rng.standard_normal(mcfg.m)) \
            * np.sqrt(sigma2 / 2.0)
        obs = RadarObservation(b=radar_cfr(scene, mcfg.k) * w + noise, w=w,
                               k=mcfg.k, sigma2=sigma2, f_c=cfg.f_c,
                               t_s=cfg.t_s, t_cp=cfg.t_cp)
        truth = np.array(scene.distances)
        est_mf = estimate_multi_mf(obs, n_targets)
        est_lm = estimate_lmmse(obs, n_targets)
        acc[0] += np.sum((est_mf.distances - truth) ** 2)
        acc[1] += np.sum((est_lm.distances - truth) ** 2)
        acc[2] += crlb_range(scene, (mcfg.k, w), sigma2)
        acc[3] += crlb_range(scene, mcfg.fdss, sigma2)
        acc[4] += crlb_range_no_phase(scene, mcfg.m, sigma2)
        acc[5] += 1
    return acc


def _radar_point(cfg: ExperimentConfig, scenario: str, sweep_idx: int,
                 sigma2: float, spacing_m: float | None) -> dict:
    batches = [(cfg, scenario, sweep_idx, bi, sigma2,
                min(RADAR_BATCH, cfg.trials - bi * RADAR_BATCH), spacing_m)
               for bi in range((cfg.trials + RADAR_BATCH - 1) // RADAR_BATCH)]
    acc = np.zeros(6)
    for part in _map_ordered(_radar_batch, batches, _workers(cfg)):
        acc += part
    n = acc[5]
    return {
        "rmse_mf_m": float(np.sqrt(acc[0] / n)),
        "rmse_lmmse_m": float(np.sqrt(acc[1] / n)),
        "crlb_m": float(np.sqrt(acc[2] / n)),
        "crlb_expected_m": float(np.sqrt(acc[3] / n)),
        "crlb_nophase_m": float(np.sqrt(acc[4] / n)),
        "trials": int(n),
    }


def run_radar_rmse(cfg: ExperimentConfig,
                   scenario: Literal["single", "two"] = "single",
                   out: str | None = None) -> list[dict]:
    """Range-estimation RMSE versus SNR for the MF and LMMSE estimators,
    alongside the phase-aware, expectation-form, and phase-unaware range
    bounds (all reported as root values in meters)."""
    if scenario not in ("single", "two"):
        raise ValueError("scenario must be 'single' or 'two'")
    rows = []
    for sweep_idx, snr_db in enumerate(cfg.snr_db):
        sigma2 = 10.0 ** (-snr_db / 10.0)
        row = {"snr_db": float(snr_db), "scenario": scenario}
        row.update(_radar_point(cfg, scenario, sweep_idx, sigma2, None))
        rows.append(row)
    if out:
        write_csv(out, cfg, "radar-rmse",
                  ["snr_db", "scenario", "rmse_mf_m", "rmse_lmmse_m", "crlb_m",
                   "crlb_expected_m", "crlb_nophase_m", "trials"], rows)
    return rows


def run_resolution(cfg: ExperimentConfig, out: str | None = None) -> list[dict]:
    """Two-target RMSE versus spacing (in units of the minimum resolution)
    at the fixed SNR ``cfg.resolution_snr_db``."""
    factors = cfg.spacing_rmin or (0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0)
    r_min = min_resolution(cfg.bandwidth_hz)
    sigma2 = 10.0 ** (-cfg.resolution_snr_db / 10.0)
    rows = []
    for sweep_idx, factor in enumerate(factors):
        row = {"spacing_m": float(factor * r_min), "spacing_rmin": float(factor),
               "snr_db": float(cfg.resolution_snr_db)}
        row.update(_radar_point(cfg, "two", sweep_idx, sigma2, float(factor * r_min)))
        rows.append(row)
    if out:
        write_csv(out, cfg, "resolution",
                  ["spacing_m", "spacing_rmin", "snr_db", "rmse_mf_m",
                   "rmse_lmmse_m", "crlb_m", "crlb_expected_m",
                   "crlb_nophase_m", "trials"], rows)
    return rows
