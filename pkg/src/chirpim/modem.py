"""Transmitter and receiver chains for index-modulated waveforms.

Three schemes share one frame structure (M modulation symbols, N-point
IDFT, cyclic prefix):

* ``CSC_IM``      - M-point DFT spreading shaped by a chirp FDSS profile;
                    each active index becomes a circularly-shifted chirp.
* ``DFT_S_OFDM_IM`` - DFT spreading with a flat profile (Dirichlet pulses).
* ``OFDM_IM``     - symbols mapped straight onto subcarriers, no spreading.

The spread schemes are received with a single-tap LMMSE frequency-domain
equalizer followed by an M-point IDFT and a per-bin ML detector; OFDM-IM
uses a per-subcarrier ML detector that folds in the channel response.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property

import numpy as np

from . import indexing
from .chirps import ChirpSpec, FdssProfile, FrameSignal, chirp_fdss, flat_fdss, \
    synthesize
from .indexing import IndexWord, bit_capacity, bits_to_word, int_to_bits
from .util import qfunc


class Scheme(str, Enum):
    CSC_IM = "csc-im"
    DFT_S_OFDM_IM = "dft-s-ofdm-im"
    OFDM_IM = "ofdm-im"

    @property
    def spreads(self) -> bool:
        return self is not Scheme.OFDM_IM


class DetectionStuck(RuntimeError):
    """Greedy separation-constrained detection ran out of feasible bins."""


@dataclass(frozen=True)
class ModemConfig:
    """Waveform + codec parameters for one link.

    ``e_s = m/length`` is the per-active-index symbol energy, which keeps
    every frame at total power m regardless of how many indices are active.
    """

    scheme: Scheme
    m: int
    n: int
    n_cp: int
    length: int
    h: int
    delta: int = 0
    t_s: float = 1.0
    chirp: ChirpSpec | None = None

    def __post_init__(self):
        if self.n <= self.m:
            raise ValueError(f"N={self.n} must exceed M={self.m}")
        if not 1 <= self.length <= self.m // 2:
            raise ValueError(f"need 1 <= L <= M/2, got L={self.length}")
        if self.h < 1 or self.h & (self.h - 1):
            raise ValueError("H must be a power of two")
        if self.scheme is Scheme.CSC_IM:
            if self.chirp is None:
                raise ValueError("CSC-IM needs a chirp spec")
            if self.chirp.m != self.m:
                raise ValueError(f"chirp window M={self.chirp.m} != config M={self.m}")
            if self.chirp.t_s != self.t_s:
                raise ValueError("chirp and config disagree on t_s")
        if indexing.index_count(self.length, self.delta, self.m) < 2:
            raise ValueError("separation leaves fewer than 2 index sequences")

    @property
    def e_s(self) -> float:
        return self.m / self.length

    @cached_property
    def fdss(self) -> FdssProfile:
        if self.scheme is Scheme.CSC_IM:
            return chirp_fdss(self.chirp)
        return flat_fdss(self.m)

    @property
    def k(self) -> np.ndarray:
        return self.fdss.k

    @cached_property
    def capacity(self) -> indexing.BitCapacity:
        return bit_capacity(self.m, self.length, self.h, self.delta)

    @property
    def sample_rate(self) -> float:
        return self.n / self.t_s

    @property
    def t_cp(self) -> float:
        return self.n_cp / self.sample_rate


@dataclass(frozen=True)
class EqualizedSymbols:
    """Post-IDFT modulation-symbol estimates and the analytical SNR of the
    single-tap MMSE chain they came out of."""

    y: np.ndarray
    snr_post: float | np.ndarray


def encode(bits, cfg: ModemConfig) -> tuple[IndexWord, np.ndarray]:
    """Information bits -> (index word, length-M modulation vector)."""
    word = bits_to_word(bits, cfg.m, cfg.length, cfg.h, cfg.delta)
    return word, word_symbols(word, cfg)


def word_symbols(word: IndexWord, cfg: ModemConfig) -> np.ndarray:
    """Sparse modulation vector: sqrt(E_s) e^{j2pi h/H} on the active indices."""
    d = np.zeros(cfg.m, dtype=complex)
    d[list(word.indices)] = np.sqrt(cfg.e_s) * \
        np.exp(2j * np.pi * np.asarray(word.psk) / cfg.h)
    return d


def tx_bins(d: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Frequency-domain reference symbols w on bins k (shape (..., M)).

    Spread schemes: w_k = g_k * (normalized M-point DFT of d)_k. OFDM-IM
    maps symbol m straight onto bin k = l_d + m.
    """
    d = np.asarray(d, dtype=complex)
    if not cfg.scheme.spreads:
        return d.copy()
    s = np.fft.fft(d, axis=-1) / np.sqrt(cfg.m)
    return cfg.fdss.g * s[..., cfg.k % cfg.m]


def frame_from_symbols(d: np.ndarray, cfg: ModemConfig) -> FrameSignal:
    """Time-domain frame for modulation symbols ``d`` (batchable)."""
    d = np.asarray(d, dtype=complex)
    if cfg.scheme.spreads:
        return synthesize(d, cfg.fdss, cfg.n, cfg.n_cp, t_s=cfg.t_s)
    grid = np.zeros(d.shape[:-1] + (cfg.n,), dtype=complex)
    grid[..., cfg.k % cfg.n] = d
    body = np.fft.ifft(grid, axis=-1) * cfg.n
    samples = np.concatenate([body[..., cfg.n - cfg.n_cp:], body], axis=-1)
    return FrameSignal(samples=samples, n=cfg.n, n_cp=cfg.n_cp, sample_rate=cfg.sample_rate)


def tx_frame(bits, cfg: ModemConfig) -> FrameSignal:
    """Full transmitter: bits -> encode -> synthesize -> CP prepend."""
    _, d = encode(bits, cfg)
    return frame_from_symbols(d, cfg)


def extract_bins(frame: FrameSignal, cfg: ModemConfig) -> np.ndarray:
    """Receiver front end: drop the CP, N-point DFT, pick bins l_d..l_u."""
    return np.fft.fft(frame.body, axis=-1)[..., cfg.k % cfg.n] / cfg.n


def post_equalization_snr(fdss: FdssProfile, sigma2: float, h_c=None):
    """SNR of the modulation symbols behind the MMSE equalizer + IDFT.

    snr = 1 / (sqrt(1/alpha) - 1) with
    alpha = ((1/M) sum_k |c_k|^2 / (|c_k|^2 + sigma2))^2 and c_k = H_k g_k
    (c_k = g_k in AWGN). alpha -> 1 gives snr -> inf.
    """
    c2 = np.abs(fdss.g) ** 2 if h_c is None else np.abs(np.asarray(h_c) * fdss.g) ** 2
    denom = c2 + sigma2
    term = np.divide(c2, denom, out=np.zeros_like(c2), where=denom > 0)
    alpha = np.mean(term, axis=-1) ** 2
    with np.errstate(divide="ignore"):
        snr = np.where(alpha >= 1.0, np.inf, 1.0 / (1.0 / np.sqrt(alpha) - 1.0))
    return snr if np.ndim(snr) else float(snr)


def equalize_lmmse(b: np.ndarray, h_c, fdss: FdssProfile, sigma2: float) -> EqualizedSymbols:
    """Single-tap LMMSE FDE followed by the M-point IDFT.

    Per bin: v_k = conj(H_k g_k) / (|H_k g_k|^2 + sigma2) * b_k, then v is
    placed at IDFT position k mod M and transformed back, recovering the
    modulation-symbol estimates y_l (exactly d in noiseless AWGN).
    """
    if sigma2 < 0:
        raise ValueError("noise variance must be >= 0")
    b = np.asarray(b, dtype=complex)
    m = fdss.m
    c = np.broadcast_to(np.asarray(h_c, dtype=complex) * fdss.g, b.shape)
    c2 = np.abs(c) ** 2
    denom = c2 + sigma2
    w = np.divide(np.conj(c), denom, out=np.zeros_like(c), where=denom > 0)
    grid = np.zeros_like(b)
    grid[..., fdss.k % m] = w * b
    y = np.fft.ifft(grid, axis=-1) * np.sqrt(m)
    return EqualizedSymbols(y=y, snr_post=post_equalization_snr(fdss, sigma2, h_c=h_c))


def _psk_metrics(y: np.ndarray, h: int) -> np.ndarray:
    """t_{l,z} = Re(y_l e^{-j2pi z/H}) for every bin l and phase integer z."""
    phases = np.exp(-2j * np.pi * np.arange(h) / h)
    return np.real(y[..., :, None] * phases)


def _cyclic_ok(cand: int, picks: list[int], m: int, delta: int) -> bool:
    for p in picks:
        dist = abs(cand - p)
        if min(dist, m - dist) < delta + 1:
            return False
    return True


def _select_word(metrics: np.ndarray, cfg: ModemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Pick L (bin, phase) pairs from an (M, H) metric table.

    Unconstrained: per-bin best phase, then the L best bins. Separation
    delta >= 1: greedy, each new bin must keep cyclic distance >= delta+1
    to all earlier picks. Ties resolve to the lowest bin then lowest phase.
    """
    best_z = np.argmax(metrics, axis=-1)
    best_v = np.take_along_axis(metrics, best_z[..., None], axis=-1)[..., 0]
    order = np.argsort(-best_v, kind="stable")
    if cfg.delta == 0:
        chosen = order[: cfg.length]
    else:
        picks: list[int] = []
        for cand in order:
            if _cyclic_ok(int(cand), picks, cfg.m, cfg.delta):
                picks.append(int(cand))
                if len(picks) == cfg.length:
                    break
        if len(picks) < cfg.length:
            raise DetectionStuck(
                f"only {len(picks)} of {cfg.length} bins satisfy separation {cfg.delta}")
        chosen = np.array(picks)
    chosen = np.sort(chosen)
    return chosen, best_z[chosen]


def ml_detect(eq: EqualizedSymbols, cfg: ModemConfig) -> IndexWord:
    """Per-bin ML detection without an index constraint (delta = 0 path):
    evaluates Re(y_l e^{-j2pi z/H}) for all (l, z) and keeps the L best bins."""
    if cfg.delta != 0:
        raise ValueError("config carries a separation constraint; use ml_detect_is")
    idx, psk = _select_word(_psk_metrics(np.asarray(eq.y), cfg.h), cfg)
    return IndexWord(indices=tuple(int(i) for i in idx), psk=tuple(int(z) for z in psk),
                     m=cfg.m, h=cfg.h, delta=0)


def ml_detect_is(eq: EqualizedSymbols, cfg: ModemConfig) -> IndexWord:
    """Greedy separation-aware detection: repeatedly take the best (bin,
    phase) pair whose cyclic distance to every earlier pick is >= delta+1."""
    if cfg.delta < 1:
        raise ValueError("ml_detect_is needs delta >= 1")
    idx, psk = _select_word(_psk_metrics(np.asarray(eq.y), cfg.h), cfg)
    return IndexWord(indices=tuple(int(i) for i in idx), psk=tuple(int(z) for z in psk),
                     m=cfg.m, h=cfg.h, delta=cfg.delta)


def _ofdm_im_metrics(b: np.ndarray, h_c, cfg: ModemConfig) -> np.ndarray:
    """Per-subcarrier ML metrics with the channel response folded in.

    Choosing the active set that minimizes ||b - diag(H) d||^2 is the same
    as maximizing, per active bin, 2 sqrt(E_s) Re(b_l conj(H_l) e^{-j theta})
    - E_s |H_l|^2.
    """
    hc = np.broadcast_to(np.asarray(h_c, dtype=complex), b.shape)
    corr = _psk_metrics(b * np.conj(hc), cfg.h)
    return 2.0 * np.sqrt(cfg.e_s) * corr - cfg.e_s * (np.abs(hc) ** 2)[..., :, None]


def rx_bins(b: np.ndarray, h_c, sigma2: float, cfg: ModemConfig) -> IndexWord:
    """Detect one frame from its received frequency-domain bins."""
    if cfg.scheme.spreads:
        eq = equalize_lmmse(b, h_c, cfg.fdss, sigma2)
        return ml_detect_is(eq, cfg) if cfg.delta >= 1 else ml_detect(eq, cfg)
    metrics = _ofdm_im_metrics(np.asarray(b, dtype=complex), h_c, cfg)
    idx, psk = _select_word(metrics, cfg)
    return IndexWord(indices=tuple(int(i) for i in idx), psk=tuple(int(z) for z in psk),
                     m=cfg.m, h=cfg.h, delta=cfg.delta)


def detect_words_batch(b: np.ndarray, h_c, sigma2: float,
                       cfg: ModemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Detect a batch of frames from bins ``b`` of shape (B, M).

    Returns (indices, psk) int arrays of shape (B, L). The unconstrained
    path is fully vectorized; the separation-aware path runs the greedy
    search per frame and falls back to the unconstrained pick for frames
    where it gets stuck.
    """
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    if cfg.scheme.spreads:
        metrics = _psk_metrics(equalize_lmmse(b, h_c, cfg.fdss, sigma2).y, cfg.h)
    else:
        metrics = _ofdm_im_metrics(b, h_c, cfg)
    if cfg.delta == 0:
        best_z = np.argmax(metrics, axis=-1)
        best_v = np.take_along_axis(metrics, best_z[..., None], axis=-1)[..., 0]
        top = np.sort(np.argsort(-best_v, axis=-1, kind="stable")[:, : cfg.length], axis=-1)
        return top, np.take_along_axis(best_z, top, axis=-1)
    out_i = np.empty((len(metrics), cfg.length), dtype=np.int64)
    out_z = np.empty_like(out_i)
    unconstrained = replace(cfg, delta=0)
    for row, table in enumerate(metrics):
        try:
            idx, psk = _select_word(table, cfg)
        except DetectionStuck:
            idx, psk = _select_word(table, unconstrained)
        out_i[row], out_z[row] = idx, psk
    return out_i, out_z


def word_bits_folded(word: IndexWord, cfg: ModemConfig) -> np.ndarray:
    """Bits for a detected word. Detected ranks can exceed the encoder's
    2**index_bits codebook (the detector searches every valid sequence);
    those fold back modulo the codebook size so the receiver always emits
    a bit estimate."""
    cap = cfg.capacity
    value = (word.rank - 1) % (1 << cap.index_bits) if cap.index_bits else 0
    bits_per_psk = cfg.h.bit_length() - 1
    parts = [int_to_bits(value, cap.index_bits)]
    parts += [int_to_bits(z, bits_per_psk) for z in word.psk]
    parts = [p for p in parts if len(p)]
    return np.concatenate(parts) if parts else np.zeros(0, np.uint8)


def rx_frame(frame: FrameSignal, h_c, sigma2: float, cfg: ModemConfig) -> np.ndarray:
    """Full receiver: time-domain frame -> bins -> equalize/detect -> bits.

    If the greedy separation-aware search gets stuck (possible only for
    L >= 3 under heavy noise), the unconstrained detector stands in; the
    frame is almost surely in error at that point anyway.
    """
    b = extract_bins(frame, cfg)
    try:
        word = rx_bins(b, h_c, sigma2, cfg)
    except DetectionStuck:
        word = rx_bins(b, h_c, sigma2, replace(cfg, delta=0))
    return word_bits_folded(word, cfg)


def union_bound_bler(cfg: ModemConfig, n0: float) -> float:
    """Union bound on the block-error probability at symbol-noise level n0.

    P <= (M-L) H (1 - (1 - Q(d_ind/sqrt(2 n0)))^L) + L (1 - (1 - P_psk)^L)
    with d_ind = sqrt(2 E_s), d_psk = 2 sqrt(E_s) sin(pi/H), and P_psk the
    H-PSK symbol-error term (2Q for H >= 4, Q for H = 2, 0 for H = 1).
    The result is clipped to [0, 1]. For the spread schemes n0 is the
    inverse of :func:`post_equalization_snr`.
    """
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    if n0 == 0:
        return 0.0
    e_s = cfg.e_s
    d_ind = np.sqrt(2.0 * e_s)
    q_ind = qfunc(d_ind / np.sqrt(2.0 * n0))
    if cfg.h >= 4:
        p_psk = 2.0 * qfunc(2.0 * np.sqrt(e_s) * np.sin(np.pi / cfg.h) / np.sqrt(2.0 * n0))
    elif cfg.h == 2:
        p_psk = qfunc(2.0 * np.sqrt(e_s) / np.sqrt(2.0 * n0))
    else:
        p_psk = 0.0
    bound = (cfg.m - cfg.length) * cfg.h * (1.0 - (1.0 - q_ind) ** cfg.length) \
        + cfg.length * (1.0 - (1.0 - p_psk) ** cfg.length)
    return float(min(max(bound, 0.0), 1.0))
