"""Monte Carlo sampling of cascaded EGG channels.

Serves as the independent check on the closed-form metrics: samples are
drawn from the physical model (mixture of exponential and generalized-gamma
layers, multiplied together), never from the H-function expressions.

Reproducibility: the sample budget is split across ``streams`` independent
Philox generators keyed by (seed, stream index).  Per-stream statistics are
merged in stream order, so results do not depend on how many workers ran.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import CascadeChannel, EggLayer, mean_irradiance
from .metrics import TAU, Modulation, ber_conditional

__all__ = [
    "RngSpec",
    "Estimate",
    "stream_generators",
    "gamma_variates",
    "sample_layer",
    "sample_irradiance",
    "sample_snr",
    "estimate_ber",
    "estimate_capacity",
    "estimate_outage",
    "estimate_mean",
]

MIN_SAMPLES = 1000
_CHUNK = 1 << 20


@dataclass(frozen=True)
class RngSpec:
    seed: int = 0
    streams: int = 1

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.streams < 1:
            raise ValueError("stream count must be >= 1")

    def child(self, index: int) -> "RngSpec":
        """Spec for an independent sub-experiment (e.g. one sweep point)."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(1, int(index)))
        return RngSpec(int(ss.generate_state(1, np.uint64)[0]), self.streams)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int

    def zscore(self, reference: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.value == reference else math.inf
        return (self.value - reference) / self.stderr


def stream_generators(spec: RngSpec) -> list[np.random.Generator]:
    return [
        np.random.Generator(np.random.Philox(np.random.SeedSequence(int(spec.seed), spawn_key=(0, k))))
        for k in range(spec.streams)
    ]


def gamma_variates(shape: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Gamma(shape, 1) draws by the Marsaglia-Tsang squeeze method.

    For shape < 1 draws Gamma(shape + 1) and multiplies by U^(1/shape).
    """
    if shape <= 0:
        raise ValueError("gamma shape must be > 0")
    boost = shape < 1.0
    alpha = shape + 1.0 if boost else shape
    d = alpha - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        batch = need + need // 20 + 16
        x = rng.standard_normal(batch)
        u = rng.random(batch)
        v = 1.0 + c * x
        ok = v > 0
        v = v * v * v
        x2 = x * x
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = ok & ((u < 1.0 - 0.0331 * x2 * x2) | (np.log(u) < 0.5 * x2 + d * (1.0 - v + np.log(v))))
        got = (d * v)[accept][:need]
        out[filled: filled + got.size] = got
        filled += got.size
    if boost:
        out *= rng.random(size) ** (1.0 / shape)
    return out


def sample_layer(layer: EggLayer, rng: np.random.Generator, size: int | None = None):
    """Irradiance draws of one layer: Exp(lambda) w.p. omega, else b * G^(1/c)."""
    n = 1 if size is None else int(size)
    pick_exp = rng.random(n) < layer.omega
    k = int(pick_exp.sum())
    out = np.empty(n)
    out[pick_exp] = layer.lam * rng.standard_exponential(k)
    if k < n:
        out[~pick_exp] = layer.b * gamma_variates(layer.a, n - k, rng) ** (1.0 / layer.c)
    return float(out[0]) if size is None else out


def sample_irradiance(channel: CascadeChannel, rng: np.random.Generator, size: int | None = None):
    n = 1 if size is None else int(size)
    out = np.ones(n)
    for layer in channel.layers:
        out *= sample_layer(layer, rng, n)
    return float(out[0]) if size is None else out


def sample_snr(channel: CascadeChannel, rng: np.random.Generator, size: int | None = None):
    """gamma = mu_r * (I_N / E[I_N])^r."""
    ratio = sample_irradiance(channel, rng, size) / mean_irradiance(channel)
    return channel.mu_r * ratio ** channel.r


def _stream_moments(stat, channel, n, rng):
    """(count, mean, M2) of stat(gamma) over n draws, processed in chunks."""
    count, mean, m2 = 0, 0.0, 0.0
    left = n
    while left > 0:
        k = min(left, _CHUNK)
        vals = np.asarray(stat(sample_snr(channel, rng, k)), dtype=float)
        cmean = float(vals.mean())
        cm2 = float(((vals - cmean) ** 2).sum())
        count, mean, m2 = _merge((count, mean, m2), (k, cmean, cm2))
        left -= k
    return count, mean, m2


def _merge(x, y):
    (na, ma, sa), (nb, mb, sb) = x, y
    n = na + nb
    if na == 0:
        return nb, mb, sb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def estimate_mean(stat, channel: CascadeChannel, samples: int, rng: RngSpec, workers: int = 1) -> Estimate:
    """Sample mean and standard error of ``stat(gamma)``."""
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    gens = stream_generators(rng)
    base, extra = divmod(samples, rng.streams)
    sizes = [base + (k < extra) for k in range(rng.streams)]
    jobs = [(g, s) for g, s in zip(gens, sizes) if s > 0]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda j: _stream_moments(stat, channel, j[1], j[0]), jobs))
    else:
        parts = [_stream_moments(stat, channel, s, g) for g, s in jobs]
    acc = (0, 0.0, 0.0)
    for part in parts:
        acc = _merge(acc, part)
    n, mean, m2 = acc
    var = m2 / (n - 1) if n > 1 else 0.0
    return Estimate(mean, math.sqrt(var / n), n)


def estimate_ber(channel: CascadeChannel, modulation: Modulation, samples: int, rng: RngSpec,
                 workers: int = 1) -> Estimate:
    """Average of the conditional BER kernel over channel draws."""
    return estimate_mean(lambda g: ber_conditional(modulation, g), channel, samples, rng, workers)


def estimate_capacity(channel: CascadeChannel, samples: int, rng: RngSpec, workers: int = 1) -> Estimate:
    return estimate_mean(lambda g: np.log1p(TAU * g), channel, samples, rng, workers)


def estimate_outage(channel: CascadeChannel, gamma_th: float, samples: int, rng: RngSpec,
                    workers: int = 1) -> Estimate:
    """Frequency of gamma <= gamma_th; the standard error is the binomial one."""
    return estimate_mean(lambda g: (g <= gamma_th).astype(float), channel, samples, rng, workers)
