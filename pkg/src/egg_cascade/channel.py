"""Mixture Exponential-Generalized-Gamma layers and cascaded channel statistics.

Each layer's irradiance has density

    f(I) = (omega/lambda) exp(-I/lambda)
         + (1 - omega) c I^{ac-1} exp(-(I/b)^c) / (b^{ac} Gamma(a)),

and the end-to-end fading is the product of N independent layers.  Expanding
the product of mixtures gives 2^N terms, each a single H^{N,0}_{0,N} function.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import fox_h
from .fox_h import HParams

__all__ = [
    "EggLayer",
    "CascadeChannel",
    "MixtureTerm",
    "MAX_LAYERS",
    "layer_pdf_direct",
    "layer_pdf_h",
    "enumerate_terms",
    "cascade_irradiance_pdf",
    "cascade_irradiance_cdf",
    "cascade_snr_pdf",
    "cascade_snr_cdf",
    "mean_irradiance",
]

MAX_LAYERS = 20
PDF_RTOL = 1e-10


@dataclass(frozen=True)
class EggLayer:
    omega: float
    lam: float
    a: float
    b: float
    c: float
    label: str = ""

    def __post_init__(self):
        for name in ("omega", "lam", "a", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"EggLayer.{name} must be a finite number, got {v!r}")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"EggLayer.omega must lie in [0, 1], got {self.omega}")
        for name in ("lam", "a", "b", "c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"EggLayer.{name} must be > 0, got {getattr(self, name)}")

    @classmethod
    def from_dict(cls, d: dict) -> "EggLayer":
        return cls(
            omega=d["omega"], lam=d["lambda"], a=d["a"], b=d["b"], c=d["c"],
            label=str(d.get("label", "")),
        )

    def to_dict(self) -> dict:
        out = {"omega": self.omega, "lambda": self.lam, "a": self.a, "b": self.b, "c": self.c}
        if self.label:
            out["label"] = self.label
        return out

    @property
    def mean(self) -> float:
        gg = self.b * math.exp(math.lgamma(self.a + 1.0 / self.c) - math.lgamma(self.a))
        return self.omega * self.lam + (1.0 - self.omega) * gg


@dataclass(frozen=True)
class CascadeChannel:
    """Ordered layer stack, detection exponent r and average electrical SNR mu_r."""

    layers: tuple
    r: int = 1
    mu_r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("a cascade needs at least one layer")
        if len(self.layers) > MAX_LAYERS:
            raise ValueError(f"at most {MAX_LAYERS} layers are supported, got {len(self.layers)}")
        if self.r not in (1, 2):
            raise ValueError(f"detection exponent r must be 1 (heterodyne) or 2 (IM/DD), got {self.r}")
        if not (math.isfinite(self.mu_r) and self.mu_r > 0):
            raise ValueError(f"mu_r must be finite and > 0, got {self.mu_r}")

    @property
    def N(self) -> int:
        return len(self.layers)

    def with_mu(self, mu_r: float) -> "CascadeChannel":
        return CascadeChannel(self.layers, self.r, mu_r)

    def with_mu_db(self, mu_db: float) -> "CascadeChannel":
        return self.with_mu(10.0 ** (mu_db / 10.0))


@dataclass(frozen=True)
class MixtureTerm:
    index: tuple
    weight: float
    scale: float
    params: HParams

    @property
    def mass(self) -> float:
        """Probability carried by this term: weight * prod Gamma(b_j)."""
        return self.weight * math.prod(math.gamma(b) for b, _ in self.params.lower)


def layer_pdf_direct(layer: EggLayer, I: float) -> float:
    if not I > 0:
        raise ValueError(f"irradiance must be > 0, got {I}")
    out = 0.0
    if layer.omega > 0:
        out += layer.omega / layer.lam * math.exp(-I / layer.lam)
    if layer.omega < 1:
        ac = layer.a * layer.c
        logg = (
            math.log(layer.c) + (ac - 1.0) * math.log(I) - (I / layer.b) ** layer.c
            - ac * math.log(layer.b) - math.lgamma(layer.a)
        )
        out += (1.0 - layer.omega) * math.exp(logg)
    return out


def _h_pdf_kernel(params: HParams, z: float, rtol: float) -> float:
    """H^{m,0}_{0,m}(z) with its limits outside the evaluator's range.

    These kernels vanish as a positive power of z at the origin and
    super-exponentially for z -> infinity, so both ends are set to zero.
    """
    if z == 0.0 or z > fox_h.MAX_Z:
        return 0.0
    return fox_h.evaluate(params, z, rtol=rtol).value


def layer_pdf_h(layer: EggLayer, I: float, rtol: float = PDF_RTOL) -> float:
    """Layer density through its two-H-function representation."""
    if not I > 0:
        raise ValueError(f"irradiance must be > 0, got {I}")
    out = 0.0
    if layer.omega > 0:
        h = _h_pdf_kernel(HParams(1, 0, (), [(0.0, 1.0)]), I / layer.lam, rtol)
        out += layer.omega / layer.lam * h
    if layer.omega < 1:
        h = _h_pdf_kernel(HParams(1, 0, (), [(layer.a, 1.0)]), (I / layer.b) ** layer.c, rtol)
        out += layer.c * (1.0 - layer.omega) / (I * math.gamma(layer.a)) * h
    return out


def mean_irradiance(channel: CascadeChannel) -> float:
    return math.prod(layer.mean for layer in channel.layers)


def enumerate_terms(channel: CascadeChannel, domain: str = "irradiance") -> list[MixtureTerm]:
    """All 2^N mixture terms; index 0 selects the exponential branch, 1 the GG branch.

    In the irradiance domain the term density is ``weight/I * H(scale * I)``;
    in the SNR domain it is ``weight/g * H(scale * g)``, with E[I]^r folded
    into the scale so that mu_r is the true average SNR.
    """
    if domain not in ("irradiance", "snr"):
        raise ValueError(f"domain must be 'irradiance' or 'snr', got {domain!r}")
    r = channel.r if domain == "snr" else 1
    terms = []
    for idx in itertools.product((0, 1), repeat=channel.N):
        weight = 1.0
        log_scale = 0.0
        lower = []
        for i, layer in zip(idx, channel.layers):
            if i == 0:
                weight *= layer.omega
                log_scale -= math.log(layer.lam)
                lower.append((1.0, float(r)))
            else:
                weight *= (1.0 - layer.omega) / math.gamma(layer.a)
                log_scale -= math.log(layer.b)
                lower.append((layer.a, r / layer.c))
        if domain == "snr":
            log_scale = r * (log_scale + math.log(mean_irradiance(channel))) - math.log(channel.mu_r)
        terms.append(MixtureTerm(idx, weight, math.exp(log_scale), HParams(channel.N, 0, (), lower)))
    return terms


def _active(terms: Iterable[MixtureTerm]) -> list[MixtureTerm]:
    return [t for t in terms if t.weight != 0.0]


def _pdf(terms: Sequence[MixtureTerm], x: float, rtol: float) -> float:
    if not x > 0:
        raise ValueError(f"density argument must be > 0, got {x}")
    total = 0.0
    for t in terms:
        total += t.weight * _h_pdf_kernel(t.params, t.scale * x, rtol)
    return max(total / x, 0.0)


def _cdf_params(params: HParams) -> HParams:
    return HParams(params.m, 1, [(1.0, 1.0)], list(params.lower) + [(0.0, 1.0)])


def _cdf(terms: Sequence[MixtureTerm], x: float, rtol: float) -> float:
    if not x > 0:
        raise ValueError(f"CDF argument must be > 0, got {x}")
    total = 0.0
    for t in terms:
        z = t.scale * x
        if z > fox_h.MAX_Z:
            total += t.mass
        elif z > 0.0:
            total += t.weight * fox_h.evaluate(_cdf_params(t.params), z, rtol=rtol).value
    return min(max(total, 0.0), 1.0)


def _vectorize(fn, x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return fn(float(arr))
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


def cascade_irradiance_pdf(channel: CascadeChannel, I, rtol: float = PDF_RTOL):
    terms = _active(enumerate_terms(channel, "irradiance"))
    return _vectorize(lambda v: _pdf(terms, v, rtol), I)


def cascade_irradiance_cdf(channel: CascadeChannel, I, rtol: float = PDF_RTOL):
    terms = _active(enumerate_terms(channel, "irradiance"))
    return _vectorize(lambda v: _cdf(terms, v, rtol), I)


def cascade_snr_pdf(channel: CascadeChannel, gamma, rtol: float = PDF_RTOL):
    terms = _active(enumerate_terms(channel, "snr"))
    return _vectorize(lambda v: _pdf(terms, v, rtol), gamma)


def cascade_snr_cdf(channel: CascadeChannel, gamma, rtol: float = PDF_RTOL):
    """P(gamma_N <= gamma): each H^{N,0}_{0,N} term integrates to H^{N,1}_{1,N+1}
    with the extra pairs (1, 1) upper and (0, 1) lower."""
    terms = _active(enumerate_terms(channel, "snr"))
    return _vectorize(lambda v: _cdf(terms, v, rtol), gamma)
