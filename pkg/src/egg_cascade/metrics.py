"""Average BER, ergodic capacity and outage of a cascaded EGG channel.

All exact metrics are sums over the 2^N mixture terms of one H-function each.
With X = term scale / q (BER) or term scale / tau (capacity):

    BER term      H^{N,2}_{2,N+1}[X | (1,1),(1-p,1); pairs..., (0,1)]
    capacity term r H^{N+2,1}_{2,N+2}[X | (0,1),(1,r); pairs..., (0,1),(0,r)]
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from . import fox_h
from .channel import CascadeChannel, MixtureTerm, cascade_snr_cdf, enumerate_terms, mean_irradiance
from .fox_h import HParams
from .special_fn import EULER_GAMMA, digamma

__all__ = [
    "Modulation",
    "SweepResult",
    "SweepPoint",
    "InapplicableRegimeWarning",
    "TAU",
    "METRIC_RTOL",
    "avg_ber_exact",
    "avg_ber_asymptotic",
    "avg_ber_asymptotic_residues",
    "ber_conditional",
    "diversity_order",
    "ergodic_capacity_exact",
    "ergodic_capacity_asymptotic",
    "outage_probability",
    "outage_probability_asymptotic",
]

TAU = math.e / (2.0 * math.pi)
METRIC_RTOL = 1e-9
ASYMPTOTIC_ARG_LIMIT = 1e-2


class InapplicableRegimeWarning(UserWarning):
    """High-SNR expansion requested where the H-function arguments are not small."""


@dataclass(frozen=True)
class Modulation:
    """Unified BER parameters: P_e(g) = delta / (2 Gamma(p)) * sum_k Gamma(p, q_k g)."""

    name: str
    delta: float
    p: float
    q_list: tuple
    detection: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "q_list", tuple(float(q) for q in self.q_list))
        if not self.q_list:
            raise ValueError(f"modulation {self.name!r}: q_list must be non-empty")
        for label, v in (("delta", self.delta), ("p", self.p)) + tuple(("q", q) for q in self.q_list):
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"modulation {self.name!r}: {label} must be finite and > 0, got {v}")
        if self.detection not in (None, 1, 2):
            raise ValueError(f"modulation {self.name!r}: detection must be 1, 2 or null")

    @classmethod
    def from_dict(cls, d: dict) -> "Modulation":
        det = d.get("detection")
        if isinstance(det, str):
            det = {"heterodyne": 1, "im/dd": 2, "imdd": 2, "im-dd": 2}.get(det.lower(), det)
        return cls(name=str(d["name"]), delta=float(d["delta"]), p=float(d["p"]),
                   q_list=tuple(d["q_list"]), detection=det)


@dataclass
class SweepPoint:
    mu_r_db: float
    exact: float | None = None
    asymptotic: float | None = None
    mc: float | None = None
    mc_stderr: float | None = None
    error: str = ""


@dataclass
class SweepResult:
    metric: str
    label: str = ""
    points: list = field(default_factory=list)

    @property
    def grid(self) -> list:
        return [p.mu_r_db for p in self.points]


def ber_conditional(modulation: Modulation, gamma):
    """Conditional BER kernel at instantaneous SNR ``gamma`` (vectorised)."""
    from scipy.special import gammaincc

    total = 0.0
    for q in modulation.q_list:
        total = total + gammaincc(modulation.p, q * gamma)
    return 0.5 * modulation.delta * total


def _ber_params(term: MixtureTerm, p: float) -> HParams:
    return HParams(
        term.params.m, 2, [(1.0, 1.0), (1.0 - p, 1.0)], list(term.params.lower) + [(0.0, 1.0)]
    )


def _capacity_params(term: MixtureTerm, r: int) -> HParams:
    return HParams(
        term.params.m + 2, 1, [(0.0, 1.0), (1.0, float(r))],
        list(term.params.lower) + [(0.0, 1.0), (0.0, float(r))],
    )


def _active_snr_terms(channel: CascadeChannel) -> list[MixtureTerm]:
    return [t for t in enumerate_terms(channel, "snr") if t.weight != 0.0]


def avg_ber_exact(channel: CascadeChannel, modulation: Modulation, rtol: float = METRIC_RTOL) -> float:
    total = 0.0
    for q in modulation.q_list:
        for term in _active_snr_terms(channel):
            h = fox_h.evaluate(_ber_params(term, modulation.p), term.scale / q, rtol=rtol)
            total += term.weight * h.value
    return modulation.delta / (2.0 * math.gamma(modulation.p)) * total


def ergodic_capacity_exact(channel: CascadeChannel, rtol: float = METRIC_RTOL) -> float:
    """E[ln(1 + tau * gamma)] in nats per channel use, tau = e / (2 pi)."""
    r = channel.r
    total = 0.0
    for term in _active_snr_terms(channel):
        h = fox_h.evaluate(_capacity_params(term, r), term.scale / TAU, rtol=rtol)
        total += term.weight * h.value
    return r * total


def outage_probability(channel: CascadeChannel, gamma_th: float, rtol: float = METRIC_RTOL) -> float:
    return float(cascade_snr_cdf(channel, gamma_th, rtol=rtol))


def diversity_order(channel: CascadeChannel) -> float:
    """min{1/r, a_n c_n / r} over the branches actually present.

    The two-layer result generalises term by term: any mixture term with an
    exponential factor decays like X^{1/r}, any generalized-gamma factor n
    like X^{a_n c_n / r}.
    """
    r = channel.r
    orders = []
    if any(layer.omega > 0 for layer in channel.layers):
        orders.append(1.0 / r)
    orders += [layer.a * layer.c / r for layer in channel.layers if layer.omega < 1]
    return min(orders)


def _check_regime(args: Sequence[float], what: str) -> None:
    worst = max(args)
    if worst >= ASYMPTOTIC_ARG_LIMIT:
        warnings.warn(
            f"{what}: H-function argument {worst:.3g} is not small; high-SNR expansion is unreliable",
            InapplicableRegimeWarning,
            stacklevel=3,
        )


def avg_ber_asymptotic(channel: CascadeChannel, modulation: Modulation) -> float:
    """Closed-form high-SNR BER of a two-layer cascade.

    Keeps, per mixture term, the residue of each pole family nearest the
    contour; the doubly-exponential term keeps only its log-leading part.
    """
    if channel.N != 2:
        raise ValueError("the closed-form asymptotic BER is derived for N = 2; use avg_ber_asymptotic_residues")
    L1, L2 = channel.layers
    r = channel.r
    p = modulation.p

    def g(x):
        try:
            return math.gamma(x)
        except ValueError:
            raise ValueError(
                f"coincident pole families (Gamma({x:g})): the two-layer closed form does not apply; "
                "use avg_ber_asymptotic_residues"
            ) from None

    w1, w2 = L1.omega, L2.omega
    a1, c1, a2, c2 = L1.a, L1.c, L2.a, L2.c
    ebar = mean_irradiance(channel) ** r
    mu = channel.mu_r

    total = 0.0
    args = []
    for q in modulation.q_list:
        base = ebar / (q * mu)
        x_ee = base * (L1.lam * L2.lam) ** (-r)
        x_gg = base * (L1.b * L2.b) ** (-r)
        x_eg = base * (L1.lam * L2.b) ** (-r)  # layer 1 exponential, layer 2 GG
        x_ge = base * (L1.b * L2.lam) ** (-r)
        acc = 0.0
        if w1 > 0 and w2 > 0:
            acc += -w1 * w2 / r * g(p + 1.0 / r) * math.log(x_ee) * x_ee ** (1.0 / r)
            args.append(x_ee)
        if w1 < 1 and w2 < 1:
            acc += (1 - w1) * (1 - w2) * (
                g(p + a1 * c1 / r) * g(a2 - a1 * c1 / c2) / (g(a1 + 1) * g(a2)) * x_gg ** (a1 * c1 / r)
                + g(p + a2 * c2 / r) * g(a1 - a2 * c2 / c1) / (g(a1) * g(a2 + 1)) * x_gg ** (a2 * c2 / r)
            )
            args.append(x_gg)
        if w1 > 0 and w2 < 1:
            acc += w1 * (1 - w2) / g(a2) * (
                g(p + 1.0 / r) * g(a2 - 1.0 / c2) * x_eg ** (1.0 / r)
                - g(-a2 * c2) * g(p + a2 * c2 / r) * c2 * x_eg ** (a2 * c2 / r)
            )
            args.append(x_eg)
        if w2 > 0 and w1 < 1:
            acc += w2 * (1 - w1) / g(a1) * (
                g(p + 1.0 / r) * g(a1 - 1.0 / c1) * x_ge ** (1.0 / r)
                - g(-a1 * c1) * g(p + a1 * c1 / r) * c1 * x_ge ** (a1 * c1 / r)
            )
            args.append(x_ge)
        total += acc
    _check_regime(args, "avg_ber_asymptotic")
    return modulation.delta / (2.0 * g(p)) * total


def avg_ber_asymptotic_residues(channel: CascadeChannel, modulation: Modulation, count: int = 2) -> float:
    """High-SNR BER for any N from the leading residues of every term."""
    total = 0.0
    args = []
    for q in modulation.q_list:
        for term in _active_snr_terms(channel):
            params = _ber_params(term, modulation.p)
            x = term.scale / q
            args.append(x)
            total += term.weight * fox_h.residue_sum(fox_h.leading_residues(params, count), x)
    _check_regime(args, "avg_ber_asymptotic_residues")
    return modulation.delta / (2.0 * math.gamma(modulation.p)) * total


def ergodic_capacity_asymptotic(channel: CascadeChannel) -> float:
    """ln(tau mu_r) + r * sum_n E[ln I_n] - r ln E[I]  (nats)."""
    r = channel.r
    acc = 0.0
    for layer in channel.layers:
        acc += layer.omega * (math.log(layer.lam) - EULER_GAMMA)
        acc += (1.0 - layer.omega) * (math.log(layer.b) + digamma(layer.a) / layer.c)
    return math.log(TAU * channel.mu_r) + r * acc - r * math.log(mean_irradiance(channel))


def outage_probability_asymptotic(channel: CascadeChannel, gamma_th: float, count: int = 2) -> float:
    """Leading small-argument residues of the SNR CDF terms."""
    from .channel import _cdf_params

    total = 0.0
    args = []
    for term in _active_snr_terms(channel):
        x = term.scale * gamma_th
        args.append(x)
        total += term.weight * fox_h.residue_sum(fox_h.leading_residues(_cdf_params(term.params), count), x)
    _check_regime(args, "outage_probability_asymptotic")
    return total
