"""Fox H-function evaluation by Mellin-Barnes quadrature on a vertical line.

Convention::

    H^{m,n}_{p,q}[z | (a_i, alpha_i); (b_j, beta_j)]
        = 1/(2 pi i) * Int_L  Theta(s) z^{-s} ds

    Theta(s) = prod_{j<m} G(b_j + beta_j s) prod_{i<n} G(1 - a_i - alpha_i s)
               / ( prod_{i>=n} G(a_i + alpha_i s) prod_{j>=m} G(1 - b_j - beta_j s) )

so that ``H^{1,0}_{0,1}[z | -; (0, 1)] = exp(-z)``.  The contour separates the
left poles ``(-b_j - l)/beta_j`` from the right poles ``(1 - a_i + k)/alpha_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln, polygamma, zeta

from .special_fn import EULER_GAMMA, _log_gamma_array

__all__ = [
    "HParams",
    "ContourSpec",
    "HValue",
    "ResidueTerm",
    "FoxHError",
    "PoleCollisionError",
    "HConvergenceError",
    "HOverflowError",
    "ResidueOrderError",
    "validate",
    "evaluate",
    "leading_residues",
    "residue_sum",
]

POLE_CHECK_DEPTH = 64
COLLISION_TOL = 1e-10
TIE_TOL = 1e-9
DEFAULT_RTOL = 1e-8
MAX_Z = 1e6
MAX_NODES = 4_000_000


class FoxHError(ArithmeticError):
    pass


class PoleCollisionError(FoxHError):
    def __init__(self, left, right, location):
        self.left = left  # (j, l)
        self.right = right  # (i, k)
        self.location = location
        super().__init__(
            f"left pole (j={left[0]}, l={left[1]}) collides with right pole "
            f"(i={right[0]}, k={right[1]}) at s={location:.12g}"
        )


class HConvergenceError(FoxHError):
    pass


class HOverflowError(FoxHError):
    pass


class ResidueOrderError(FoxHError):
    pass


def _pairs(seq) -> tuple[tuple[float, float], ...]:
    return tuple((float(x), float(y)) for x, y in seq)


@dataclass(frozen=True)
class HParams:
    """Orders and coefficient pairs of one H-function instance.

    ``upper`` holds the (a_i, alpha_i) pairs (length p), ``lower`` the
    (b_j, beta_j) pairs (length q).
    """

    m: int
    n: int
    upper: tuple = ()
    lower: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "upper", _pairs(self.upper))
        object.__setattr__(self, "lower", _pairs(self.lower))
        if not (0 <= self.m <= self.q):
            raise ValueError(f"need 0 <= m <= q, got m={self.m}, q={self.q}")
        if not (0 <= self.n <= self.p):
            raise ValueError(f"need 0 <= n <= p, got n={self.n}, p={self.p}")
        for name, pairs in (("upper", self.upper), ("lower", self.lower)):
            for coef, scale in pairs:
                if not (math.isfinite(coef) and math.isfinite(scale)):
                    raise ValueError(f"non-finite {name} pair ({coef}, {scale})")
                if scale <= 0:
                    raise ValueError(f"{name} scale factors must be > 0, got {scale}")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @property
    def max_left_pole(self) -> float:
        if self.m == 0:
            return -math.inf
        return max(-b / beta for b, beta in self.lower[: self.m])

    @property
    def min_right_pole(self) -> float:
        if self.n == 0:
            return math.inf
        return min((1.0 - a) / alpha for a, alpha in self.upper[: self.n])

    @property
    def decay_rate(self) -> float:
        """a* such that |Theta(c + it)| ~ exp(-pi a* |t| / 2) for large |t|."""
        num = sum(beta for _, beta in self.lower[: self.m]) + sum(al for _, al in self.upper[: self.n])
        den = sum(beta for _, beta in self.lower[self.m:]) + sum(al for _, al in self.upper[self.n:])
        return num - den


@dataclass(frozen=True)
class ContourSpec:
    """Integration path.  ``c=None`` picks the abscissa automatically."""

    kind: str = "vertical-line"
    c: float | None = None
    T: float = 8.0
    rtol: float = DEFAULT_RTOL

    def __post_init__(self):
        if self.kind != "vertical-line":
            raise ValueError(f"unsupported contour kind {self.kind!r}")
        if not self.T > 0:
            raise ValueError("contour half-height T must be > 0")
        if not (0 < self.rtol <= 1e-3):
            raise ValueError("contour tolerance must lie in (0, 1e-3]")


class HValue(NamedTuple):
    value: float
    error: float
    abscissa: float
    nodes: int

    @property
    def rel_error(self) -> float:
        return self.error / abs(self.value) if self.value else math.inf


class ResidueTerm(NamedTuple):
    exponent: float
    log_power: int
    coefficient: float


def validate(params: HParams) -> HParams:
    """Return ``params`` if the left and right pole sets are disjoint."""
    left = [
        ((j, l), (-b - l) / beta)
        for j, (b, beta) in enumerate(params.lower[: params.m])
        for l in range(POLE_CHECK_DEPTH + 1)
    ]
    right = [
        ((i, k), (1.0 - a + k) / alpha)
        for i, (a, alpha) in enumerate(params.upper[: params.n])
        for k in range(POLE_CHECK_DEPTH + 1)
    ]
    for lkey, lval in left:
        for rkey, rval in right:
            if abs(lval - rval) <= COLLISION_TOL * max(1.0, abs(lval)):
                raise PoleCollisionError(lkey, rkey, lval)
    return params


def _log_theta(params: HParams, s):
    """log Theta(s) on a complex array (branch irrelevant: only exp is used)."""
    out = np.zeros_like(s, dtype=complex)
    m, n = params.m, params.n
    for j, (b, beta) in enumerate(params.lower):
        if j < m:
            out += _log_gamma_array(b + beta * s)
        else:
            out -= _log_gamma_array(1.0 - b - beta * s)
    for i, (a, alpha) in enumerate(params.upper):
        if i < n:
            out += _log_gamma_array(1.0 - a - alpha * s)
        else:
            out -= _log_gamma_array(a + alpha * s)
    return out


def _log_abs_real(params: HParams, sigma, logz):
    """log|Theta(sigma) z^{-sigma}| for real sigma (log|Gamma| via gammaln)."""
    s = np.atleast_1d(np.asarray(sigma, dtype=float))
    out = -s * logz
    m, n = params.m, params.n
    with np.errstate(all="ignore"):
        for j, (b, beta) in enumerate(params.lower):
            out = out + gammaln(b + beta * s) if j < m else out - gammaln(1.0 - b - beta * s)
        for i, (a, alpha) in enumerate(params.upper):
            out = out + gammaln(1.0 - a - alpha * s) if i < n else out - gammaln(a + alpha * s)
    return np.where(np.isnan(out), np.inf, out)


def _saddle_abscissa(params: HParams, logz: float) -> float:
    """Abscissa minimising |Theta(sigma) z^{-sigma}| inside the pole gap.

    On this line the integrand peaks at t = 0 and the integral suffers the
    least cancellation, which keeps small-z evaluations accurate.
    """
    lo, hi = params.max_left_pole, params.min_right_pole
    if math.isinf(lo) and math.isinf(hi):
        raise FoxHError("H-function with m = n = 0 has no admissible contour")
    if math.isinf(lo):
        lo = hi - 1e4
    if math.isinf(hi):
        hi = lo + 1e4
    width = hi - lo
    if width <= 0:
        raise FoxHError(
            f"no vertical contour separates the poles (max left {lo:g} >= min right {hi:g})"
        )
    # coarse scan over geometric offsets from both ends, then bracket refinement
    offs = width * np.logspace(-9, 0, 91)
    cand = np.unique(np.concatenate([lo + offs, hi - offs, [lo + 0.5 * width]]))
    cand = cand[(cand > lo) & (cand < hi)]
    for _ in range(4):
        vals = _log_abs_real(params, cand, logz)
        k = int(np.argmin(vals))
        a = cand[max(k - 1, 0)]
        b = cand[min(k + 1, cand.size - 1)]
        cand = np.linspace(a, b, 41)[1:-1] if b > a else np.array([a])
    sigma = float(cand[int(np.argmin(_log_abs_real(params, cand, logz)))])
    # stay clear of the poles by a small relative margin
    margin = 1e-6 * width
    return float(min(max(sigma, lo + margin), hi - margin))


def _integrand(params: HParams, sigma: float, logz: float, t):
    s = sigma + 1j * t
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        return np.exp(_log_theta(params, s) - s * logz)


def evaluate(
    params: HParams,
    z: float,
    contour: ContourSpec | None = None,
    *,
    rtol: float | None = None,
    atol: float = 0.0,
) -> HValue:
    """Evaluate H^{m,n}_{p,q}[z] for real z > 0.

    Trapezoidal quadrature along ``s = c + i t``, exploiting conjugate
    symmetry so only t >= 0 is sampled.  The step is halved until two
    successive sums agree, and the line is lengthened until the integrand
    tail falls below tolerance.  The returned ``error`` is the larger of the
    last step-halving difference, the tail bound and a round-off bound.
    """
    if contour is None:
        contour = ContourSpec()
    if rtol is None:
        rtol = contour.rtol
    z = float(z)
    if not math.isfinite(z) or z <= 0:
        raise ValueError(f"H-function argument must be finite and > 0, got {z}")
    if z > MAX_Z:
        raise HOverflowError(f"argument z={z:g} exceeds supported range (<= {MAX_Z:g})")
    validate(params)
    astar = params.decay_rate
    if astar <= 0:
        raise HConvergenceError(
            f"Mellin-Barnes integral is not absolutely convergent on a vertical line (a*={astar:g})"
        )

    logz = math.log(z)
    lo, hi = params.max_left_pole, params.min_right_pole
    if contour.c is None:
        sigma = _saddle_abscissa(params, logz)
    else:
        sigma = float(contour.c)
        if not (lo < sigma < hi):
            raise FoxHError(f"abscissa {sigma:g} does not separate the poles ({lo:g}, {hi:g})")
    dist = min(sigma - lo, hi - sigma)

    decay = 0.5 * math.pi * astar
    h = min(0.5 * dist, 1.0, math.pi / (2.0 + abs(logz)))
    T = max(contour.T, 4.0 / decay)

    def trap(step, top):
        k = np.arange(0, int(math.ceil(top / step)) + 1)
        f = _integrand(params, sigma, logz, k * step).real
        f[0] *= 0.5
        return f

    def bad(err, ref):
        return err > max(rtol * abs(ref), atol)

    # grow the line until the tail is negligible relative to the running sum
    for _ in range(40):
        f = trap(h, T)
        total = h * math.fsum(f) / math.pi
        tail = abs(_integrand(params, sigma, logz, np.array([T]))[0]) / (decay * math.pi)
        if not np.isfinite(total):
            raise HConvergenceError("integrand overflowed on the contour")
        if not bad(10.0 * tail, total) or T > 1e5:
            break
        T *= 2.0
    else:  # pragma: no cover - loop always breaks
        pass

    # halve the step until the trapezoid sums agree
    prev = total
    err = math.inf
    nodes = f.size
    while True:
        if 2 * nodes > MAX_NODES:
            raise HConvergenceError(
                f"step refinement exhausted at {nodes} nodes (last change {err:.3g}, value {prev:.6g})"
            )
        h *= 0.5
        k = np.arange(1, 2 * f.size - 1, 2)
        fo = _integrand(params, sigma, logz, k * h).real
        f_all = np.empty(2 * f.size - 1)
        f_all[0::2] = f
        f_all[1::2] = fo
        f = f_all
        nodes = f.size
        cur = h * math.fsum(f) / math.pi
        err = abs(cur - prev)
        prev = cur
        if not bad(err, cur):
            break

    tail = abs(_integrand(params, sigma, logz, np.array([T]))[0]) / (decay * math.pi)
    roundoff = 1e-15 * h * float(np.sum(np.abs(f))) / math.pi * 10.0
    error = max(err, 10.0 * tail, roundoff)
    if bad(error, cur):
        raise HConvergenceError(
            f"H-function quadrature did not reach tolerance: value {cur:.6g}, error {error:.3g}"
        )
    return HValue(float(cur), float(error), sigma, nodes)


# -- small-argument residue expansion -----------------------------------


MAX_POLE_ORDER = 8


def _factor_series(x0: float, kappa: float, K: int):
    """Gamma(x0 + kappa eps) = eps^k * C * exp(sum_j S[j] eps^j), j = 1..K-1.

    Returns (k, C, S) with k = -1 at a pole of Gamma, 0 otherwise.
    """
    S = np.zeros(K)
    l = round(-x0)
    if l >= 0 and abs(x0 + l) <= TIE_TOL * max(1.0, abs(x0)):
        # Gamma(u - l) = (-1)^l Gamma(1 + u) / (l! u prod_i (1 - u/i)),  u = kappa eps
        for j in range(1, K):
            c = -EULER_GAMMA if j == 1 else (-1.0) ** j * zeta(j) / j
            c += sum(i ** -float(j) for i in range(1, l + 1)) / j
            S[j] = c * kappa ** j
        return -1, (-1.0) ** l / (math.factorial(l) * kappa), S
    for j in range(1, K):
        S[j] = polygamma(j - 1, x0) * kappa ** j / math.factorial(j)
    return 0, math.gamma(x0), S


def _exp_series(S):
    """Coefficients of exp(sum_j S[j] eps^j) up to the length of S."""
    e = np.zeros(len(S))
    e[0] = 1.0
    for n in range(1, len(S)):
        e[n] = sum(k * S[k] * e[n - k] for k in range(1, n + 1)) / n
    return e


def _laurent_at(params: HParams, s0: float, K: int):
    """Theta(s0 + eps) = eps^order * C * exp(S(eps)); S truncated at eps^(K-1)."""
    order, coef, S = 0, 1.0, np.zeros(K)
    m, n = params.m, params.n
    factors = []
    for j, (b, beta) in enumerate(params.lower):
        if j < m:
            factors.append((b + beta * s0, beta, +1))
        else:
            factors.append((1.0 - b - beta * s0, -beta, -1))
    for i, (a, alpha) in enumerate(params.upper):
        if i < n:
            factors.append((1.0 - a - alpha * s0, -alpha, +1))
        else:
            factors.append((a + alpha * s0, alpha, -1))
    for x0, kappa, sign in factors:
        k, c, s = _factor_series(x0, kappa, K)
        order += sign * k
        coef = coef * c if sign > 0 else coef / c
        S += sign * s
    return order, coef, S


def _pole_order(params: HParams, s0: float) -> int:
    return -_laurent_at(params, s0, 1)[0]


def leading_residues(params: HParams, count: int) -> list[ResidueTerm]:
    """First ``count`` terms of the small-z expansion of H(z).

    Each term is ``coefficient * z**exponent * log(z)**log_power``; terms come
    from the left poles in order of increasing exponent.  A pole of order K
    contributes K terms sharing one exponent, with log powers K-1 down to 0.
    """
    validate(params)
    if params.m == 0:
        return []
    depth = count + 2
    poles = sorted(
        {(-b - l) / beta for b, beta in params.lower[: params.m] for l in range(depth)},
        reverse=True,
    )
    # exponents past this bound may be missing poles from slower pairs
    horizon = min((b + depth - 1) / beta for b, beta in params.lower[: params.m])
    groups: list[float] = []
    for s in poles:
        if groups and abs(s - groups[-1]) <= TIE_TOL * max(1.0, abs(s)):
            continue
        groups.append(s)

    terms: list[ResidueTerm] = []
    for s0 in groups:
        if -s0 > horizon + TIE_TOL:
            break
        K = _pole_order(params, s0)
        if K <= 0:
            continue
        if K > MAX_POLE_ORDER:
            raise ResidueOrderError(f"pole of order {K} at s={s0:g} exceeds {MAX_POLE_ORDER}")
        _, coef, S = _laurent_at(params, s0, K)
        e = _exp_series(S)
        # residue of eps^-K C exp(S) z^{-s0} exp(-eps log z): coefficient of eps^(K-1)
        for i in range(K - 1, -1, -1):
            terms.append(ResidueTerm(-s0, i, coef * e[K - 1 - i] * (-1.0) ** i / math.factorial(i)))
        if len(terms) >= count:
            break
    return terms[:count]


def residue_sum(terms: Sequence[ResidueTerm], z: float) -> float:
    logz = math.log(z)
    total = 0.0
    for t in terms:
        total += t.coefficient * z ** t.exponent * logz ** t.log_power
    return total
