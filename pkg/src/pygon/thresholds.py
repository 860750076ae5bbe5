"""First-moment detection thresholds for the five planted patterns.

For each pattern the expected number of copies in a pattern-free G(n, p) is
evaluated exactly in log space (log-gamma throughout, no Stirling shortcuts);
the detectability baseline is the smallest k at which that expectation drops
to 1 or below. The asymptotic closed forms are also provided, with their
additive constant set to zero; the exact scan is the authoritative value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln

from .planting import SubgraphKind

__all__ = ["ThresholdQuery", "log_expected_count", "threshold_scan", "closed_form_threshold"]


@dataclass(frozen=True)
class ThresholdQuery:
    """Pattern, host size and edge probability for a threshold computation."""

    kind: SubgraphKind
    n: int
    p: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly in (0, 1)")
        if self.kind.variant == "dense" and not self.p < self.kind.q <= 1.0:
            raise ValueError(f"dense threshold needs p < q <= 1 (p={self.p}, q={self.kind.q})")


def _log_binom(n: float, k: float) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_expected_count(query: ThresholdQuery, k: int) -> float:
    """Natural log of the expected number of size-k copies of the pattern.

    Counting copies in G(n, p):
      clique    C(n,k) * p^C(k,2)
      dac       C(n,k) * k! * (p(1-p))^C(k,2)          (one edge per pair, oriented)
      twoplex   C(n,k) * k!/(2^h h!) * p^(C(k,2)-h) * (1-p)^h,  h = floor(k/2)
                (clique minus a matching; the prefactor counts the pairings)
      biclique  C(n,a) * C(n-a,b) * p^(ab) * (1-p)^(C(k,2)-ab),  a = ceil(k/2), b = floor(k/2)
      dense     C(n,k) * C(C(k,2), m) * p^m,  m = ceil(C(k,2) * q)
                (choices of m edges that must be present; other pairs free)
    """
    n, p = query.n, query.p
    if not 2 <= k <= n:
        raise ValueError(f"k={k} outside [2, n={n}]")
    pairs = k * (k - 1) // 2
    variant = query.kind.variant
    if variant == "clique":
        return _log_binom(n, k) + pairs * math.log(p)
    if variant == "dac":
        return _log_binom(n, k) + float(gammaln(k + 1)) + pairs * math.log(p * (1 - p))
    if variant == "twoplex":
        h = k // 2
        pairings = float(gammaln(k + 1)) - h * math.log(2) - float(gammaln(h + 1))
        return _log_binom(n, k) + pairings + (pairs - h) * math.log(p) + h * math.log(1 - p)
    if variant == "biclique":
        a, b = (k + 1) // 2, k // 2
        return (
            _log_binom(n, a)
            + _log_binom(n - a, b)
            + a * b * math.log(p)
            + (pairs - a * b) * math.log(1 - p)
        )
    m = math.ceil(pairs * query.kind.q)
    return _log_binom(n, k) + _log_binom(pairs, m) + m * math.log(p)


def threshold_scan(query: ThresholdQuery) -> int:
    """Smallest k >= 2 whose expected pattern count is at most 1."""
    for k in range(2, query.n + 1):
        if log_expected_count(query, k) <= 0.0:
            return k
    raise ValueError(f"no threshold of size <= n={query.n} found")


def closed_form_threshold(query: ThresholdQuery) -> float:
    """Asymptotic threshold size with the additive constant dropped.

    clique    2 log_{1/p} n - 2 log_{1/p} log_{1/p} n
    dac       2 log_{1/(p(1-p))} n
    twoplex   2 log_{1/p} n - log_{1/p} log_{1/p} n
    biclique  4 log_b n - 4 log_b log_b n,   b = 1/(p(1-p))
    dense     (2/q) log_{q/p} n - (2/q) log_{q/p} log_{q/p} n
    """
    n, p = query.n, query.p

    def log_base(base: float, x: float) -> float:
        return math.log(x) / math.log(base)

    variant = query.kind.variant
    if variant == "clique":
        b = 1 / p
        return 2 * log_base(b, n) - 2 * log_base(b, log_base(b, n))
    if variant == "dac":
        return 2 * log_base(1 / (p * (1 - p)), n)
    if variant == "twoplex":
        b = 1 / p
        return 2 * log_base(b, n) - log_base(b, log_base(b, n))
    if variant == "biclique":
        b = 1 / (p * (1 - p))
        return 4 * log_base(b, n) - 4 * log_base(b, log_base(b, n))
    b = query.kind.q / p
    return (2 / query.kind.q) * (log_base(b, n) - log_base(b, log_base(b, n)))
