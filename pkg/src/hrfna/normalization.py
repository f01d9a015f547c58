"""Dynamic-range normalization: threshold detection and power-of-two down-scaling.

normalize reconstructs the signed mantissa, divides it by 2^k with round
half to even, re-encodes, and raises the exponent by k, so the value moves
by at most 2^(f+k-1). Detection has a fast mode driven by the magnitude
estimator and an exact mode driven by reconstruction; fast mode is
one-sided safe (it never misses a true crossing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from hrfna.errors import HrfnaError
from hrfna.hybrid import HybridConfig, HybridNum, make_hybrid, signed_value, tau_int
from hrfna.rns import ModulusSet


class DegenerateResult(HrfnaError):
    """Scaling wiped out a nonzero mantissa (shift too large for the value)."""


@dataclass(frozen=True)
class NormalizationEvent:
    """One normalization: mantissa in/out, the shift, and the exponent move."""

    value_in: int
    value_out: int
    shift: int
    exponent_before: int
    exponent_after: int


def shift_round_half_even(n: int, s: int) -> int:
    """round(n / 2^s) with ties to even, exact for any sign of n."""
    if s == 0:
        return n
    q = n >> s
    r = n - (q << s)  # 0 <= r < 2^s for either sign of n
    half = 1 << (s - 1)
    if r > half or (r == half and (q & 1)):
        q += 1
    return q


def needs_normalization(
    h: HybridNum, ms: ModulusSet, cfg: HybridConfig, exact: bool = False
) -> bool:
    """Whether the mantissa magnitude has reached the threshold tau.

    Fast mode fires when mag_log2 >= log2(tau) - 1.0, conservative by the
    estimator error bound; exact mode reconstructs and tests |N| >= tau.
    """
    tau = tau_int(ms, cfg)
    if exact:
        return abs(signed_value(h.mantissa, ms)) >= tau
    return h.mag_log2 >= math.log2(tau) - 1.0


def normalize(h: HybridNum, ms: ModulusSet, cfg: HybridConfig) -> HybridNum:
    """Scale the mantissa down by 2^k and bump the exponent by k.

    Callable below threshold as well; callers normally gate through
    needs_normalization. The result carries its NormalizationEvent and a
    mag_log2 recomputed exactly from the scaled mantissa.
    """
    k = cfg.scale_shift_k
    n = signed_value(h.mantissa, ms)
    n_out = shift_round_half_even(n, k)
    if n_out == 0 and n != 0:
        raise DegenerateResult(f"mantissa {n} vanished under shift {k}")
    event = NormalizationEvent(n, n_out, k, h.exponent, h.exponent + k)
    out = make_hybrid(n_out, h.exponent + k, ms)
    return replace(out, align_strategy=h.align_strategy, norm_events=(event,))
