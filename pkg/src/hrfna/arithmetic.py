"""Hybrid multiplication and addition.

Multiplication is the fast path: channel-wise residue products plus one
exponent addition, with normalization applied only when the result's
magnitude reaches the threshold. Addition aligns exponents either by
scaling the larger-exponent operand's mantissa up (exact, preferred) or by
reconstruct-shift-re-encode of the smaller-exponent operand (lossy
fallback); the chosen strategy is recorded on the result.

Operational envelope: a product is exact only while it stays inside the
signed range (|N_x * N_y| < M/2). Keeping at least one freshly encoded
operand (|N| < 2^b) per multiplication guarantees that; debug mode audits
it by reconstruction.
"""

from __future__ import annotations

import math
from dataclasses import replace

from hrfna import rns
from hrfna.hybrid import HybridConfig, HybridNum, signed_value, tau_int
from hrfna.normalization import needs_normalization, normalize, shift_round_half_even
from hrfna.rns import ModulusSet

# align_strategy values recorded on addition results
ALIGN_SCALE_UP = "scale-up"  # exact: larger-exponent mantissa scaled by 2^delta
ALIGN_SHIFT_DOWN = "shift-down"  # lossy: smaller-exponent operand shifted down
ALIGN_IDENTITY = "identity"  # one operand was zero


def _drain(h: HybridNum, ms: ModulusSet, cfg: HybridConfig) -> HybridNum:
    """Apply normalize until the fast detector clears, accumulating events."""
    events = list(h.norm_events)
    while needs_normalization(h, ms, cfg):
        h = normalize(h, ms, cfg)
        events.extend(h.norm_events)
    return replace(h, norm_events=tuple(events))


def hrfna_mul(
    x: HybridNum, y: HybridNum, ms: ModulusSet, cfg: HybridConfig, debug: bool = False
) -> HybridNum:
    """Hybrid product: residues multiply per channel, exponents add.

    The magnitude estimate updates additively; if it reaches the threshold
    the result is normalized before returning (each pass adds k to the
    exponent). With debug=True the product is audited by reconstruction:
    a wrap modulo M or a missed threshold crossing raises AssertionError.
    """
    mant = rns.mod_mul(x.mantissa, y.mantissa, ms)
    h = HybridNum(
        mant,
        x.exponent + y.exponent,
        x.mag_log2 + y.mag_log2,
        x.sign * y.sign,
    )
    if debug:
        prod = signed_value(x.mantissa, ms) * signed_value(y.mantissa, ms)
        if 2 * abs(prod) >= ms.composite:
            raise AssertionError(
                f"product {prod} wrapped modulo M={ms.composite}; operand bounds misconfigured"
            )
        if signed_value(mant, ms) != prod:
            raise AssertionError("residue product disagrees with reconstruction")
        if abs(prod) >= tau_int(ms, cfg) and not needs_normalization(h, ms, cfg):
            raise AssertionError("magnitude estimator missed a threshold crossing")
    return _drain(h, ms, cfg)


def _aligned_sum(
    hi: HybridNum, lo: HybridNum, ms: ModulusSet, cfg: HybridConfig
) -> tuple[rns.ResidueVector, int, str]:
    """Align hi (larger exponent) to lo and add mantissas.

    Returns (mantissa, exponent, strategy). Scale-up is used when the
    scaled magnitude estimate stays below tau/2, otherwise the
    smaller-exponent operand is reconstructed, shifted down with round
    half to even, and re-encoded at the larger exponent.
    """
    delta = hi.exponent - lo.exponent
    if delta == 0:
        return rns.mod_add(hi.mantissa, lo.mantissa, ms), hi.exponent, ALIGN_SCALE_UP

    if hi.mag_log2 + delta < math.log2(tau_int(ms, cfg)) - 1.0:
        scaled = rns.mod_mul(hi.mantissa, rns.encode_residues(1 << delta, ms), ms)
        return rns.mod_add(scaled, lo.mantissa, ms), lo.exponent, ALIGN_SCALE_UP

    n_lo = signed_value(lo.mantissa, ms)
    shifted = rns.encode_signed(shift_round_half_even(n_lo, delta), ms)
    return rns.mod_add(hi.mantissa, shifted, ms), hi.exponent, ALIGN_SHIFT_DOWN


def hrfna_add(
    x: HybridNum, y: HybridNum, ms: ModulusSet, cfg: HybridConfig, debug: bool = False
) -> HybridNum:
    """Hybrid sum with exponent alignment.

    Strategy selection depends only on which operand holds the larger
    exponent, so it is symmetric in (x, y) and the aligned mantissa
    addition is channel-wise commutative. The magnitude estimate and sign
    are recomputed exactly from the sum (a log-sum estimate cannot survive
    cancellation), and the result is normalized if it reaches threshold.
    """
    if x.is_zero:
        return replace(y, align_strategy=ALIGN_IDENTITY, norm_events=())
    if y.is_zero:
        return replace(x, align_strategy=ALIGN_IDENTITY, norm_events=())

    hi, lo = (x, y) if x.exponent >= y.exponent else (y, x)
    mant, exponent, strategy = _aligned_sum(hi, lo, ms, cfg)

    n = signed_value(mant, ms)
    mag = math.log2(abs(n)) if n else float("-inf")
    out = HybridNum(mant, exponent, mag, (n > 0) - (n < 0), align_strategy=strategy)
    if debug and abs(n) >= tau_int(ms, cfg) and not needs_normalization(out, ms, cfg):
        raise AssertionError("magnitude estimator missed a threshold crossing")
    return _drain(out, ms, cfg)
