"""Hybrid numbers: a residue-encoded integer mantissa paired with a power-of-two exponent.

A HybridNum denotes N * 2^f where N lives in the residue domain under the
symmetric signed convention (reconstructions >= M/2 denote n - M). Alongside
the contractual fields it carries an O(1) magnitude estimate (log2 |N|) and
the sign, so threshold detection and most comparisons avoid reconstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from hrfna import rns
from hrfna.rns import ModulusSet, ResidueVector

LESS, EQUAL, GREATER = -1, 0, 1


@dataclass(frozen=True)
class HybridConfig:
    """Arithmetic-policy constants.

    alpha:      safety factor in (0, 1); the normalization threshold is
                tau = floor(alpha * M).
    scale_shift_k:      bits removed per normalization (scale factor 2^k).
    operand_bound_bits: b; freshly encoded operands satisfy |N| < 2^b so a
                product of two of them stays below tau and never wraps mod M.

    The interplay with a concrete modulus set (2^(2b) < alpha*M) is checked
    by validate_config, since it needs M.
    """

    alpha: Fraction
    scale_shift_k: int
    operand_bound_bits: int

    def __post_init__(self):
        if not (0 < self.alpha < 1):
            raise ValueError(f"alpha {self.alpha} not in (0, 1)")
        if self.scale_shift_k < 1:
            raise ValueError("scale_shift_k must be >= 1")
        if self.operand_bound_bits < 3:
            raise ValueError("operand_bound_bits must be >= 3")


DEFAULT_CONFIG = HybridConfig(
    alpha=Fraction(3, 8192), scale_shift_k=11, operand_bound_bits=12
)


def tau_int(ms: ModulusSet, cfg: HybridConfig) -> int:
    """Integer normalization threshold floor(alpha * M), computed once per use site."""
    return (cfg.alpha.numerator * ms.composite) // cfg.alpha.denominator


def validate_config(ms: ModulusSet, cfg: HybridConfig) -> None:
    """Check the cross invariants between a modulus set and a hybrid config.

    Raises ValueError naming the failed invariant:
      operand-bound: 2^(2b) < alpha*M so in-bound operands multiply without wrap
      shift-bound:   k < b so normalization keeps a nonzero mantissa above threshold
    """
    b = cfg.operand_bound_bits
    if 2 ** (2 * b) >= cfg.alpha * ms.composite:
        raise ValueError("operand-bound")
    if cfg.scale_shift_k >= b:
        raise ValueError("shift-bound")


@dataclass(frozen=True, eq=False)
class HybridNum:
    """Immutable hybrid value: mantissa residues, exponent, and estimator channels.

    align_strategy and norm_events describe only the operation that produced
    this value (provenance for tests and event export); they are excluded
    from equality, which compares residues, exponent, and modulus set.
    """

    mantissa: ResidueVector
    exponent: int
    mag_log2: float
    sign: int
    align_strategy: str | None = None
    norm_events: tuple = ()

    @property
    def set_ref(self) -> ModulusSet:
        return self.mantissa.set_ref

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def _key(self):
        return (self.mantissa.residues, self.mantissa.set_ref.moduli, self.exponent)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HybridNum):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


def signed_value(rv: ResidueVector, ms: ModulusSet) -> int:
    """Symmetric signed reconstruction: n if n < M/2 else n - M."""
    n = rns.crt_reconstruct(rv, ms)
    if 2 * n >= ms.composite:
        n -= ms.composite
    return n


def make_hybrid(n: int, exponent: int, ms: ModulusSet) -> HybridNum:
    """Build the hybrid value n * 2^exponent from a signed integer mantissa."""
    mantissa = rns.encode_signed(n, ms)
    mag = math.log2(abs(n)) if n else float("-inf")
    sign = (n > 0) - (n < 0)
    return HybridNum(mantissa, exponent, mag, sign)


def from_real(x: float, ms: ModulusSet, cfg: HybridConfig) -> HybridNum:
    """Encode a finite real into the canonical mantissa window.

    The exponent f is chosen so N = round(x * 2^-f), rounded half to even,
    lands in [2^(b-2), 2^(b-1)); zero encodes as an all-zero mantissa with
    f = 0. The round-trip error is at most 2^(f-1).
    """
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot encode non-finite value {x!r}")
    if x == 0.0:
        return HybridNum(rns.encode_residues(0, ms), 0, float("-inf"), 0)

    b = cfg.operand_bound_bits
    _, e = math.frexp(x)  # |x| = m * 2^e with 0.5 <= m < 1
    f = e - b + 1
    n = round(math.ldexp(x, -f))  # exact scaling, then round half to even
    if abs(n) == 2 ** (b - 1):
        # Rounding bumped the mantissa out of the half-open window.
        f += 1
        n = round(math.ldexp(x, -f))
    return make_hybrid(n, f, ms)


def to_real(h: HybridNum) -> float:
    """signed(N) * 2^f evaluated in binary64; saturates to +-inf on overflow."""
    n = signed_value(h.mantissa, h.set_ref)
    try:
        return math.ldexp(n, h.exponent)
    except OverflowError:
        return math.inf if n > 0 else -math.inf


def exact_value(h: HybridNum) -> Fraction:
    """The exact rational value signed(N) * 2^f, for oracle comparisons."""
    n = signed_value(h.mantissa, h.set_ref)
    f = h.exponent
    if f >= 0:
        return Fraction(n * (1 << f))
    return Fraction(n, 1 << (-f))


def hybrid_compare(x: HybridNum, y: HybridNum, ms: ModulusSet) -> int:
    """Total order on hybrid values: LESS, EQUAL, or GREATER.

    Fast path: differing signs, or same-sign magnitude windows
    (mag_log2 + f) +- 1.0 that do not overlap, decide without
    reconstruction. Otherwise both signed values are reconstructed and
    compared by cross-shifted integers, with no floating point.
    """
    if x.sign != y.sign:
        return GREATER if x.sign > y.sign else LESS
    if x.sign == 0:
        return EQUAL

    wx = x.mag_log2 + x.exponent
    wy = y.mag_log2 + y.exponent
    if abs(wx - wy) > 2.0:  # windows of width +-1.0 are disjoint
        bigger_mag = GREATER if wx > wy else LESS
        return bigger_mag if x.sign > 0 else -bigger_mag

    nx = signed_value(x.mantissa, ms)
    ny = signed_value(y.mantissa, ms)
    fmin = min(x.exponent, y.exponent)
    ax = nx << (x.exponent - fmin)
    ay = ny << (y.exponent - fmin)
    if ax == ay:
        return EQUAL
    return GREATER if ax > ay else LESS
