"""Residue-number-system core: modulus sets, channel arithmetic, reconstruction.

Every value is a plain Python integer, so channel products and the
reconstruction accumulator never overflow regardless of the modulus set.
Channels never interact: each operation is applied per modulus with no
carries between lanes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from hrfna.errors import HrfnaError

# Moduli must fit in 16 bits; wider channels are out of scope.
MAX_MODULUS_BITS = 16

DEFAULT_MODULI = (4093, 4095, 4091)


class ModulusTooSmall(HrfnaError):
    """A modulus below 2 cannot carry a residue channel."""


class ModulusTooLarge(HrfnaError):
    """A modulus beyond 16 bits is outside the supported channel width."""


class NotCoprime(HrfnaError):
    """Two moduli share a factor, so reconstruction would not be unique."""

    def __init__(self, i: int, j: int, mi: int, mj: int):
        self.index_a = i
        self.index_b = j
        super().__init__(f"moduli[{i}]={mi} and moduli[{j}]={mj} share gcd {gcd(mi, mj)}")


class OutOfRange(HrfnaError):
    """Integer outside the representable range of the modulus set."""


class MismatchedSet(HrfnaError):
    """Residue vectors built under different modulus sets cannot be combined."""


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def mod_inverse(a: int, m: int) -> int:
    """Inverse of a modulo m via extended Euclid; a and m must be coprime."""
    g, x, _ = extended_gcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} has no inverse modulo {m} (gcd {g})")
    return x % m


@dataclass(frozen=True)
class ModulusSet:
    """A fixed modulus set with its precomputed reconstruction constants.

    composite is the full product M; crt_weights holds one (M_i, y_i) pair
    per channel with M_i = M / m_i and y_i = M_i^-1 mod m_i.
    """

    moduli: tuple[int, ...]
    composite: int
    crt_weights: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.moduli)


@dataclass(frozen=True)
class ResidueVector:
    """Per-channel residues of one integer under a specific modulus set."""

    residues: tuple[int, ...]
    set_ref: ModulusSet

    def __len__(self) -> int:
        return len(self.residues)


def make_modulus_set(moduli) -> ModulusSet:
    """Build a ModulusSet, validating range and pairwise coprimality.

    y_i comes from extended Euclid and is post-checked against
    (M_i * y_i) mod m_i == 1 to guard against sign-convention bugs.
    """
    moduli = tuple(int(m) for m in moduli)
    if not moduli:
        raise ModulusTooSmall("modulus list is empty")
    for m in moduli:
        if m < 2:
            raise ModulusTooSmall(f"modulus {m} < 2")
        if m.bit_length() > MAX_MODULUS_BITS:
            raise ModulusTooLarge(f"modulus {m} exceeds {MAX_MODULUS_BITS} bits")
    for i in range(len(moduli)):
        for j in range(i + 1, len(moduli)):
            if gcd(moduli[i], moduli[j]) != 1:
                raise NotCoprime(i, j, moduli[i], moduli[j])

    composite = 1
    for m in moduli:
        composite *= m

    weights = []
    for m in moduli:
        m_i = composite // m
        y_i = mod_inverse(m_i, m)
        if (m_i * y_i) % m != 1:
            raise AssertionError(f"inverse post-check failed for modulus {m}")
        weights.append((m_i, y_i))
    return ModulusSet(moduli, composite, tuple(weights))


def encode_residues(n: int, ms: ModulusSet) -> ResidueVector:
    """Encode a nonnegative integer n in [0, M) into its residue vector."""
    if n < 0 or n >= ms.composite:
        raise OutOfRange(f"{n} not in [0, {ms.composite})")
    return ResidueVector(tuple(n % m for m in ms.moduli), ms)


def encode_signed(n: int, ms: ModulusSet) -> ResidueVector:
    """Encode a signed integer under the symmetric convention.

    Values in (-M/2, M/2) map onto [0, M) with negatives stored as M - |n|.
    Python's per-channel modulo produces exactly that encoding.
    """
    if 2 * abs(n) >= ms.composite:
        raise OutOfRange(f"|{n}| not below M/2 = {ms.composite / 2}")
    return ResidueVector(tuple(n % m for m in ms.moduli), ms)


def _check_set(rv: ResidueVector, ms: ModulusSet) -> None:
    if rv.set_ref.moduli != ms.moduli:
        raise MismatchedSet(f"vector built under {rv.set_ref.moduli}, operating under {ms.moduli}")


def crt_reconstruct(rv: ResidueVector, ms: ModulusSet) -> int:
    """Unique n in [0, M) matching every channel of rv.

    The accumulator sum(r_i * M_i * y_i) exceeds M by up to a factor of
    k * max(m_i); Python integers absorb that without truncation.
    """
    _check_set(rv, ms)
    total = 0
    for r, (m_i, y_i) in zip(rv.residues, ms.crt_weights):
        total += r * m_i * y_i
    return total % ms.composite


def mod_mul(a: ResidueVector, b: ResidueVector, ms: ModulusSet) -> ResidueVector:
    """Channel-wise product: result[i] = (a[i] * b[i]) mod m_i."""
    _check_set(a, ms)
    _check_set(b, ms)
    return ResidueVector(
        tuple((x * y) % m for x, y, m in zip(a.residues, b.residues, ms.moduli)), ms
    )


def mod_add(a: ResidueVector, b: ResidueVector, ms: ModulusSet) -> ResidueVector:
    """Channel-wise sum: result[i] = (a[i] + b[i]) mod m_i."""
    _check_set(a, ms)
    _check_set(b, ms)
    return ResidueVector(
        tuple((x + y) % m for x, y, m in zip(a.residues, b.residues, ms.moduli)), ms
    )


def mod_sub(a: ResidueVector, b: ResidueVector, ms: ModulusSet) -> ResidueVector:
    """Channel-wise difference, wrapped nonnegatively per channel."""
    _check_set(a, ms)
    _check_set(b, ms)
    return ResidueVector(
        tuple((x - y) % m for x, y, m in zip(a.residues, b.residues, ms.moduli)), ms
    )
