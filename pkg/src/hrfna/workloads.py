"""Long-sequence stability workloads measured against exact rational oracles.

The oracle never touches binary64: every encoded operand has an exact value
signed(N) * 2^f, and the reference fold tracks those values as (numerator,
shift) integer pairs, so the only divergence between the hybrid chain and
the oracle is the rounding introduced by normalization and lossy alignment.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from hrfna import arithmetic, hybrid
from hrfna.errors import HrfnaError
from hrfna.hybrid import HybridConfig, HybridNum, signed_value, tau_int
from hrfna.pipeline import Op
from hrfna.rns import ModulusSet

GENERATOR_ID = "python-random-mt19937"


class LengthMismatch(HrfnaError):
    """Dot-product inputs must have equal lengths."""


# Exact values as (numerator, shift) pairs denoting n * 2^s; cheaper than
# Fraction over long chains because no gcd runs per operation.


def _pair_of(h: HybridNum) -> tuple[int, int]:
    return signed_value(h.mantissa, h.set_ref), h.exponent


def _pair_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    return a[0] * b[0], a[1] + b[1]


def _pair_add(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    s = min(a[1], b[1])
    return (a[0] << (a[1] - s)) + (b[0] << (b[1] - s)), s


def _pair_fraction(p: tuple[int, int]) -> Fraction:
    n, s = p
    return Fraction(n * (1 << s)) if s >= 0 else Fraction(n, 1 << -s)


def relative_error(approx: tuple[int, int], exact: tuple[int, int]) -> Fraction:
    """|approx - exact| / |exact| as an exact Fraction (0 when both are zero)."""
    diff = _pair_add(approx, (-exact[0], exact[1]))
    if exact[0] == 0:
        if diff[0] == 0:
            return Fraction(0)
        raise ZeroDivisionError("exact value is zero but the hybrid result is not")
    return abs(_pair_fraction(diff)) / abs(_pair_fraction(exact))


@dataclass(frozen=True)
class DriftReport:
    """Outcome of one workload run against its exact oracle."""

    workload: str
    seed: int | None
    steps: int
    generator: str
    config: dict
    norm_events: int
    strategy_counts: dict
    rel_error: Fraction
    bound: Fraction

    def as_dict(self) -> dict:
        return {
            "workload": self.workload,
            "seed": self.seed,
            "steps": self.steps,
            "generator": self.generator,
            "config": self.config,
            "norm_events": self.norm_events,
            "strategy_counts": dict(sorted(self.strategy_counts.items())),
            "rel_error": float(self.rel_error),
            "bound": float(self.bound),
        }


def _config_record(ms: ModulusSet, cfg: HybridConfig) -> dict:
    return {
        "moduli": list(ms.moduli),
        "alpha": [cfg.alpha.numerator, cfg.alpha.denominator],
        "k": cfg.scale_shift_k,
        "b": cfg.operand_bound_bits,
    }


def mac_sequences(seed: int, n_steps: int) -> tuple[list[float], list[float]]:
    """Deterministic multiplier/addend streams: [0.5, 2) and [-1, 1)."""
    rng = random.Random(seed)
    mults = [rng.uniform(0.5, 2.0) for _ in range(n_steps)]
    addends = [rng.uniform(-1.0, 1.0) for _ in range(n_steps)]
    return mults, addends


def run_mac_chain(
    mults, addends, ms: ModulusSet, cfg: HybridConfig, seed: int | None = None
) -> DriftReport:
    """Fold acc <- acc * m + a through the hybrid ops, tracking the exact value.

    The oracle folds the encoded operand values exactly, so the measured
    relative error isolates normalization and alignment rounding. The
    per-event rounding model gives the bound norm_events * 2^(k-1) / tau.
    """
    if len(mults) != len(addends):
        raise LengthMismatch(f"{len(mults)} multipliers vs {len(addends)} addends")

    acc = hybrid.from_real(1.0, ms, cfg)
    exact = _pair_of(acc)
    norm_events = 0
    strategies: dict[str, int] = {}
    for m, a in zip(mults, addends):
        hm = hybrid.from_real(m, ms, cfg)
        ha = hybrid.from_real(a, ms, cfg)
        acc = arithmetic.hrfna_mul(acc, hm, ms, cfg)
        norm_events += len(acc.norm_events)
        exact = _pair_mul(exact, _pair_of(hm))
        acc = arithmetic.hrfna_add(acc, ha, ms, cfg)
        norm_events += len(acc.norm_events)
        strategies[acc.align_strategy] = strategies.get(acc.align_strategy, 0) + 1
        exact = _pair_add(exact, _pair_of(ha))

    rel = relative_error(_pair_of(acc), exact)
    bound = Fraction(norm_events * 2 ** (cfg.scale_shift_k - 1), tau_int(ms, cfg))
    assert rel <= bound, f"drift {float(rel)} exceeds bound {float(bound)}"
    return DriftReport(
        workload="chained_mac",
        seed=seed,
        steps=len(mults),
        generator=GENERATOR_ID,
        config=_config_record(ms, cfg),
        norm_events=norm_events,
        strategy_counts=strategies,
        rel_error=rel,
        bound=bound,
    )


def chained_mac(seed: int, n_steps: int, ms: ModulusSet, cfg: HybridConfig) -> DriftReport:
    """Seeded multiply-accumulate chain; see run_mac_chain for the fold."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    mults, addends = mac_sequences(seed, n_steps)
    return run_mac_chain(mults, addends, ms, cfg, seed=seed)


def chained_mac_program(seed: int, n_steps: int) -> list[Op]:
    """The same chain expressed as a pipeline program (for timing/value checks)."""
    mults, addends = mac_sequences(seed, n_steps)
    ops: list[Op] = [Op("lit", name="acc", value=1.0)]
    for i, (m, a) in enumerate(zip(mults, addends)):
        ops.append(Op("lit", name=f"m{i}", value=m))
        ops.append(Op("lit", name=f"a{i}", value=a))
    prev = "acc"
    for i in range(n_steps):
        ops.append(Op("mul", args=(prev, f"m{i}")))
        ops.append(Op("add", args=(f"t{2 * i}", f"a{i}")))
        prev = f"t{2 * i + 1}"
    return ops


def dot_product(
    xs, ys, ms: ModulusSet, cfg: HybridConfig
) -> tuple[HybridNum, DriftReport]:
    """Sum of pairwise products in hybrid arithmetic, with an exact-oracle report.

    Exponent synchronization happens inside the accumulation adds; the
    reported bound 2^-(b-3) * length comes from the per-operation rounding
    model.
    """
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} vs {len(ys)} elements")
    if not xs:
        raise LengthMismatch("empty input")

    acc: HybridNum | None = None
    exact = (0, 0)
    norm_events = 0
    strategies: dict[str, int] = {}
    for x, y in zip(xs, ys):
        hx = hybrid.from_real(x, ms, cfg)
        hy = hybrid.from_real(y, ms, cfg)
        prod = arithmetic.hrfna_mul(hx, hy, ms, cfg)
        norm_events += len(prod.norm_events)
        exact = _pair_add(exact, _pair_mul(_pair_of(hx), _pair_of(hy)))
        if acc is None:
            acc = prod
        else:
            acc = arithmetic.hrfna_add(acc, prod, ms, cfg)
            norm_events += len(acc.norm_events)
            strategies[acc.align_strategy] = strategies.get(acc.align_strategy, 0) + 1

    rel = relative_error(_pair_of(acc), exact)
    bound = Fraction(len(xs), 2 ** (cfg.operand_bound_bits - 3))
    report = DriftReport(
        workload="dot_product",
        seed=None,
        steps=len(xs),
        generator="caller-supplied",
        config=_config_record(ms, cfg),
        norm_events=norm_events,
        strategy_counts=strategies,
        rel_error=rel,
        bound=bound,
    )
    return acc, report
