"""File formats: config JSON, hybrid records, program files, traces, vectors.

Every format starts with a version header. Residues are zero-padded
lowercase hex sized to the modulus width; exponents are signed decimal.
File writes go through a temp-file rename so readers never observe a
partial file.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from fractions import Fraction

from hrfna import hybrid, pipeline, rns
from hrfna.errors import HrfnaError
from hrfna.hybrid import DEFAULT_CONFIG, HybridConfig, HybridNum
from hrfna.pipeline import DEFAULT_PIPELINE, Op, PipelineConfig
from hrfna.rns import DEFAULT_MODULI, ModulusSet

CONFIG_FORMAT = "hrfna-config v1"
RECORD_FORMAT = "hrfna-hybrid v1"
PROGRAM_FORMAT = "hrfna-program v1"
TRACE_FORMAT = "hrfna-trace v1"
METRICS_FORMAT = "hrfna-metrics v1"
VECTORS_FORMAT = "hrfna-vectors v1"

CONFIG_ENV_VAR = "HRFNA_CONFIG"


class ParseError(HrfnaError):
    """Malformed file or record."""


class InvariantViolation(HrfnaError):
    """A loaded configuration violates a named invariant."""

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"{name}" + (f": {detail}" if detail else ""))


def atomic_write(path: str, text: str) -> None:
    """Write text to path via a temp file plus rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hrfna-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- configuration ----------------------------------------------------------


def default_configs() -> tuple[ModulusSet, HybridConfig, PipelineConfig]:
    return rns.make_modulus_set(DEFAULT_MODULI), DEFAULT_CONFIG, DEFAULT_PIPELINE


def config_to_dict(ms: ModulusSet, hcfg: HybridConfig, pcfg: PipelineConfig) -> dict:
    return {
        "format": CONFIG_FORMAT,
        "moduli": list(ms.moduli),
        "alpha_num": hcfg.alpha.numerator,
        "alpha_den": hcfg.alpha.denominator,
        "k": hcfg.scale_shift_k,
        "b": hcfg.operand_bound_bits,
        "residue_stages": pcfg.residue_stages,
        "exponent_stages": pcfg.exponent_stages,
        "norm_engine_stages": pcfg.norm_engine_stages,
        "cycles_per_norm_stage": pcfg.cycles_per_norm_stage,
        "input_stages": pcfg.input_stages,
        "post_stages": pcfg.post_stages,
        "end_to_end_latency": pcfg.end_to_end_latency,
    }


def config_from_dict(data: dict) -> tuple[ModulusSet, HybridConfig, PipelineConfig]:
    if not isinstance(data, dict):
        raise ParseError("config root must be a JSON object")
    if data.get("format", CONFIG_FORMAT) != CONFIG_FORMAT:
        raise ParseError(f"unsupported config format {data.get('format')!r}")
    try:
        moduli = [int(m) for m in data["moduli"]]
        alpha = Fraction(int(data["alpha_num"]), int(data["alpha_den"]))
        k = int(data["k"])
        b = int(data["b"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad config field: {exc}") from None

    try:
        ms = rns.make_modulus_set(moduli)
    except rns.NotCoprime as exc:
        raise InvariantViolation("pairwise-coprime", str(exc)) from None
    except rns.ModulusTooSmall as exc:
        raise InvariantViolation("modulus-minimum", str(exc)) from None
    except rns.ModulusTooLarge as exc:
        raise InvariantViolation("modulus-width", str(exc)) from None

    try:
        hcfg = HybridConfig(alpha=alpha, scale_shift_k=k, operand_bound_bits=b)
    except ValueError as exc:
        raise InvariantViolation("hybrid-config", str(exc)) from None
    try:
        hybrid.validate_config(ms, hcfg)
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from None

    pipe_fields = {
        name: int(data[name])
        for name in (
            "residue_stages",
            "exponent_stages",
            "norm_engine_stages",
            "cycles_per_norm_stage",
            "input_stages",
            "post_stages",
            "end_to_end_latency",
        )
        if name in data
    }
    try:
        pcfg = PipelineConfig(**pipe_fields)
    except ValueError as exc:
        raise InvariantViolation(str(exc)) from None
    return ms, hcfg, pcfg


def load_config(path: str | None = None) -> tuple[ModulusSet, HybridConfig, PipelineConfig]:
    """Load configs from path, the HRFNA_CONFIG env var, or defaults when absent."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None or not os.path.exists(path):
        if path is not None:
            raise ParseError(f"config file not found: {path}")
        return default_configs()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(data)


def save_config(path: str, ms: ModulusSet, hcfg: HybridConfig, pcfg: PipelineConfig) -> None:
    atomic_write(path, json.dumps(config_to_dict(ms, hcfg, pcfg), indent=2) + "\n")


# -- hybrid records ----------------------------------------------------------


def residue_hex_width(m: int) -> int:
    return (m.bit_length() + 3) // 4


def format_residues(residues, ms: ModulusSet) -> list[str]:
    return [
        format(r, f"0{residue_hex_width(m)}x") for r, m in zip(residues, ms.moduli)
    ]


def hybrid_record(h: HybridNum) -> str:
    """One-line textual record: version, per-channel hex residues, exponent."""
    fields = format_residues(h.mantissa.residues, h.set_ref)
    return f"{RECORD_FORMAT} " + " ".join(fields) + f" {h.exponent}"


def parse_hybrid_record(line: str, ms: ModulusSet) -> HybridNum:
    parts = line.split()
    if len(parts) != 3 + len(ms.moduli) or " ".join(parts[:2]) != RECORD_FORMAT:
        raise ParseError(f"malformed hybrid record: {line!r}")
    try:
        residues = tuple(int(p, 16) for p in parts[2:-1])
        exponent = int(parts[-1])
    except ValueError as exc:
        raise ParseError(f"malformed hybrid record: {exc}") from None
    for r, m in zip(residues, ms.moduli):
        if not 0 <= r < m:
            raise ParseError(f"residue {r:#x} out of range for modulus {m}")
    rv = rns.ResidueVector(residues, ms)
    n = hybrid.signed_value(rv, ms)
    mag = math.log2(abs(n)) if n else float("-inf")
    return HybridNum(rv, exponent, mag, (n > 0) - (n < 0))


# -- program files -----------------------------------------------------------


def parse_program(text: str) -> list[Op]:
    """Program file: header line, then `lit name value` / `mul a b` / `add a b`."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != PROGRAM_FORMAT:
        raise ParseError(f"program must start with {PROGRAM_FORMAT!r}")
    ops: list[Op] = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "lit" and len(parts) == 3:
            try:
                value = float(parts[2])
            except ValueError:
                raise ParseError(f"bad literal value in {ln!r}") from None
            ops.append(Op("lit", name=parts[1], value=value))
        elif parts[0] in ("mul", "add") and len(parts) == 3:
            ops.append(Op(parts[0], args=(parts[1], parts[2])))
        else:
            raise ParseError(f"unrecognized program line {ln!r}")
    return ops


def program_text(ops) -> str:
    lines = [PROGRAM_FORMAT]
    for op in ops:
        if op.kind == "lit":
            lines.append(f"lit {op.name} {op.value!r}")
        else:
            lines.append(f"{op.kind} {op.args[0]} {op.args[1]}")
    return "\n".join(lines) + "\n"


# -- trace and metrics exports -----------------------------------------------


def trace_csv(trace) -> str:
    lines = [f"# {TRACE_FORMAT}", "cycle,unit,action,op_id,value_hex"]
    for ev in trace:
        lines.append(f"{ev.cycle},{ev.unit},{ev.action},{ev.op or ''},{ev.value or ''}")
    return "\n".join(lines) + "\n"


def metrics_json(metrics: pipeline.MetricsSummary) -> str:
    payload = {"format": METRICS_FORMAT}
    payload.update(metrics.as_dict())
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def drift_report_json(report) -> str:
    payload = {"format": "hrfna-drift v1"}
    payload.update(report.as_dict())
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# -- hardware test vectors ----------------------------------------------------


def vectors_text(program, ms: ModulusSet, hcfg: HybridConfig) -> str:
    """Stimulus/expected-response lines for checking an external implementation.

    mul/add lines carry both input operand groups, then the expected result
    group and a normalization flag:
      op-id kind ax ay az fx bx by bz fy | expect zx zy zz fz norm-flag
    lit lines carry only the expected encoding of the literal.
    """
    env: dict[str, HybridNum] = {}
    names, results, _ = pipeline.evaluate_program(program, ms, hcfg)
    issued = iter(zip(names, results))
    lines = [f"# {VECTORS_FORMAT}"]

    def group(h: HybridNum) -> str:
        return " ".join(format_residues(h.mantissa.residues, ms)) + f" {h.exponent}"

    for op in program:
        if op.kind == "lit":
            value = hybrid.from_real(op.value, ms, hcfg)
            env[op.name] = value
            lines.append(f"{op.name} lit | expect {group(value)} 0")
            continue
        name, result = next(issued)
        a, b = (env[arg] for arg in op.args)
        env[name] = result
        flag = 1 if result.norm_events else 0
        lines.append(f"{name} {op.kind} {group(a)} {group(b)} | expect {group(result)} {flag}")
    return "\n".join(lines) + "\n"
