"""Discrete density evolution: per-iteration lookup-table decoder design.

Tracks the message distribution of an infinite cycle-free (dv, dc)-regular
ensemble under the all-zero-codeword convention and, at every iteration, builds
the check, variable, and decision lookup tables that maximize the information
the passed messages retain about their code symbols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DmcSpec, build_bpsk_awgn, build_bpsk_awgn_sigma
from .ib import Quantizer, dp_optimal_quantizer
from .info import ConditionalDist
from .maxlut import (
    CascadeStage,
    LutCascade,
    MessageDist,
    NodeFunction,
    NodeLut,
    _cascade_plan,
    _lut_from_lines,
    _lut_text,
    cascade_node,
    quantized_message,
)


# Below this decision-error probability the message distributions have
# concentrated past what doubles (and the message floor) can represent:
# tables designed there order their labels by sub-noise mass ratios and can
# flip entire frames.  The design ends at the last iteration above the floor
# and decoding reuses that iteration's tables from then on.
SATURATION_FLOOR = 1e-12

# Per-level probability floor applied to the evolving message distributions.
# Without it the weak-message table cells of late iterations are placed by
# underflowed noise, and hard frames hitting those cells can be amplified
# toward the flipped codeword.  With the floor, a weak level paired with a
# strong one keeps the strong level's likelihood ratio, which is the sensible
# decoding behaviour.
MESSAGE_FLOOR = 1e-13


@dataclass(frozen=True)
class DecisionRule:
    """Final per-iteration hard decision: a cascade plus a message-to-bit map."""

    cascade: LutCascade
    bit_map: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bit_map, dtype=np.int64)
        bits.setflags(write=False)
        object.__setattr__(self, "bit_map", bits)

    def decide(self, channel_msgs, check_msgs) -> np.ndarray:
        final = self.cascade.evaluate([channel_msgs] + list(check_msgs))
        return self.bit_map[final]


@dataclass(frozen=True)
class LdpcEnsembleDesign:
    """Channel quantizer plus per-iteration LUT chains from density evolution."""

    channel_lut: Quantizer
    channel_message: MessageDist
    check_luts: tuple[LutCascade, ...]
    var_luts: tuple[LutCascade, ...]
    decision_luts: tuple[DecisionRule, ...]
    message_bits: int
    error_prob_trace: np.ndarray
    dmc: DmcSpec
    var_degree: int
    check_degree: int

    def __post_init__(self):
        trace = np.asarray(self.error_prob_trace, dtype=float)
        trace.setflags(write=False)
        object.__setattr__(self, "error_prob_trace", trace)

    @property
    def max_iter(self) -> int:
        return len(self.check_luts)

    @property
    def alphabet_size(self) -> int:
        return 2 ** self.message_bits


def _floored(msg: MessageDist) -> MessageDist:
    """Clamp message probabilities at MESSAGE_FLOOR, keeping mirrors exact."""
    rows = msg.rows
    if rows.min() >= MESSAGE_FLOOR:
        return msg
    mirrored = bool(np.array_equal(rows[1], rows[0][::-1]))
    r0 = np.maximum(rows[0], MESSAGE_FLOOR)
    r0 = r0 / r0.sum()
    if mirrored:
        r1 = r0[::-1]
    else:
        r1 = np.maximum(rows[1], MESSAGE_FLOOR)
        r1 = r1 / r1.sum()
    return MessageDist(ConditionalDist(np.vstack([r0, r1])))


def _decision_bits(final: MessageDist) -> np.ndarray:
    """MAP bit per final message level; zero-LLR levels decide 0."""
    rows = final.rows
    return (rows[1] > rows[0]).astype(np.int64)


def _decision_error(final: MessageDist, bits: np.ndarray) -> float:
    joint = 0.5 * final.rows
    wrong0 = joint[0][bits == 1].sum()
    wrong1 = joint[1][bits == 0].sum()
    return float(wrong0 + wrong1)


def design_decoder(dmc: DmcSpec, dv: int, dc: int, message_bits: int = 4,
                   max_iter: int = 50) -> LdpcEnsembleDesign:
    """Design all decoder lookup tables for a (dv, dc)-regular ensemble.

    The channel output is first quantized to 2**message_bits levels by the
    optimal quantizer; each iteration then builds a balanced-tree check chain
    over dc-1 incoming messages, a left-fold variable chain over the channel
    message plus dv-1 check messages, and a decision chain over the channel
    message plus all dv check messages.  Every intermediate alphabet has
    2**message_bits levels.
    """
    if dmc.num_inputs != 2:
        raise ValueError("decoder design requires a binary-input channel")
    if message_bits < 1:
        raise ValueError("message_bits must be >= 1")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    levels = 2 ** message_bits
    chan_design = dp_optimal_quantizer(dmc.joint(), levels)
    chan_msg = _floored(quantized_message(dmc.transition.rows, chan_design.quantizer))

    check_luts = []
    var_luts = []
    decision_luts = []
    trace = []
    v2c = chan_msg
    for _ in range(max_iter):
        chk = cascade_node(NodeFunction.CHECK_XOR, [v2c] * (dc - 1), levels,
                           "balanced_tree")
        c2v = _floored(chk.final)
        var = cascade_node(NodeFunction.VARIABLE_EQUAL,
                           [chan_msg] + [c2v] * (dv - 1), levels, "left_fold")
        dec = cascade_node(NodeFunction.VARIABLE_EQUAL,
                           [chan_msg] + [c2v] * dv, levels, "left_fold")
        bits = _decision_bits(dec.final)
        err = _decision_error(dec.final, bits)
        if trace and err < SATURATION_FLOOR:
            break  # saturated: discard this iteration, keep the last sound one
        check_luts.append(chk)
        var_luts.append(var)
        decision_luts.append(DecisionRule(dec, bits))
        trace.append(err)
        if err < SATURATION_FLOOR:
            break  # already saturated on the very first iteration
        v2c = _floored(var.final)

    return LdpcEnsembleDesign(
        channel_lut=chan_design.quantizer,
        channel_message=chan_msg,
        check_luts=tuple(check_luts),
        var_luts=tuple(var_luts),
        decision_luts=tuple(decision_luts),
        message_bits=message_bits,
        error_prob_trace=np.array(trace),
        dmc=dmc,
        var_degree=dv,
        check_degree=dc,
    )


def design_bpsk_decoder(ebn0_db: float, dv: int, dc: int, message_bits: int = 4,
                        max_iter: int = 50, num_bins: int = 128,
                        clip_multiplier: float = 3.0,
                        code_rate: float | None = None) -> LdpcEnsembleDesign:
    """Convenience wrapper: BPSK/AWGN channel at the ensemble's design rate."""
    rate = 1.0 - dv / dc if code_rate is None else code_rate
    dmc = build_bpsk_awgn(ebn0_db, rate, num_bins, clip_multiplier)
    return design_decoder(dmc, dv, dc, message_bits, max_iter)


# ---------------------------------------------------------------------------
# plain-text serialization


def _write_cascade(lines: list[str], tag: str, cascade: LutCascade) -> None:
    lines.append(f"{tag} {cascade.schedule} {cascade.num_inputs} {len(cascade.stages)}")
    for stage in cascade.stages:
        for row in _lut_text(stage.lut).strip().splitlines():
            lines.append(row)


def save_design(design: LdpcEnsembleDesign, path, comment: str | None = None) -> None:
    disc = design.dmc.discretization
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"design {design.message_bits} {design.max_iter} "
                 f"{design.var_degree} {design.check_degree}")
    if disc is None:
        raise ValueError("only AWGN-discretized designs can be serialized")
    lines.append(f"channel {disc.noise_std:.17g} {disc.clip_multiplier:.17g} {disc.num_bins}")
    labels = design.channel_lut.labels
    lines.append(f"channel_lut {design.channel_lut.num_inputs} {design.alphabet_size}")
    lines.append(" ".join(str(int(v)) for v in labels))
    for row in design.channel_message.rows:
        lines.append(" ".join(f"{p:.17g}" for p in row))
    for t in range(design.max_iter):
        lines.append(f"iteration {t}")
        _write_cascade(lines, "check_chain", design.check_luts[t])
        _write_cascade(lines, "var_chain", design.var_luts[t])
        _write_cascade(lines, "decision_chain", design.decision_luts[t].cascade)
        lines.append("decision_map " + " ".join(
            str(int(b)) for b in design.decision_luts[t].bit_map))
        lines.append(f"trace {design.error_prob_trace[t]:.17g}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_cascade(lines: list[str], pos: int, node: NodeFunction) -> tuple[LutCascade, int]:
    tag, schedule, num_inputs, num_stages = lines[pos].split()
    num_inputs, num_stages = int(num_inputs), int(num_stages)
    pos += 1
    luts: list[NodeLut] = []
    for _ in range(num_stages):
        lut, pos = _lut_from_lines(lines, pos)
        luts.append(lut)
    plan = _cascade_plan(schedule, num_inputs)
    stages = tuple(CascadeStage(left, right, lut)
                   for (left, right), lut in zip(plan, luts))
    cascade = LutCascade(node, schedule, num_inputs, stages, luts[-1].out_cond)
    return cascade, pos


def load_design(path) -> LdpcEnsembleDesign:
    with open(path) as fh:
        lines = [l.strip() for l in fh if l.strip() and not l.startswith("#")]
    header = lines[0].split()
    if header[0] != "design":
        raise ValueError(f"not a design file: {lines[0]!r}")
    message_bits, max_iter, dv, dc = (int(tok) for tok in header[1:])
    _, noise_std, clip, num_bins = lines[1].split()
    noise_std, clip, num_bins = float(noise_std), float(clip), int(num_bins)
    dmc = build_bpsk_awgn_sigma(noise_std, num_bins, clip)
    _, num_in, levels = lines[2].split()
    num_in, levels = int(num_in), int(levels)
    labels = np.array([int(t) for t in lines[3].split()])
    chan_lut = Quantizer.from_labels(labels, levels)
    rows = np.array([[float(t) for t in lines[4 + i].split()] for i in range(2)])
    chan_msg = MessageDist(ConditionalDist(rows))
    pos = 6
    check_luts, var_luts, decision_luts, trace = [], [], [], []
    for t in range(max_iter):
        if lines[pos] != f"iteration {t}":
            raise ValueError(f"expected iteration {t} marker, got {lines[pos]!r}")
        pos += 1
        chk, pos = _read_cascade(lines, pos, NodeFunction.CHECK_XOR)
        var, pos = _read_cascade(lines, pos, NodeFunction.VARIABLE_EQUAL)
        dec, pos = _read_cascade(lines, pos, NodeFunction.VARIABLE_EQUAL)
        bit_map = np.array([int(t) for t in lines[pos].split()[1:]])
        pos += 1
        trace.append(float(lines[pos].split()[1]))
        pos += 1
        check_luts.append(chk)
        var_luts.append(var)
        decision_luts.append(DecisionRule(dec, bit_map))
    return LdpcEnsembleDesign(
        channel_lut=chan_lut,
        channel_message=chan_msg,
        check_luts=tuple(check_luts),
        var_luts=tuple(var_luts),
        decision_luts=tuple(decision_luts),
        message_bits=message_bits,
        error_prob_trace=np.array(trace),
        dmc=dmc,
        var_degree=dv,
        check_degree=dc,
    )
