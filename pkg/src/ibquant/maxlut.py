"""Mutual-information-maximizing lookup tables for two-input factor-graph nodes.

A degree-three node combining messages about two binary code symbols is reduced
to a binary-input channel with one output per (l, z) message pair; quantizing
that channel to the output alphabet yields the node's lookup table.  Cascades
decompose higher-degree nodes into chains of two-input stages.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ib import _antisymmetric_pairing, dp_optimal_quantizer
from .info import ConditionalDist, JointXY, mutual_information, push_through_quantizer


class NodeFunction(enum.Enum):
    """Binary code-symbol relation enforced by a factor-graph node."""

    CHECK_XOR = "check"          # x3 = x1 xor x2
    VARIABLE_EQUAL = "variable"  # x1 = x2 = x3


SCHEDULES = ("left_fold", "balanced_tree")


@dataclass(frozen=True)
class MessageDist:
    """Distribution of a discrete message conditioned on the binary symbol it describes."""

    cond: ConditionalDist

    def __post_init__(self):
        if self.cond.num_conditions != 2:
            raise ValueError("messages must be conditioned on a binary code symbol")

    @property
    def alphabet_size(self) -> int:
        return self.cond.alphabet_size

    @property
    def rows(self) -> np.ndarray:
        return self.cond.rows

    @classmethod
    def from_rows(cls, row0, row1) -> "MessageDist":
        return cls(ConditionalDist(np.array([row0, row1], dtype=float)))

    @classmethod
    def noiseless(cls) -> "MessageDist":
        return cls(ConditionalDist(np.eye(2)))

    @classmethod
    def constant(cls) -> "MessageDist":
        """Single-symbol message carrying no information; cascade padding only."""
        return cls(ConditionalDist(np.ones((2, 1))))

    def hard_decision_error(self) -> float:
        """Error rate of the bitwise MAP decision under equiprobable symbols."""
        joint = 0.5 * self.rows
        return float(np.sum(np.minimum(joint[0], joint[1])))


@dataclass(frozen=True)
class NodeLut:
    """Two-input lookup table (l, z) -> v plus its output message statistics."""

    table: np.ndarray
    out_cond: MessageDist
    out_alphabet_size: int
    relevant_info: float

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int64)
        if table.ndim != 2:
            raise ValueError("table must be two-dimensional")
        if table.min() < 0 or table.max() >= self.out_alphabet_size:
            raise ValueError("table entry outside the output alphabet")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)


def node_joint(f: NodeFunction, a: MessageDist, b: MessageDist) -> ConditionalDist:
    """p((l, z) | x3) over the row-major product alphabet of the two inputs.

    For the parity node the incoming symbol pair is uniform over the two
    solutions of x1 xor x2 = x3; for the equality node both inputs describe
    x3 itself.
    """
    a0, a1 = a.rows
    b0, b1 = b.rows
    mirrored = _is_mirror_symmetric(a) and _is_mirror_symmetric(b)
    if f is NodeFunction.VARIABLE_EQUAL:
        row0 = np.outer(a0, b0)
        # for mirror-symmetric inputs the x=1 row is an exact permutation of
        # the x=0 row; building it as such keeps the symmetry bit-exact
        row1 = row0[::-1, ::-1] if mirrored else np.outer(a1, b1)
    elif f is NodeFunction.CHECK_XOR:
        row0 = 0.5 * (np.outer(a0, b0) + np.outer(a1, b1))
        row1 = row0[::-1, :] if mirrored else 0.5 * (np.outer(a0, b1) + np.outer(a1, b0))
    else:
        raise ValueError(f"unknown node function {f!r}")
    return ConditionalDist(np.vstack([row0.ravel(), row1.ravel()]))


def _is_mirror_symmetric(msg: MessageDist) -> bool:
    return bool(np.array_equal(msg.rows[1], msg.rows[0][::-1]))


def quantized_message(transition_rows: np.ndarray, quantizer) -> MessageDist:
    """Message statistics p(v|x) after pushing a binary-input channel through a quantizer.

    When the channel is exactly output-symmetric and the quantizer labels are
    mirror-symmetric, the x=1 row is written as the exact reversal of the x=0
    row instead of re-summing it, keeping the symmetry bit-exact.
    """
    mapping = quantizer.mapping.rows
    rows = transition_rows @ mapping
    labels = quantizer.labels
    k = mapping.shape[1]
    if (np.array_equal(transition_rows[1], transition_rows[0][::-1])
            and bool(np.all(labels[::-1] == k - 1 - labels))):
        rows = np.vstack([rows[0], rows[0][::-1]])
    return MessageDist(ConditionalDist(rows))


def build_max_lut(f: NodeFunction, a: MessageDist, b: MessageDist,
                  out_size: int) -> NodeLut:
    """The deterministic LUT of the given output size maximizing I(output; x3).

    Reduces the node to a binary-input channel with |L|*|Z| outputs and runs the
    optimal dynamic-programming quantizer on it, so the returned table attains
    the global maximum over all deterministic tables of that size.  Output
    labels are ordered by posterior log-likelihood ratio, descending.
    """
    if out_size < 1:
        raise ValueError("out_size must be >= 1")
    cond = node_joint(f, a, b)
    joint = JointXY(0.5 * cond.rows)
    design = dp_optimal_quantizer(joint, out_size)
    labels = design.quantizer.labels
    table = labels.reshape(a.alphabet_size, b.alphabet_size)
    pushed = push_through_quantizer(joint, design.quantizer)
    out_rows = 2.0 * pushed.matrix  # uniform symbol prior by construction
    if _labels_mirror(joint.matrix, labels, out_size):
        out_rows = np.vstack([out_rows[0], out_rows[0][::-1]])
    out_cond = MessageDist(ConditionalDist(out_rows))
    return NodeLut(table, out_cond, out_size, design.relevant_info)


def _labels_mirror(matrix: np.ndarray, labels: np.ndarray, out_size: int) -> bool:
    """True when swapped-column partners landed in mirrored clusters.

    In that case p(v|1) is mathematically the exact reversal of p(v|0); writing
    it that way sidesteps summation-order rounding so downstream stages can
    keep detecting the symmetry exactly.
    """
    pairing = _antisymmetric_pairing(matrix)
    if pairing is None:
        return False
    return bool(np.all(labels[pairing] == out_size - 1 - labels))


@dataclass(frozen=True)
class CascadeStage:
    """One two-input stage; sources are ("input", k), ("stage", j) or ("const", 0)."""

    left: tuple[str, int]
    right: tuple[str, int]
    lut: NodeLut


@dataclass(frozen=True)
class LutCascade:
    """Ordered chain of two-input LUT stages implementing a higher-degree node."""

    node: NodeFunction
    schedule: str
    num_inputs: int
    stages: tuple[CascadeStage, ...]
    final: MessageDist

    def evaluate(self, inputs) -> np.ndarray:
        """Apply the chain to integer message arrays (one per input, same shape)."""
        if len(inputs) != self.num_inputs:
            raise ValueError(f"expected {self.num_inputs} inputs, got {len(inputs)}")
        values = []

        def fetch(source):
            kind, idx = source
            if kind == "input":
                return inputs[idx]
            if kind == "stage":
                return values[idx]
            return np.zeros_like(inputs[0])

        for stage in self.stages:
            values.append(stage.lut.table[fetch(stage.left), fetch(stage.right)])
        return values[-1]


def _cascade_plan(schedule: str, num_inputs: int) -> list[tuple[tuple, tuple]]:
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
    if num_inputs == 1:
        return [(("input", 0), ("const", 0))]
    if schedule == "left_fold":
        plan = [(("input", 0), ("input", 1))]
        for k in range(2, num_inputs):
            plan.append((("stage", k - 2), ("input", k)))
        return plan
    plan = []
    work: list[tuple] = [("input", i) for i in range(num_inputs)]
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            plan.append((work[i], work[i + 1]))
            nxt.append(("stage", len(plan) - 1))
        if len(work) % 2 == 1:
            nxt.append(work[-1])
        work = nxt
    return plan


def cascade_node(f: NodeFunction, inputs, out_size: int,
                 schedule: str = "balanced_tree") -> LutCascade:
    """Combine any number of incoming messages pairwise into one output message.

    Every stage is an information-optimal two-input LUT with the same output
    alphabet size; the schedule fixes the pairing order.  A single input turns
    into a pure requantization stage.
    """
    if not inputs:
        raise ValueError("cascade needs at least one input message")
    if out_size < 2:
        raise ValueError("out_size must be >= 2")
    plan = _cascade_plan(schedule, len(inputs))
    dists: dict[tuple, MessageDist] = {("input", i): d for i, d in enumerate(inputs)}
    dists[("const", 0)] = MessageDist.constant()
    stages = []
    for left, right in plan:
        # A constant second operand only requantizes, so equality semantics apply.
        func = NodeFunction.VARIABLE_EQUAL if right[0] == "const" else f
        lut = build_max_lut(func, dists[left], dists[right], out_size)
        stages.append(CascadeStage(left, right, lut))
        dists[("stage", len(stages) - 1)] = lut.out_cond
    return LutCascade(f, schedule, len(inputs), tuple(stages), stages[-1].lut.out_cond)


def save_node_lut(lut: NodeLut, path, comment: str | None = None) -> None:
    """Plain-text table: header, one line of labels per l, then p(v|x) rows."""
    with open(path, "w", newline="\n") as fh:
        fh.write(_lut_text(lut, comment))


def _lut_text(lut: NodeLut, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    nl, nz = lut.table.shape
    lines.append(f"lut {nl} {nz} {lut.out_alphabet_size}")
    for row in lut.table:
        lines.append(" ".join(str(int(v)) for v in row))
    for row in lut.out_cond.rows:
        lines.append(" ".join(f"{p:.17g}" for p in row))
    return "\n".join(lines) + "\n"


def load_node_lut(path) -> NodeLut:
    with open(path) as fh:
        lines = [l.strip() for l in fh if l.strip() and not l.startswith("#")]
    return _lut_from_lines(lines)[0]


def _lut_from_lines(lines, start: int = 0) -> tuple[NodeLut, int]:
    tag, nl, nz, nv = lines[start].split()
    if tag != "lut":
        raise ValueError(f"not a lut header: {lines[start]!r}")
    nl, nz, nv = int(nl), int(nz), int(nv)
    table = np.array([[int(t) for t in lines[start + 1 + i].split()] for i in range(nl)])
    rows = np.array([[float(t) for t in lines[start + 1 + nl + i].split()] for i in range(2)])
    out_cond = MessageDist(ConditionalDist(rows))
    info = mutual_information(JointXY(0.5 * rows))
    return NodeLut(table, out_cond, nv, info), start + 1 + nl + 2
