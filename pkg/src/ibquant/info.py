"""Finite-alphabet probability containers and exact information measures.

All information quantities are reported in bits (base-2 logarithms), with the
0*log(0) = 0 convention applied entrywise.  Probabilities below ``ZERO_EPS``
are treated as exact zeros when testing absolute continuity, so floating-point
dust cannot produce spurious infinite divergences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

LN2 = float(np.log(2.0))

# Below this a probability counts as an exact zero.
ZERO_EPS = 1e-15

# Constructors renormalize sums within this deviation from 1, reject beyond.
SUM_SLACK = 1e-6

# Sums already this close to 1 are left untouched: renormalizing by ulp-level
# factors would destroy exact mirror symmetry of channel constructions.
NORM_SKIP = 1e-12


def _prob_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array of probabilities, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("empty probability array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("probabilities must be finite")
    if np.any(arr < 0):
        raise ValueError("probabilities must be non-negative")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over an indexed finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _prob_array(self.probs, 1)
        total = arr.sum()
        if abs(total - 1.0) > SUM_SLACK:
            raise ValueError(f"pmf sums to {total!r}, outside the {SUM_SLACK} slack")
        if abs(total - 1.0) > NORM_SKIP:
            arr = arr / total
        object.__setattr__(self, "probs", _frozen(arr))

    def __len__(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, size: int) -> "Pmf":
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point_mass(cls, index: int, size: int) -> "Pmf":
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)


@dataclass(frozen=True)
class ConditionalDist:
    """Row-stochastic matrix; row i is the distribution given conditioning symbol i."""

    rows: np.ndarray

    def __post_init__(self):
        arr = _prob_array(self.rows, 2)
        totals = arr.sum(axis=1)
        if np.any(np.abs(totals - 1.0) > SUM_SLACK):
            worst = float(np.max(np.abs(totals - 1.0)))
            raise ValueError(f"conditional rows deviate from 1 by up to {worst!r}")
        need = np.abs(totals - 1.0) > NORM_SKIP
        if np.any(need):
            arr[need] = arr[need] / totals[need, None]
        object.__setattr__(self, "rows", _frozen(arr))

    @property
    def num_conditions(self) -> int:
        return self.rows.shape[0]

    @property
    def alphabet_size(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> Pmf:
        return Pmf(self.rows[i].copy())

    @classmethod
    def identity(cls, size: int) -> "ConditionalDist":
        return cls(np.eye(size))


@dataclass(frozen=True)
class JointXY:
    """Joint distribution p(x, y): rows index the source x, columns the observation y."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = _prob_array(self.matrix, 2)
        total = arr.sum()
        if abs(total - 1.0) > SUM_SLACK:
            raise ValueError(f"joint sums to {total!r}, outside the {SUM_SLACK} slack")
        if abs(total - 1.0) > NORM_SKIP:
            arr = arr / total
        object.__setattr__(self, "matrix", _frozen(arr))

    @classmethod
    def from_channel(cls, prior: Pmf, transition: ConditionalDist) -> "JointXY":
        if len(prior) != transition.num_conditions:
            raise ValueError("prior length does not match number of channel inputs")
        return cls(prior.probs[:, None] * transition.rows)

    @property
    def num_x(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_y(self) -> int:
        return self.matrix.shape[1]

    def x_marginal(self) -> Pmf:
        return Pmf(self.matrix.sum(axis=1))

    def y_marginal(self) -> Pmf:
        return Pmf(self.matrix.sum(axis=0))

    def posterior_x_given_y(self) -> ConditionalDist:
        """p(x|y) as rows indexed by y.  Zero-mass y rows fall back to uniform."""
        return ConditionalDist(_posterior_rows(self.matrix.T))

    def conditional_y_given_x(self) -> ConditionalDist:
        return ConditionalDist(_posterior_rows(self.matrix))


def _posterior_rows(weighted: np.ndarray) -> np.ndarray:
    totals = weighted.sum(axis=1)
    rows = np.empty_like(weighted)
    alive = totals > 0
    rows[alive] = weighted[alive] / totals[alive, None]
    rows[~alive] = 1.0 / weighted.shape[1]
    return rows


def _mapping_rows(quantizer) -> np.ndarray:
    """Accept a Quantizer, a ConditionalDist, or a raw row-stochastic array."""
    if hasattr(quantizer, "mapping"):
        quantizer = quantizer.mapping
    if isinstance(quantizer, ConditionalDist):
        return quantizer.rows
    return ConditionalDist(quantizer).rows


def entropy(p: Pmf) -> float:
    """Shannon entropy of p in bits."""
    return max(0.0, float(-xlogy(p.probs, p.probs).sum() / LN2))


def kl_divergence(p: Pmf, q: Pmf) -> float:
    """D(p || q) in bits; +inf when q lacks mass somewhere p has it."""
    if len(p) != len(q):
        raise ValueError(f"alphabet mismatch: {len(p)} vs {len(q)}")
    pv, qv = p.probs, q.probs
    support = pv > ZERO_EPS
    if np.any(qv[support] <= ZERO_EPS):
        return float("inf")
    ps = pv[support]
    qs = qv[support]
    return max(0.0, float(np.sum(ps * (np.log(ps) - np.log(qs))) / LN2))


def mutual_information(j: JointXY) -> float:
    """I(x; y) of the joint, in bits."""
    m = j.matrix
    with np.errstate(divide="ignore"):
        log_px = np.log(m.sum(axis=1))
        log_py = np.log(m.sum(axis=0))
    xi, yi = np.nonzero(m > 0)   # marginal logs are finite wherever m > 0
    vals = m[xi, yi]
    total = float(np.sum(vals * (np.log(vals) - log_px[xi] - log_py[yi])))
    return max(0.0, total / LN2)


def push_through_quantizer(j: JointXY, quantizer) -> JointXY:
    """Joint p(x, z) after mapping the observation through p(z|y)."""
    rows = _mapping_rows(quantizer)
    if rows.shape[0] != j.num_y:
        raise ValueError(
            f"quantizer input alphabet {rows.shape[0]} does not match |Y| = {j.num_y}"
        )
    return JointXY(j.matrix @ rows)


def avg_kl_distortion(j: JointXY, quantizer) -> float:
    """Expected KL divergence between observation and cluster posteriors, in bits.

    Cluster posteriors p(x|z) are induced by the quantizer; the expectation runs
    over the joint p(y, z).  Equals I(X;Y) - I(X;Z) for any quantizer.
    """
    rows = _mapping_rows(quantizer)
    if rows.shape[0] != j.num_y:
        raise ValueError(
            f"quantizer input alphabet {rows.shape[0]} does not match |Y| = {j.num_y}"
        )
    m = j.matrix
    py = m.sum(axis=0)
    pyz = py[:, None] * rows
    post_y = _posterior_rows(m.T)             # (Y, X)
    post_z = _posterior_rows((m @ rows).T)    # (Z, X)

    # D[y, z] = sum_x p(x|y) log2( p(x|y) / p(x|z) ).  Where p(y,z) > 0 the
    # cluster posterior dominates the member posterior, so the masked logs
    # below are only ever wrong at positions that get weight zero.
    self_term = xlogy(post_y, post_y).sum(axis=1)
    log_post_z = np.where(post_z > 0, np.log(np.where(post_z > 0, post_z, 1.0)), 0.0)
    cross = post_y @ log_post_z.T
    dist = (self_term[:, None] - cross) / LN2
    return max(0.0, float(np.sum(np.where(pyz > 0, pyz * dist, 0.0))))
