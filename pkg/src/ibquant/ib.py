"""Quantizer design trading compression rate I(y;z) against relevant information I(x;z).

Implements the iterative information-bottleneck fixed-point algorithm, greedy
agglomerative merging, a KL-means / rate-penalized Lloyd iteration, and a
dynamic-programming quantizer that is globally optimal for binary sources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .info import (
    LN2,
    ConditionalDist,
    JointXY,
    Pmf,
    _mapping_rows,
    mutual_information,
    push_through_quantizer,
)

DETERMINISTIC_EPS = 1e-12
DEAD_CLUSTER_EPS = 1e-12

# Extra stop criterion for the fixed-point iteration: the objective is flat
# near a stationary mapping (changes ~ residual^2), so a pure objective
# threshold would leave the mapping residual near sqrt(tol).
MAPPING_TOL = 1e-9


@dataclass(frozen=True)
class Quantizer:
    """Mapping from an observation alphabet to a cluster alphabet, p(z|y)."""

    mapping: ConditionalDist
    deterministic: bool = field(init=False)

    def __post_init__(self):
        det = bool(np.all(self.mapping.rows.max(axis=1) >= 1.0 - DETERMINISTIC_EPS))
        object.__setattr__(self, "deterministic", det)

    @property
    def num_inputs(self) -> int:
        return self.mapping.num_conditions

    @property
    def num_clusters(self) -> int:
        return self.mapping.alphabet_size

    @property
    def labels(self) -> np.ndarray:
        """Hard cluster label per input symbol (argmax row entry)."""
        return np.argmax(self.mapping.rows, axis=1)

    @classmethod
    def identity(cls, size: int) -> "Quantizer":
        return cls(ConditionalDist.identity(size))

    @classmethod
    def single_cluster(cls, num_inputs: int) -> "Quantizer":
        return cls(ConditionalDist(np.ones((num_inputs, 1))))

    @classmethod
    def from_labels(cls, labels, num_clusters: int) -> "Quantizer":
        labels = np.asarray(labels, dtype=int)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if np.any(labels < 0) or np.any(labels >= num_clusters):
            raise ValueError("label out of range")
        rows = np.zeros((labels.shape[0], num_clusters))
        rows[np.arange(labels.shape[0]), labels] = 1.0
        return cls(ConditionalDist(rows))

    @classmethod
    def random_stochastic(cls, num_inputs: int, num_clusters: int, rng) -> "Quantizer":
        raw = rng.uniform(size=(num_inputs, num_clusters))
        return cls(ConditionalDist(raw / raw.sum(axis=1, keepdims=True)))


@dataclass(frozen=True)
class IbDesign:
    """A designed quantizer together with its information-plane coordinates."""

    quantizer: Quantizer
    beta: float
    cluster_prior: Pmf
    cluster_posteriors: ConditionalDist
    compression_rate: float
    relevant_info: float
    objective: float
    info_loss: float

    @property
    def occupied_clusters(self) -> int:
        return int(np.sum(self.cluster_prior.probs > DEAD_CLUSTER_EPS))


def ib_objective(j: JointXY, quantizer, beta: float) -> float:
    """The Lagrangian [I(y;z) - beta * I(x;z)] / (beta + 1); -I(x;z) at beta = inf."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    pushed = push_through_quantizer(j, quantizer)
    relevant = mutual_information(pushed)
    if math.isinf(beta):
        return -relevant
    rows = _quantizer_rows(j, quantizer)
    compression = mutual_information(JointXY(j.matrix.sum(axis=0)[:, None] * rows))
    return (compression - beta * relevant) / (beta + 1.0)


def _quantizer_rows(j: JointXY, quantizer) -> np.ndarray:
    q = _mapping_rows(quantizer)
    if q.shape[0] != j.num_y:
        raise ValueError(f"quantizer input alphabet {q.shape[0]} does not match |Y| = {j.num_y}")
    return q


def design_from_quantizer(j: JointXY, quantizer: Quantizer, beta: float = math.inf) -> "IbDesign":
    """Evaluate a quantizer on a joint: marginals, posteriors, and information plane."""
    rows = _quantizer_rows(j, quantizer)
    py = j.matrix.sum(axis=0)
    pz = py @ rows
    pxz = j.matrix @ rows
    posts = np.empty((rows.shape[1], j.num_x))
    alive = pz > 0
    posts[alive] = (pxz[:, alive] / pz[alive]).T
    posts[~alive] = 1.0 / j.num_x
    compression = mutual_information(JointXY(py[:, None] * rows))
    relevant = mutual_information(JointXY(pxz))
    if math.isinf(beta):
        objective = -relevant
    else:
        objective = (compression - beta * relevant) / (beta + 1.0)
    return IbDesign(
        quantizer=quantizer,
        beta=beta,
        cluster_prior=Pmf(pz),
        cluster_posteriors=ConditionalDist(posts),
        compression_rate=compression,
        relevant_info=relevant,
        objective=objective,
        info_loss=mutual_information(j) - relevant,
    )


@dataclass(frozen=True)
class ItIbState:
    """State of the fixed-point iteration after one full update sweep."""

    mapping: ConditionalDist
    cluster_prior: Pmf
    cluster_posteriors: ConditionalDist
    row_normalizers: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.row_normalizers, dtype=float)
        psi.setflags(write=False)
        object.__setattr__(self, "row_normalizers", psi)


def it_ib_update(j: JointXY, quantizer, beta: float) -> ItIbState:
    """One stationary-condition sweep from the given mapping.

    Recomputes the cluster prior and posteriors induced by the mapping, then
    the mapping itself; the returned row normalizers are the per-observation
    partition functions that make each updated row a distribution.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    rows = _quantizer_rows(j, quantizer)
    m = j.matrix
    py = m.sum(axis=0)
    pz = py @ rows
    pxz = m @ rows
    cposts = np.full((rows.shape[1], j.num_x), 1.0 / j.num_x)
    alive = pz >= DEAD_CLUSTER_EPS
    cposts[alive] = (pxz[:, alive] / pz[alive]).T
    posts = _posterior_of(m)
    dist = _kl_matrix_nats(posts, cposts)
    mapping, psi = _stationary_mapping(pz, dist, beta, with_normalizers=True)
    return ItIbState(ConditionalDist(mapping), Pmf(pz), ConditionalDist(cposts), psi)


def _posterior_of(m: np.ndarray) -> np.ndarray:
    py = m.sum(axis=0)
    return np.where(py[None, :] > 0, m / np.where(py > 0, py, 1.0),
                    1.0 / m.shape[0]).T


def _kl_matrix_nats(posts: np.ndarray, cposts: np.ndarray) -> np.ndarray:
    """Pairwise D(posts_row || cposts_row) in nats; +inf where support is violated."""
    self_term = xlogy(posts, posts).sum(axis=1)
    with np.errstate(divide="ignore"):
        log_c = np.log(cposts)
    # posts @ log_c.T is only valid where no (p > 0, c == 0) pairing occurs;
    # -inf entries in log_c flag those columns per cluster.
    finite_cols = np.isfinite(log_c)
    safe_log_c = np.where(finite_cols, log_c, 0.0)
    cross_vals = posts @ safe_log_c.T
    violation = (posts > 0).astype(float) @ (~finite_cols).T.astype(float)
    cross = np.where(violation > 0, -np.inf, cross_vals)
    return self_term[:, None] - cross


def _stationary_mapping(pz: np.ndarray, dist_nats: np.ndarray, beta: float,
                        with_normalizers: bool = False):
    """One stationary-condition update: rows proportional to p(z) exp(-beta D)."""
    penalty = np.zeros_like(dist_nats) if beta == 0 else beta * dist_nats
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.log(pz)[None, :] - penalty
    logw = np.where(np.isnan(logw), -np.inf, logw)
    shift = logw.max(axis=1, keepdims=True)
    w = np.exp(logw - shift)
    totals = w.sum(axis=1, keepdims=True)
    if with_normalizers:
        return w / totals, (totals * np.exp(shift))[:, 0]
    return w / totals


def iterative_ib(j: JointXY, num_clusters: int, beta: float,
                 init=None, max_sweeps: int = 500, tol: float = 1e-10,
                 objective_trace: list | None = None) -> IbDesign:
    """Iterative information-bottleneck fixed point for a given beta.

    Alternates the stationary mapping update p(z|y) ~ p(z) exp(-beta D(p(x|y)||p(x|z)))
    with recomputation of the cluster prior and posteriors until the Lagrangian
    stops decreasing.  ``init`` may be a Quantizer or anything accepted by
    numpy's default_rng to seed a random row-stochastic start.  Observation
    symbols with zero marginal probability are dropped before iterating.
    """
    if num_clusters < 1:
        raise ValueError("need at least one cluster")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    m = j.matrix
    py_full = m.sum(axis=0)
    keep = py_full > 0
    if not np.any(keep):
        raise ValueError("joint has no observation mass")
    sub = m[:, keep]
    py = py_full[keep]
    posts = (sub / py).T  # p(x|y), rows y

    if isinstance(init, Quantizer):
        if init.num_inputs != j.num_y or init.num_clusters != num_clusters:
            raise ValueError("init quantizer shape mismatch")
        mapping = init.mapping.rows[keep].copy()
    else:
        rng = np.random.default_rng(0 if init is None else init)
        raw = rng.uniform(size=(py.shape[0], num_clusters))
        mapping = raw / raw.sum(axis=1, keepdims=True)

    cposts = np.full((num_clusters, j.num_x), 1.0 / j.num_x)
    prev_obj = None
    for _ in range(max_sweeps):
        pz = py @ mapping
        pxz = sub @ mapping
        alive = pz >= DEAD_CLUSTER_EPS
        # Dead clusters keep their last valid posterior instead of dividing by ~0.
        cposts[alive] = (pxz[:, alive] / pz[alive]).T

        dist = _kl_matrix_nats(posts, cposts)
        new_mapping = _stationary_mapping(pz, dist, beta)
        change = float(np.abs(new_mapping - mapping).max())
        mapping = new_mapping

        obj = _subjoint_objective(sub, py, mapping, beta)
        if objective_trace is not None:
            objective_trace.append(obj)
        if prev_obj is not None and prev_obj - obj < tol and change < MAPPING_TOL:
            break
        prev_obj = obj

    full = np.empty((j.num_y, num_clusters))
    full[keep] = mapping
    full[~keep] = 1.0 / num_clusters
    return design_from_quantizer(j, Quantizer(ConditionalDist(full)), beta)


def _subjoint_objective(sub: np.ndarray, py: np.ndarray, mapping: np.ndarray,
                        beta: float) -> float:
    compression = mutual_information(JointXY(py[:, None] * mapping))
    relevant = mutual_information(JointXY(sub @ mapping))
    return (compression - beta * relevant) / (beta + 1.0)


def fixed_point_residual(j: JointXY, quantizer: Quantizer, beta: float) -> float:
    """Max row-wise deviation between a mapping and its stationary recomputation."""
    rows = _quantizer_rows(j, quantizer)
    m = j.matrix
    py = m.sum(axis=0)
    keep = py > 0
    sub = m[:, keep]
    pyk = py[keep]
    mapping = rows[keep]
    posts = (sub / pyk).T
    pz = pyk @ mapping
    pxz = sub @ mapping
    cposts = np.full((mapping.shape[1], j.num_x), 1.0 / j.num_x)
    alive = pz >= DEAD_CLUSTER_EPS
    cposts[alive] = (pxz[:, alive] / pz[alive]).T
    dist = _kl_matrix_nats(posts, cposts)
    recomputed = _stationary_mapping(pz, dist, beta)
    return float(np.abs(recomputed - mapping).max())


def _merge_cost(weights: np.ndarray, posts: np.ndarray) -> np.ndarray:
    """Exact increase of the information loss for merging each cluster pair.

    Merging clusters i and j replaces both posteriors by their weighted
    mixture; the drop in I(x;z) is w_i D(p_i||mix) + w_j D(p_j||mix).
    """
    k = weights.shape[0]
    wi = weights[:, None, None]
    wj = weights[None, :, None]
    pi = posts[:, None, :]
    pj = posts[None, :, :]
    tot = wi + wj
    with np.errstate(divide="ignore", invalid="ignore"):
        mix = np.where(tot > 0, (wi * pi + wj * pj) / np.where(tot > 0, tot, 1.0), 0.0)
        log_mix = np.where(mix > 0, np.log(np.where(mix > 0, mix, 1.0)), 0.0)
        term_i = xlogy(pi, pi) - pi * log_mix
        term_j = xlogy(pj, pj) - pj * log_mix
    cost = (wi[..., 0] * term_i.sum(axis=2) + wj[..., 0] * term_j.sum(axis=2)) / LN2
    cost[np.arange(k), np.arange(k)] = np.inf
    return np.maximum(cost, 0.0)


def agglomerative_ib(j: JointXY, num_clusters: int) -> IbDesign:
    """Greedy pairwise merging from the identity partition down to n clusters.

    Deterministic and initialization-free: each step merges the pair whose
    merge least increases the information loss, ties resolved toward the
    lexicographically smallest pair.
    """
    if num_clusters < 1:
        raise ValueError("need at least one cluster")
    if num_clusters > j.num_y:
        raise ValueError(f"cannot use {num_clusters} clusters for {j.num_y} symbols")
    m = j.matrix
    py = m.sum(axis=0)
    posts = np.where(py[None, :] > 0, m / np.where(py > 0, py, 1.0), 1.0 / j.num_x).T

    weights = list(py.astype(float))
    cluster_posts = [posts[i].copy() for i in range(j.num_y)]
    members: list[list[int]] = [[i] for i in range(j.num_y)]

    while len(members) > num_clusters:
        w = np.array(weights)
        p = np.array(cluster_posts)
        cost = _merge_cost(w, p)
        flat = np.argmin(cost)
        a, b = divmod(int(flat), len(members))
        if a > b:
            a, b = b, a
        tot = weights[a] + weights[b]
        if tot > 0:
            mix = (weights[a] * cluster_posts[a] + weights[b] * cluster_posts[b]) / tot
        else:
            mix = 0.5 * (cluster_posts[a] + cluster_posts[b])
        weights[a] = tot
        cluster_posts[a] = mix
        members[a] = members[a] + members[b]
        del weights[b], cluster_posts[b], members[b]

    order = sorted(range(len(members)), key=lambda c: min(members[c]))
    labels = np.empty(j.num_y, dtype=int)
    for new_label, c in enumerate(order):
        labels[members[c]] = new_label
    quantizer = Quantizer.from_labels(labels, num_clusters)
    return design_from_quantizer(j, quantizer, math.inf)


def _kmeans_pp_seeds(posts: np.ndarray, py: np.ndarray, n: int, rng) -> np.ndarray:
    """KL-flavoured k-means++ seeding: spread initial centroids over the posteriors."""
    first = rng.choice(posts.shape[0], p=py / py.sum())
    chosen = [int(first)]
    dist = _kl_matrix_nats(posts, posts[[first]])[:, 0]
    dist = np.where(np.isfinite(dist), dist, 1e3)
    for _ in range(1, n):
        scores = py * np.maximum(dist, 0.0)
        total = scores.sum()
        if total <= 0:
            pick = int(rng.choice(posts.shape[0], p=py / py.sum()))
        else:
            pick = int(rng.choice(posts.shape[0], p=scores / total))
        chosen.append(pick)
        new_d = _kl_matrix_nats(posts, posts[[pick]])[:, 0]
        new_d = np.where(np.isfinite(new_d), new_d, 1e3)
        dist = np.minimum(dist, new_d)
    return posts[chosen].copy()


def kl_means_ib(j: JointXY, num_clusters: int, lam: float = 0.0,
                init=None, max_sweeps: int = 500, tol: float = 1e-10,
                objective_trace: list | None = None) -> IbDesign:
    """Rate-penalized Lloyd iteration with KL distortion.

    Alternates (a) cluster representatives = probability-weighted mixtures of
    member posteriors, (b) code lengths l(z) = -log2 p(z), and (c) assignment
    of each observation symbol to the cluster minimizing distortion + lam * length.
    An empty cluster is re-seeded with the worst-cost symbol, but only when the
    steal lowers the overall objective.  lam = 0 recovers pure KL-means.
    """
    if num_clusters < 1:
        raise ValueError("need at least one cluster")
    if lam < 0:
        raise ValueError("lam must be non-negative")
    m = j.matrix
    py_full = m.sum(axis=0)
    keep = py_full > 0
    sub = m[:, keep]
    py = py_full[keep]
    posts = (sub / py).T
    ny = posts.shape[0]
    n = min(num_clusters, ny)

    rng = np.random.default_rng(0 if init is None else init)
    centroids = _kmeans_pp_seeds(posts, py, n, rng)
    lengths = np.full(n, math.log2(n) if n > 1 else 0.0)

    def assign(cent, lens):
        cost = _kl_matrix_nats(posts, cent) / LN2
        if lam > 0:
            cost = cost + lam * lens[None, :]
        lbl = np.argmin(cost, axis=1)
        return lbl, cost[np.arange(ny), lbl]

    def refresh(lbl):
        cent = np.empty((n, posts.shape[1]))
        pz = np.zeros(n)
        for c in range(n):
            mask = lbl == c
            w = py[mask].sum()
            pz[c] = w
            if w > 0:
                cent[c] = (py[mask, None] * posts[mask]).sum(axis=0) / w
            else:
                cent[c] = 1.0 / posts.shape[1]
        with np.errstate(divide="ignore"):
            lens = np.where(pz > 0, -np.log2(np.where(pz > 0, pz, 1.0)), np.inf)
        return cent, pz, lens

    def objective(lbl, cent, lens):
        cost = _kl_matrix_nats(posts, cent) / LN2
        per = cost[np.arange(ny), lbl]
        if lam > 0:
            # labels only ever point at occupied clusters, where lengths are finite
            per = per + lam * lens[lbl]
        return float(np.sum(py * per))

    labels, _ = assign(centroids, lengths)
    for _ in range(max_sweeps):
        centroids, pz, lengths = refresh(labels)
        obj = objective(labels, centroids, lengths)

        new_labels, costs = assign(centroids, lengths)
        # Conditional empty-cluster repair: steal the worst-cost symbol only
        # if the refreshed configuration actually improves the objective.
        for c in range(n):
            if np.any(new_labels == c):
                continue
            worst = int(np.argmax(costs))
            trial = new_labels.copy()
            trial[worst] = c
            t_cent, _, t_lens = refresh(trial)
            if objective(trial, t_cent, t_lens) < obj - 1e-15:
                new_labels = trial
                _, costs = assign(t_cent, t_lens)

        if objective_trace is not None:
            objective_trace.append(obj)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

    full_labels = np.zeros(j.num_y, dtype=int)
    full_labels[keep] = labels
    if np.any(~keep):
        full_labels[~keep] = _nearest_positive_labels(keep, full_labels)
    quantizer = Quantizer.from_labels(full_labels, num_clusters)
    return design_from_quantizer(j, quantizer, math.inf)


def _nearest_positive_labels(keep: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Labels for zero-mass symbols: copy the nearest kept index, ties low."""
    kept_idx = np.flatnonzero(keep)
    missing = np.flatnonzero(~keep)
    out = np.empty(missing.shape[0], dtype=int)
    for k, i in enumerate(missing):
        dist = np.abs(kept_idx - i)
        out[k] = labels[kept_idx[np.argmin(dist)]]
    return out


def dp_contiguous_partition(j: JointXY, num_clusters: int,
                            order: np.ndarray) -> tuple[np.ndarray, float]:
    """Best contiguous partition (in the given symbol order) maximizing I(x;z).

    Works for any source alphabet: the retained information decomposes
    additively over clusters, so dynamic programming over boundary placements
    is exact within the contiguous family.  Returns (labels over the ordered
    symbols, I(x;z) in bits).  Empty blocks are allowed, so the result uses at
    most ``num_clusters`` labels.
    """
    m = j.matrix[:, order]
    nx, ny = m.shape
    px = j.matrix.sum(axis=1)
    prefix = np.zeros((nx, ny + 1))
    np.cumsum(m, axis=1, out=prefix[:, 1:])

    # Block merit g[a, b] = contribution of cluster {a..b-1} to I(x;z).
    w = prefix[:, None, :] - prefix[:, :, None]          # (x, a, b)
    w = np.maximum(w, 0.0)
    tot = w.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = px[:, None, None] * tot[None, :, :]
        ratio = np.where((w > 0) & (denom > 0), w / np.where(denom > 0, denom, 1.0), 1.0)
        merit = np.sum(w * np.log(ratio), axis=0) / LN2
    merit = np.where(np.isfinite(merit), merit, 0.0)

    score = np.full((num_clusters + 1, ny + 1), -np.inf)
    score[0, 0] = 0.0
    parent = np.zeros((num_clusters + 1, ny + 1), dtype=int)
    upper = np.triu(np.ones((ny + 1, ny + 1), dtype=bool))  # blocks need a <= b
    for k in range(1, num_clusters + 1):
        cand = np.where(upper, score[k - 1][:, None] + merit, -np.inf)
        parent[k] = np.argmax(cand, axis=0)
        score[k] = cand[parent[k], np.arange(ny + 1)]

    labels = np.empty(ny, dtype=int)
    b = ny
    for k in range(num_clusters, 0, -1):
        a = parent[k, b]
        labels[a:b] = k - 1
        b = a
    # Renumber so labels appear in block order starting at 0.
    used = np.unique(labels)
    remap = {int(u): i for i, u in enumerate(sorted(used))}
    labels = np.array([remap[int(v)] for v in labels])
    return labels, float(score[num_clusters, ny])


def _antisymmetric_pairing(m: np.ndarray) -> np.ndarray | None:
    """Partner index per symbol such that column(partner) = swap(column), or None.

    Detection is exact: swapped columns must match bit for bit, which holds for
    channels and node joints built from mirror-symmetric inputs.
    """
    ny = m.shape[1]
    groups: dict[tuple[float, float], list[int]] = {}
    for y in range(ny):
        groups.setdefault((float(m[0, y]), float(m[1, y])), []).append(y)
    partner = np.full(ny, -1, dtype=int)
    for (u, v), members in groups.items():
        if u == v:
            # zero-LLR symbols pair up internally; an odd count cannot mirror
            if len(members) % 2 != 0:
                return None
            for a, b in zip(members, reversed(members)):
                partner[a] = b
            continue
        mates = groups.get((v, u))
        if mates is None or len(mates) != len(members):
            return None
        for a, b in zip(members, mates):
            partner[a] = b
    return partner


def _symmetric_dp_labels(m: np.ndarray, num_clusters: int,
                         partner: np.ndarray) -> np.ndarray:
    """Mirror-symmetric contiguous quantizer for an antisymmetric instance.

    One representative per symbol pair (the member with non-negative LLR) is
    partitioned contiguously in LLR order into num_clusters/2 blocks; partners
    receive the mirrored label.  The retained information is additive over
    block pairs, so the same dynamic program applies.
    """
    ny = m.shape[1]
    half = num_clusters // 2
    reps = []
    for y in range(ny):
        p = int(partner[y])
        if y > p or (y == p):
            continue
        reps.append(y if m[0, y] >= m[1, y] else p)
    reps = np.array(reps, dtype=int)
    w0 = m[0, reps]
    w1 = m[1, reps]
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log(w0) - np.log(w1)
    llr = np.where(np.isnan(llr), 0.0, llr)
    order = np.argsort(-llr, kind="stable")
    nrep = order.shape[0]
    s0 = np.zeros(nrep + 1)
    s1 = np.zeros(nrep + 1)
    np.cumsum(w0[order], out=s0[1:])
    np.cumsum(w1[order], out=s1[1:])

    # Paired-block merit: a block at label k mirrors into label K-1-k with the
    # component masses swapped, so each block contributes u log2(2u/(u+v)) +
    # v log2(2v/(u+v)) twice with the roles of u and v exchanged.
    u = np.maximum(s0[None, :] - s0[:, None], 0.0)
    v = np.maximum(s1[None, :] - s1[:, None], 0.0)
    tot = u + v
    with np.errstate(divide="ignore", invalid="ignore"):
        safe = np.where(tot > 0, tot, 1.0)
        term_u = np.where(u > 0, u * np.log2(np.where(u > 0, 2.0 * u / safe, 1.0)), 0.0)
        term_v = np.where(v > 0, v * np.log2(np.where(v > 0, 2.0 * v / safe, 1.0)), 0.0)
    merit = 2.0 * (term_u + term_v)

    score = np.full((half + 1, nrep + 1), -np.inf)
    score[0, 0] = 0.0
    parent = np.zeros((half + 1, nrep + 1), dtype=int)
    upper = np.triu(np.ones((nrep + 1, nrep + 1), dtype=bool))
    for k in range(1, half + 1):
        cand = np.where(upper, score[k - 1][:, None] + merit, -np.inf)
        parent[k] = np.argmax(cand, axis=0)
        score[k] = cand[parent[k], np.arange(nrep + 1)]

    rep_labels = np.empty(nrep, dtype=int)
    b = nrep
    for k in range(half, 0, -1):
        a = parent[k, b]
        rep_labels[a:b] = k - 1
        b = a
    labels = np.empty(ny, dtype=int)
    for pos, rep in enumerate(reps[order]):
        labels[rep] = rep_labels[pos]
        labels[partner[rep]] = num_clusters - 1 - rep_labels[pos]
    return labels


def dp_optimal_quantizer(j: JointXY, num_clusters: int,
                         symmetric: bool | None = None) -> IbDesign:
    """Globally optimal deterministic quantizer for a binary source.

    Sorts observation symbols by posterior log-likelihood ratio (descending)
    and places cluster boundaries by dynamic programming; for binary sources
    the optimum over all partitions is contiguous in that order.  Symbols with
    identical joint columns are merged beforehand (any optimal partition may
    keep them together), and zero-mass symbols adopt the label of their nearest
    positive-mass neighbour.

    ``symmetric`` controls the mirror-symmetric construction used for
    antisymmetric instances (output-symmetric channels and node joints): with
    the default None it is applied automatically whenever the instance is
    exactly antisymmetric and the cluster count is even, which makes the label
    map commute with the symbol-flip relabeling.
    """
    if j.num_x != 2:
        raise ValueError("the dynamic program requires a binary source alphabet")
    if num_clusters < 1:
        raise ValueError("need at least one cluster")
    m = j.matrix
    if symmetric or symmetric is None:
        partner = None
        if num_clusters % 2 == 0 and num_clusters > 1:
            partner = _antisymmetric_pairing(m)
        if partner is not None:
            labels = _symmetric_dp_labels(m, num_clusters, partner)
            quantizer = Quantizer.from_labels(labels, num_clusters)
            return design_from_quantizer(j, quantizer, math.inf)
        if symmetric:
            raise ValueError("symmetric construction needs an antisymmetric "
                             "instance and an even cluster count")
    mass = m.sum(axis=0)
    keep = mass > 0

    # Group exactly-identical columns; they always co-cluster, which also keeps
    # mirror-image outcomes of symmetric channels in the same cluster.
    groups: dict[tuple[float, float], int] = {}
    group_of = np.full(j.num_y, -1, dtype=int)
    for y in np.flatnonzero(keep):
        key = (float(m[0, y]), float(m[1, y]))
        if key not in groups:
            groups[key] = len(groups)
        group_of[y] = groups[key]
    merged = np.zeros((2, len(groups)))
    for y in np.flatnonzero(keep):
        merged[:, group_of[y]] += m[:, y]

    with np.errstate(divide="ignore"):
        llr = np.log(merged[0]) - np.log(merged[1])
    order = np.argsort(-llr, kind="stable")
    sub = JointXY(merged / merged.sum())
    ordered_labels, _ = dp_contiguous_partition(sub, num_clusters, order)
    group_labels = np.empty(len(groups), dtype=int)
    group_labels[order] = ordered_labels

    labels = np.zeros(j.num_y, dtype=int)
    labels[keep] = group_labels[group_of[keep]]
    if np.any(~keep):
        labels[~keep] = _nearest_positive_labels(keep, labels)
    quantizer = Quantizer.from_labels(labels, num_clusters)
    return design_from_quantizer(j, quantizer, math.inf)


ALGORITHMS = ("it-ib", "agg-ib", "kl-means", "dp")


@dataclass(frozen=True)
class CurvePoint:
    n: int
    info_loss: float
    compression_rate: float
    objective: float
    design: IbDesign


def _restart_rng(seed: int, n_index: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, n_index, restart)))


def ib_curve(j: JointXY, algorithm: str, n_values, beta: float = 400.0,
             lam: float = 0.0, restarts: int = 100, seed: int = 0) -> list[CurvePoint]:
    """Best-of-restarts designs for each allowed cluster count.

    Deterministic algorithms (agg-ib, dp) run once per n; the stochastic ones
    take the lowest-information-loss design over ``restarts`` independent,
    seeded initializations.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if not n_values:
        raise ValueError("n_values must be non-empty")
    points = []
    for idx, n in enumerate(n_values):
        if n < 1:
            raise ValueError("cluster counts must be >= 1")
        if algorithm == "agg-ib":
            best = agglomerative_ib(j, n)
        elif algorithm == "dp":
            best = dp_optimal_quantizer(j, n)
        else:
            best = None
            for r in range(max(1, restarts)):
                rng = _restart_rng(seed, idx, r)
                if algorithm == "it-ib":
                    cand = iterative_ib(j, n, beta, init=rng)
                else:
                    cand = kl_means_ib(j, n, lam=lam, init=rng)
                if best is None or cand.info_loss < best.info_loss:
                    best = cand
        points.append(CurvePoint(n, best.info_loss, best.compression_rate,
                                 best.objective, best))
    return points


def write_curve_csv(path, points: list[CurvePoint], algorithm: str, beta: float,
                    restarts: int, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("algorithm,beta,n,restarts,info_loss_bits,compression_rate_bits,objective")
    for p in points:
        lines.append(
            f"{algorithm},{beta:.17g},{p.n},{restarts},"
            f"{p.info_loss:.17g},{p.compression_rate:.17g},{p.objective:.17g}"
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
