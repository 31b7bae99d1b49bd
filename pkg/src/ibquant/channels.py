"""Discrete memoryless channel constructors.

Exact small channels (BSC) and clipped, uniformly binned AWGN channels with
ASK/BPSK inputs.  Tail mass beyond the clip range saturates into the outermost
bins, so every transition row sums to 1 by construction.  Bin masses come from
Gaussian CDF differences, not quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .info import ConditionalDist, JointXY, Pmf, mutual_information

LLR_CLAMP = 25.0


@dataclass(frozen=True)
class AwgnDiscretization:
    """Uniform binning of the clipped AWGN output range."""

    noise_std: float
    clip_multiplier: float
    num_bins: int
    bin_edges: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        if edges.shape != (self.num_bins + 1,):
            raise ValueError("bin_edges must have num_bins + 1 entries")
        edges.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)

    @classmethod
    def for_alphabet(cls, alphabet, noise_std: float, num_bins: int,
                     clip_multiplier: float = 3.0) -> "AwgnDiscretization":
        if noise_std <= 0:
            raise ValueError("noise_std must be positive")
        if num_bins < 2:
            raise ValueError("need at least 2 bins")
        amp = max(abs(float(x)) for x in alphabet) + clip_multiplier * noise_std
        edges = np.linspace(-amp, amp, num_bins + 1)
        return cls(noise_std, clip_multiplier, num_bins, edges)

    def bin_of(self, samples) -> np.ndarray:
        """Bin index of each (possibly out-of-range) real sample."""
        idx = np.searchsorted(self.bin_edges, np.asarray(samples), side="right") - 1
        return np.clip(idx, 0, self.num_bins - 1)

    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class DmcSpec:
    """A discrete memoryless channel: signal points, p(y|x), and input prior."""

    input_alphabet: np.ndarray
    transition: ConditionalDist
    input_prior: Pmf
    discretization: AwgnDiscretization | None = None

    def __post_init__(self):
        alphabet = np.asarray(self.input_alphabet, dtype=float)
        if alphabet.ndim != 1:
            raise ValueError("input_alphabet must be one-dimensional")
        if alphabet.shape[0] != self.transition.num_conditions:
            raise ValueError("alphabet size does not match transition rows")
        if len(self.input_prior) != alphabet.shape[0]:
            raise ValueError("prior size does not match alphabet")
        alphabet.setflags(write=False)
        object.__setattr__(self, "input_alphabet", alphabet)

    @property
    def num_inputs(self) -> int:
        return self.input_alphabet.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.transition.alphabet_size

    def joint(self) -> JointXY:
        return JointXY.from_channel(self.input_prior, self.transition)

    def input_output_information(self) -> float:
        return mutual_information(self.joint())


def _gaussian_bin_row(mean: float, sigma: float, edges: np.ndarray) -> np.ndarray:
    cdf = ndtr((edges - mean) / sigma)
    cdf[0] = 0.0       # saturate the lower tail into the first bin
    cdf[-1] = 1.0      # and the upper tail into the last bin
    return np.diff(cdf)


def _symmetric_awgn_rows(alphabet: np.ndarray, sigma: float,
                         edges: np.ndarray) -> np.ndarray:
    """Rows for a sign-symmetric alphabet; negative inputs mirror positive ones.

    Mirroring makes the output-symmetry property exact in floating point.
    """
    num_bins = edges.shape[0] - 1
    rows = np.empty((alphabet.shape[0], num_bins))
    by_value = {float(x): i for i, x in enumerate(alphabet)}
    for i, x in enumerate(alphabet):
        x = float(x)
        if x < 0 and -x in by_value:
            continue
        rows[i] = _gaussian_bin_row(x, sigma, edges)
    for i, x in enumerate(alphabet):
        x = float(x)
        if x < 0 and -x in by_value:
            rows[i] = rows[by_value[-x]][::-1]
    return rows


def build_ask_awgn(levels: int, noise_std: float, num_bins: int,
                   clip_multiplier: float = 3.0,
                   prior: Pmf | None = None) -> DmcSpec:
    """M-ASK over AWGN, clipped and uniformly discretized.

    The input alphabet is {+/-1, +/-3, ..., +/-(M-1)}; the output range is
    clipped at ``clip_multiplier * noise_std`` above the largest signal point.
    """
    if levels < 2 or levels % 2 != 0:
        raise ValueError("levels must be an even integer >= 2")
    if noise_std <= 0:
        raise ValueError("noise_std must be positive")
    if num_bins < 2:
        raise ValueError("num_bins must be >= 2")
    alphabet = np.arange(-(levels - 1), levels, 2, dtype=float)
    disc = AwgnDiscretization.for_alphabet(alphabet, noise_std, num_bins, clip_multiplier)
    rows = _symmetric_awgn_rows(alphabet, noise_std, disc.bin_edges)
    if prior is None:
        prior = Pmf.uniform(levels)
    elif len(prior) != levels:
        raise ValueError("prior size does not match the ASK alphabet")
    return DmcSpec(alphabet, ConditionalDist(rows), prior, disc)


def ebn0_db_to_noise_std(ebn0_db: float, code_rate: float) -> float:
    """Noise std for unit-energy antipodal signaling at the given Eb/N0."""
    if not 0.0 < code_rate <= 1.0:
        raise ValueError("code_rate must lie in (0, 1]")
    sigma2 = 1.0 / (2.0 * code_rate * 10.0 ** (ebn0_db / 10.0))
    return float(np.sqrt(sigma2))


def build_bpsk_awgn(ebn0_db: float, code_rate: float, num_bins: int,
                    clip_multiplier: float = 3.0) -> DmcSpec:
    """BPSK over AWGN at the given Eb/N0, clipped and uniformly discretized.

    Bit 0 maps to +1 (row 0), bit 1 to -1 (row 1); the -1 row is the exact
    reversal of the +1 row.
    """
    sigma = ebn0_db_to_noise_std(ebn0_db, code_rate)
    return build_bpsk_awgn_sigma(sigma, num_bins, clip_multiplier)


def build_bpsk_awgn_sigma(noise_std: float, num_bins: int,
                          clip_multiplier: float = 3.0) -> DmcSpec:
    """BPSK over AWGN specified by the noise standard deviation directly."""
    if noise_std <= 0:
        raise ValueError("noise_std must be positive")
    alphabet = np.array([1.0, -1.0])
    disc = AwgnDiscretization.for_alphabet(alphabet, noise_std, num_bins, clip_multiplier)
    rows = _symmetric_awgn_rows(alphabet, noise_std, disc.bin_edges)
    return DmcSpec(alphabet, ConditionalDist(rows), Pmf.uniform(2), disc)


def build_bsc(eps: float) -> DmcSpec:
    """Binary symmetric channel with crossover probability eps, uniform prior."""
    if not 0.0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 0.5]")
    rows = np.array([[1.0 - eps, eps], [eps, 1.0 - eps]])
    return DmcSpec(np.array([0.0, 1.0]), ConditionalDist(rows), Pmf.uniform(2))


def binary_llrs(dmc: DmcSpec, clamp: float = LLR_CLAMP) -> np.ndarray:
    """Per-bin natural-log LLR log p(y|bit 0) / p(y|bit 1) from the transition matrix."""
    if dmc.num_inputs != 2:
        raise ValueError("LLRs are defined for binary-input channels only")
    p0 = dmc.transition.rows[0]
    p1 = dmc.transition.rows[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log(p0) - np.log(p1)
    llr = np.where(np.isnan(llr), 0.0, llr)   # 0/0 bins carry no information
    return np.clip(llr, -clamp, clamp)


def save_dmc(dmc: DmcSpec, path, comment: str | None = None) -> None:
    """Plain-text matrix file: header, prior row, then one transition row per input."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("# alphabet " + " ".join(f"{x:.17g}" for x in dmc.input_alphabet))
    lines.append(f"dmc {dmc.num_inputs} {dmc.num_outputs}")
    lines.append(" ".join(f"{p:.17g}" for p in dmc.input_prior.probs))
    for row in dmc.transition.rows:
        lines.append(" ".join(f"{p:.17g}" for p in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dmc(path) -> DmcSpec:
    alphabet = None
    with open(path) as fh:
        lines = []
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# alphabet "):
                    alphabet = np.array([float(t) for t in line.split()[2:]])
                continue
            lines.append(line)
    tag, num_in, num_out = lines[0].split()
    if tag != "dmc":
        raise ValueError(f"not a dmc file: header {lines[0]!r}")
    num_in, num_out = int(num_in), int(num_out)
    prior = Pmf(np.array([float(t) for t in lines[1].split()]))
    rows = np.array([[float(t) for t in lines[2 + i].split()] for i in range(num_in)])
    if rows.shape != (num_in, num_out):
        raise ValueError("transition matrix shape does not match header")
    if alphabet is None or alphabet.shape[0] != num_in:
        alphabet = np.arange(num_in, dtype=float)
    return DmcSpec(alphabet, ConditionalDist(rows), prior)
