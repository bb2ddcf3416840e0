"""Figures of merit and challenge screening.

Three population statistics summarize how well a device population behaves
as a fingerprint source:

* uniqueness: mean pairwise inter-device Hamming distance, ideally 50%,
* reliability: mean pairwise intra-device Hamming distance across repeated
  noisy reads, ideally 0%,
* randomness: fraction of 1-bits in a response, ideally 50%.

Screening applies the enrollment filter: a challenge is kept only when its
noiseless response is reasonably balanced and repeated noisy reads stay
within a small Hamming distance of that noiseless reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .puf import Challenge, PufDevice, Response, evaluate, reference_response


@dataclass(frozen=True)
class ScreeningPolicy:
    """Acceptance rules applied to each candidate challenge at enrollment."""

    randomness_band: tuple[float, float] = (45.0, 55.0)
    max_unreliable_bits: int = 3
    n_screen_reevals: int = 11

    def __post_init__(self) -> None:
        low, high = self.randomness_band
        if not (0.0 <= low < high <= 100.0):
            raise ConfigError(f"randomness_band must satisfy 0 <= low < high <= 100: {self.randomness_band}")
        if self.max_unreliable_bits < 0:
            raise ConfigError(f"max_unreliable_bits must be >= 0, got {self.max_unreliable_bits}")
        if self.n_screen_reevals < 1:
            raise ConfigError(f"n_screen_reevals must be >= 1, got {self.n_screen_reevals}")


@dataclass(frozen=True)
class ScreeningResult:
    """Outcome of screening one challenge against one device."""

    accepted: bool
    reason: Optional[str]  # None when accepted, else "randomness" or "stability"
    randomness_pct: float
    worst_mismatch_bits: int
    reference: Response


@dataclass(frozen=True)
class FomReport:
    """Flat summary of the three figures of merit for one measurement run."""

    uniqueness_pct: float
    reliability_pct: float
    randomness_pct: float
    n_devices: int
    n_challenges: int
    n_reevaluations: int
    correlation_abs_mean: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "uniqueness_pct": self.uniqueness_pct,
            "reliability_pct": self.reliability_pct,
            "randomness_pct": self.randomness_pct,
            "n_devices": self.n_devices,
            "n_challenges": self.n_challenges,
            "n_reevaluations": self.n_reevaluations,
        }
        if self.correlation_abs_mean is not None:
            out["correlation_abs_mean"] = self.correlation_abs_mean
        return out


def _response_matrix(responses_by_device: Sequence[Sequence[Response]]) -> np.ndarray:
    if len(responses_by_device) < 2:
        raise ValueError("uniqueness needs at least two devices")
    n_challenges = len(responses_by_device[0])
    if n_challenges == 0:
        raise ValueError("uniqueness needs at least one challenge per device")
    n_bits = responses_by_device[0][0].n_bits
    rows = []
    for device_responses in responses_by_device:
        if len(device_responses) != n_challenges:
            raise ValueError("every device must supply the same number of responses")
        for resp in device_responses:
            if resp.n_bits != n_bits:
                raise ValueError("all responses must have the same bit width")
        rows.append(np.stack([resp.bits for resp in device_responses]))
    return np.stack(rows)  # shape (devices, challenges, bits)


def uniqueness(responses_by_device: Sequence[Sequence[Response]]) -> float:
    """Mean pairwise inter-device Hamming distance, as a percentage of bits.

    Averages over all unordered device pairs and all challenges; every pair
    and challenge gets equal weight.
    """
    mat = _response_matrix(responses_by_device)
    n_devices = mat.shape[0]
    total = 0.0
    n_pairs = 0
    for a in range(n_devices):
        for b in range(a + 1, n_devices):
            total += float((mat[a] != mat[b]).mean())
            n_pairs += 1
    return 100.0 * total / n_pairs


def reliability(device: PufDevice, challenge: Challenge, n_reevals: int, seeds: Sequence[int]) -> float:
    """Mean pairwise Hamming distance among repeated noisy reads, in percent."""
    if n_reevals < 2:
        raise ValueError(f"n_reevals must be >= 2, got {n_reevals}")
    if len(seeds) < n_reevals:
        raise ValueError(f"need {n_reevals} seeds, got {len(seeds)}")
    reads = np.stack([evaluate(device, challenge, int(seeds[k])).bits for k in range(n_reevals)])
    total = 0
    n_pairs = 0
    for a in range(n_reevals):
        for b in range(a + 1, n_reevals):
            total += int((reads[a] != reads[b]).sum())
            n_pairs += 1
    return 100.0 * total / (n_pairs * challenge.n_bits)


def randomness(response: Response) -> float:
    """Percentage of 1-bits in the response."""
    return 100.0 * float(response.bits.mean())


def mean_abs_correlation(responses_by_device: Sequence[Sequence[Response]]) -> float:
    """Mean absolute pairwise bit correlation between devices.

    Each device's responses are flattened to one long ±1 vector; the value
    is the average |Pearson correlation| over unordered device pairs. Near
    zero for an ideal population.
    """
    mat = _response_matrix(responses_by_device)
    flat = mat.reshape(mat.shape[0], -1).astype(np.float64) * 2.0 - 1.0
    n_devices = flat.shape[0]
    vals = []
    for a in range(n_devices):
        for b in range(a + 1, n_devices):
            sa, sb = flat[a].std(), flat[b].std()
            if sa == 0.0 or sb == 0.0:
                continue  # constant response vector: correlation undefined
            cov = float(((flat[a] - flat[a].mean()) * (flat[b] - flat[b].mean())).mean())
            vals.append(abs(cov / (sa * sb)))
    return float(np.mean(vals)) if vals else 0.0


def screen_challenge(
    device: PufDevice,
    challenge: Challenge,
    policy: ScreeningPolicy,
    seeds: Sequence[int],
) -> ScreeningResult:
    """Decide whether a challenge is stable and balanced enough to enroll.

    The noiseless response is the stored reference; the challenge passes
    when that reference's randomness sits inside the policy band and each
    of n_screen_reevals noisy reads differs from the reference by at most
    max_unreliable_bits bits. Stops at the first failing read.
    """
    if len(seeds) < policy.n_screen_reevals:
        raise ValueError(f"need {policy.n_screen_reevals} seeds, got {len(seeds)}")
    ref = reference_response(device, challenge)
    rnd = randomness(ref)
    low, high = policy.randomness_band
    if not (low <= rnd <= high):
        return ScreeningResult(False, "randomness", rnd, 0, ref)
    worst = 0
    for k in range(policy.n_screen_reevals):
        mismatch = evaluate(device, challenge, int(seeds[k])).hamming(ref)
        worst = max(worst, mismatch)
        if mismatch > policy.max_unreliable_bits:
            return ScreeningResult(False, "stability", rnd, worst, ref)
    return ScreeningResult(True, None, rnd, worst, ref)
