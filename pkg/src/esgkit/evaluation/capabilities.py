"""Capability coverage over the question set.

Questions are tagged with capability ids 1..10 (numeric reasoning, policy
lookup, cross-document synthesis and so on); the distribution shows how a
question set exercises each capability per difficulty level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import BadCapabilityId

N_CAPABILITIES = 10


@dataclass
class CapabilityDistribution:
    # level -> frequency vector indexed by capability id - 1
    frequencies: dict[int, list[int]] = field(default_factory=dict)
    # level -> mean number of capability tags per question
    avg_capabilities: dict[int, float] = field(default_factory=dict)


def capability_distribution(tagged: list[tuple[int, list[int]]]) -> CapabilityDistribution:
    """``tagged`` pairs each question's level with its capability ids."""
    freq: dict[int, list[int]] = {}
    counts: dict[int, list[int]] = {}
    for level, caps in tagged:
        vec = freq.setdefault(level, [0] * N_CAPABILITIES)
        counts.setdefault(level, []).append(len(caps))
        for cap in caps:
            if not 1 <= cap <= N_CAPABILITIES:
                raise BadCapabilityId(f"capability id {cap} outside 1..{N_CAPABILITIES}")
            vec[cap - 1] += 1
    return CapabilityDistribution(
        frequencies=freq,
        avg_capabilities={
            level: sum(lens) / len(lens) for level, lens in counts.items()
        },
    )
