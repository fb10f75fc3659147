"""
Structural identifiability: combinatorial check on the design matrix.

Factor k is structurally identifiable iff the intersection of every factor
subset S ∋ k whose response set R_Q(S) is non-empty equals exactly {k}.
R_Q(S) is the set of items loading on exactly the factors in S.

Rules:
- Uses only the design matrix (no data, no estimates)
- Factor subsets are bitmasks over 0-based factor indices
- Empty intersection (no non-empty R_Q(S) with k ∈ S) means not identifiable
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from model.errors import FactorCountTooLarge, FactorIndexOutOfRange
from model.types import DesignMatrix

logger = logging.getLogger(__name__)

MAX_FACTORS = 20


def mask_to_set(mask: int) -> frozenset[int]:
    return frozenset(k for k in range(mask.bit_length()) if mask >> k & 1)


def set_to_mask(s) -> int:
    mask = 0
    for k in s:
        mask |= 1 << int(k)
    return mask


def _row_masks(q: DesignMatrix) -> np.ndarray:
    weights = 1 << np.arange(q.K, dtype=np.int64)
    return q.q.astype(np.int64) @ weights


def r_q(q: DesignMatrix, s) -> frozenset[int]:
    """Items j with q[j, k] = 1 for every k in s and q[j, k] = 0 for every k not in s."""
    target = set_to_mask(s)
    if target >> q.K:
        raise FactorIndexOutOfRange(f"subset {sorted(s)} has factors outside 0..{q.K - 1}")
    return frozenset(int(j) for j in np.flatnonzero(_row_masks(q) == target))


def _subsets_containing(k: int, n_factors: int):
    """Bitmasks of every subset containing k, by increasing popcount."""
    others = [b for b in range(n_factors) if b != k]
    by_size: list[list[int]] = [[] for _ in range(n_factors)]
    for bits in range(1 << len(others)):
        mask = 1 << k
        for pos, factor in enumerate(others):
            if bits >> pos & 1:
                mask |= 1 << factor
        by_size[bin(bits).count("1")].append(mask)
    for group in by_size:
        yield from sorted(group)


@dataclass(frozen=True)
class FactorVerdict:
    factor: int
    identifiable: bool
    intersection: Optional[frozenset[int]]
    certificate: tuple[frozenset[int], ...] = field(default_factory=tuple)


def _check_factor(k: int, q: DesignMatrix, present: set[int]) -> FactorVerdict:
    target = 1 << k
    intersection: Optional[int] = None
    used: list[int] = []
    for subset in _subsets_containing(k, q.K):
        if subset not in present:
            continue
        intersection = subset if intersection is None else intersection & subset
        used.append(subset)
        if intersection == target:
            break

    if intersection is None:
        return FactorVerdict(k, False, None)
    return FactorVerdict(
        factor=k,
        identifiable=intersection == target,
        intersection=mask_to_set(intersection),
        certificate=tuple(mask_to_set(m) for m in used),
    )


def factor_identifiable(q: DesignMatrix, k: int) -> bool:
    """True iff the intersection of all S ∋ k with non-empty R_Q(S) is exactly {k}."""
    if not 0 <= k < q.K:
        raise FactorIndexOutOfRange(f"factor {k} outside 0..{q.K - 1}")
    if q.K > MAX_FACTORS:
        raise FactorCountTooLarge(f"K={q.K} exceeds the enumeration limit {MAX_FACTORS}")
    present = set(int(m) for m in _row_masks(q))
    return _check_factor(k, q, present).identifiable


@dataclass(frozen=True)
class IdentifiabilityReport:
    """
    Per-factor verdicts with diagnostics.

    witness_sets maps each non-identifiable factor to its intersection set,
    or None when no non-empty R_Q(S) contains it.
    """

    per_factor: tuple[bool, ...]
    witness_sets: dict[int, Optional[frozenset[int]]]
    verdicts: tuple[FactorVerdict, ...]
    response_sets: dict[frozenset[int], frozenset[int]]

    @property
    def all_identifiable(self) -> bool:
        return all(self.per_factor)


def identifiability_report(q: DesignMatrix) -> IdentifiabilityReport:
    """Verdicts for every factor plus the non-empty R_Q(S) sets."""
    if q.K > MAX_FACTORS:
        raise FactorCountTooLarge(f"K={q.K} exceeds the enumeration limit {MAX_FACTORS}")

    masks = _row_masks(q)
    present = set(int(m) for m in masks)
    verdicts = tuple(_check_factor(k, q, present) for k in range(q.K))

    response_sets = {
        mask_to_set(m): frozenset(int(j) for j in np.flatnonzero(masks == m))
        for m in sorted(present, key=lambda m: (bin(m).count("1"), m))
    }
    witness = {v.factor: v.intersection for v in verdicts if not v.identifiable}

    report = IdentifiabilityReport(
        per_factor=tuple(v.identifiable for v in verdicts),
        witness_sets=witness,
        verdicts=verdicts,
        response_sets=response_sets,
    )

    logger.info(
        f"[Identifiability] J={q.J} K={q.K} "
        f"identifiable={sum(report.per_factor)}/{q.K} "
        f"non_empty_sets={len(response_sets)}"
    )
    return report
