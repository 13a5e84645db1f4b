"""Harassment category taxonomy: the five final classes, the nine pilot
classes, and the merge map between them."""
from __future__ import annotations

from enum import Enum, IntEnum


class Category(IntEnum):
    """Final five-way labeling scheme (second labeling round)."""

    INDIRECT_HARASSMENT = 1
    INFORMATION_THREAT = 2
    SEXUAL_HARASSMENT = 3
    PHYSICAL_HARASSMENT = 4
    NOT_SEXIST = 5


class LegacyCategory(IntEnum):
    """Original nine-way pilot scheme (first labeling round)."""

    BENEVOLENT = 1
    PHYSICAL_THREATS = 2
    SEXUAL_THREATS = 3
    BODY_HARASSMENT = 4
    MASCULINE_HARASSMENT = 5
    LACK_OF_ATTRACTIVENESS = 6
    STALKING = 7
    IMPERSONATION = 8
    GENERAL_SEXIST = 9


class Gender(Enum):
    FEMALE = "female"
    MALE = "male"
    UNKNOWN = "unknown"


# How the nine pilot classes collapsed into the final five. Category 5
# (NOT_SEXIST) was introduced in the second round and has no preimage.
LEGACY_REMAP: dict[LegacyCategory, Category] = {
    LegacyCategory.BENEVOLENT: Category.INDIRECT_HARASSMENT,
    LegacyCategory.MASCULINE_HARASSMENT: Category.INDIRECT_HARASSMENT,
    LegacyCategory.STALKING: Category.INFORMATION_THREAT,
    LegacyCategory.IMPERSONATION: Category.INFORMATION_THREAT,
    LegacyCategory.SEXUAL_THREATS: Category.SEXUAL_HARASSMENT,
    LegacyCategory.GENERAL_SEXIST: Category.SEXUAL_HARASSMENT,
    LegacyCategory.PHYSICAL_THREATS: Category.PHYSICAL_HARASSMENT,
    LegacyCategory.BODY_HARASSMENT: Category.PHYSICAL_HARASSMENT,
    LegacyCategory.LACK_OF_ATTRACTIVENESS: Category.PHYSICAL_HARASSMENT,
}


def remap_legacy(legacy: LegacyCategory) -> Category:
    """Map a pilot category to its final category."""
    return LEGACY_REMAP[LegacyCategory(legacy)]
