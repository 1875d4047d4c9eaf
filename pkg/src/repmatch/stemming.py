"""Light-weight German suffix stemmer.

Follows the snowball German algorithm's structure (R1/R2 regions, three
suffix-removal steps) closely enough for retrieval purposes. Deterministic
and dependency-free; exact snowball output is not a contract anywhere in
this package.
"""
from __future__ import annotations

_VOWELS = set("aeiouyäöü")
_S_ENDING = set("bdfghklmnrt")
_ST_ENDING = _S_ENDING - {"r"}


def _region(word: str, start: int) -> int:
    """First position after a vowel-followed-by-consonant, searching from start."""
    for i in range(start, len(word) - 1):
        if word[i] in _VOWELS and word[i + 1] not in _VOWELS:
            return i + 2
    return len(word)


def stem_german(word: str) -> str:
    word = word.lower().replace("ß", "ss")
    if len(word) <= 3:
        return word

    r1 = _region(word, 0)
    r1 = max(r1, 3)  # snowball: R1 starts no earlier than position 3
    r2 = _region(word, r1)

    def in_r1(pos):
        return pos >= r1

    def in_r2(pos):
        return pos >= r2

    # step 1: noun/verb inflection suffixes
    for suf in ("ern", "em", "er", "en", "es", "e"):
        if word.endswith(suf) and in_r1(len(word) - len(suf)):
            word = word[: -len(suf)]
            break
    else:
        if word.endswith("s") and in_r1(len(word) - 1) and len(word) >= 2 \
                and word[-2] in _S_ENDING:
            word = word[:-1]

    # step 2: comparative / superlative
    for suf in ("est", "er", "en"):
        if word.endswith(suf) and in_r1(len(word) - len(suf)):
            word = word[: -len(suf)]
            break
    else:
        if word.endswith("st") and in_r1(len(word) - 2) and len(word) >= 6 \
                and word[-3] in _ST_ENDING:
            word = word[:-2]

    # step 3: derivational suffixes
    for suf in ("isch", "lich", "heit", "keit", "end", "ung", "ik", "ig"):
        if word.endswith(suf) and in_r2(len(word) - len(suf)):
            word = word[: -len(suf)]
            break

    return word.replace("ä", "a").replace("ö", "o").replace("ü", "u")


def strip_common_suffixes(word: str) -> str:
    """Crude language-neutral fallback: drop one frequent inflection suffix."""
    for suf in ("ungen", "ung", "en", "er", "es", "e", "s"):
        if len(word) > len(suf) + 3 and word.endswith(suf):
            return word[: -len(suf)]
    return word
