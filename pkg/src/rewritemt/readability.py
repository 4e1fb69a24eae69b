"""Readability indices with language-specific syllable heuristics.

English and German count maximal vowel groups (with silent-e handling in
English; German diphthongs au/ei/eu/aeu/ie merge into their group). Russian
counts vowel letters. All counters are dictionary-free and deterministic;
every index is a pure function of the extracted text statistics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EmptyText

_SENTENCE_END = re.compile(r"[.!?…]+(?=\s|$)")
_EN_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_DE_VOWEL_GROUP = re.compile(r"[aeiouäöü]+")
_RU_VOWELS = set("аеёиоуыэюя")

_STRIP_PUNCT = re.compile(r"^\W+|\W+$", re.UNICODE)


@dataclass(frozen=True)
class ReadabilityStats:
    sentences: int
    words: int
    syllables: int
    complex_words: int   # >= 3 syllables
    long_words: int      # > 6 letters
    monosyllables: int


def count_syllables(word: str, lang: str = "en") -> int:
    """Heuristic syllable count, always >= 1."""
    cleaned = _STRIP_PUNCT.sub("", word).lower()
    if not cleaned:
        return 1
    if lang == "ru":
        return max(1, sum(1 for ch in cleaned if ch in _RU_VOWELS))
    if lang == "de":
        return max(1, len(_DE_VOWEL_GROUP.findall(cleaned)))
    # English: vowel groups minus a trailing silent 'e', except consonant+"le".
    groups = len(_EN_VOWEL_GROUP.findall(cleaned))
    if cleaned.endswith("e") and not (
        len(cleaned) >= 3 and cleaned.endswith("le") and cleaned[-3] not in "aeiouy"
    ):
        groups -= 1
    return max(1, groups)


def split_sentences(text: str) -> list[str]:
    """Split on . ! ? or ellipsis followed by space or end of text.

    A text with no terminator counts as one sentence.
    """
    parts = [p.strip() for p in _SENTENCE_END.split(text)]
    sentences = [p for p in parts if p]
    return sentences if sentences else ([text.strip()] if text.strip() else [])


def split_words(text: str) -> list[str]:
    words = []
    for token in text.split():
        stripped = _STRIP_PUNCT.sub("", token)
        words.append(stripped if stripped else token)
    return words


def text_stats(text: str, lang: str = "en") -> ReadabilityStats:
    if not text or not text.strip():
        raise EmptyText("cannot compute readability of empty text")
    sentences = split_sentences(text)
    words = split_words(text)
    if not words:
        raise EmptyText("no words in text")
    syllable_counts = [count_syllables(w, lang) for w in words]
    return ReadabilityStats(
        sentences=max(1, len(sentences)),
        words=len(words),
        syllables=sum(syllable_counts),
        complex_words=sum(1 for c in syllable_counts if c >= 3),
        long_words=sum(1 for w in words if sum(ch.isalpha() for ch in w) > 6),
        monosyllables=sum(1 for c in syllable_counts if c == 1),
    )


def flesch_en(text: str) -> float:
    """Flesch Reading Ease: 206.835 - 1.015*(W/S) - 84.6*(Syl/W). Higher is easier."""
    st = text_stats(text, "en")
    return 206.835 - 1.015 * (st.words / st.sentences) - 84.6 * (st.syllables / st.words)


def gunning_fog(text: str) -> float:
    """Gunning Fog: 0.4 * [(W/S) + 100*(complex/W)]. Lower is easier.

    Complex means >= 3 syllables with no proper-noun or suffix exclusions
    (determinism over the classical informal rules).
    """
    st = text_stats(text, "en")
    return 0.4 * ((st.words / st.sentences) + 100.0 * (st.complex_words / st.words))


def wstf(text_de: str) -> float:
    """First Wiener Sachtextformel for German text. Lower is easier.

    0.1935*MS + 0.1672*SL + 0.1297*IW - 0.0327*ES - 0.875, with MS/IW/ES as
    percentages of words and SL the mean sentence length.
    """
    st = text_stats(text_de, "de")
    ms = 100.0 * st.complex_words / st.words
    sl = st.words / st.sentences
    iw = 100.0 * st.long_words / st.words
    es = 100.0 * st.monosyllables / st.words
    return 0.1935 * ms + 0.1672 * sl + 0.1297 * iw - 0.0327 * es - 0.875


def wstf_terms(ms: float, sl: float, iw: float, es: float) -> float:
    """WSTF from its four terms directly (MS/IW/ES in percent)."""
    return 0.1935 * ms + 0.1672 * sl + 0.1297 * iw - 0.0327 * es - 0.875


def flesch_ru(text_ru: str) -> float:
    """Russian Flesch adaptation: 206.835 - 1.3*(W/S) - 60.1*(Syl/W)."""
    st = text_stats(text_ru, "ru")
    return 206.835 - 1.3 * (st.words / st.sentences) - 60.1 * (st.syllables / st.words)


# Index name -> (function, language, direction) for report plumbing.
INDICES = {
    "flesch": (flesch_en, "en", "higher_better"),
    "gunning_fog": (gunning_fog, "en", "lower_better"),
    "wstf": (wstf, "de", "lower_better"),
    "flesch_ru": (flesch_ru, "ru", "higher_better"),
}


def indices_for_language(lang: str) -> list[str]:
    """Names of the indices defined for text in the given language."""
    return [name for name, (_, idx_lang, _) in INDICES.items() if idx_lang == lang]
