import random

import pytest

from rewritemt.errors import EmptyText
from rewritemt.readability import (
    count_syllables,
    flesch_en,
    flesch_ru,
    gunning_fog,
    split_sentences,
    text_stats,
    wstf,
    wstf_terms,
)

MONO = ["cat", "dog", "sun", "mat", "tree", "fish", "hand", "rock"]
POLY = ["elephant", "happily", "umbrella", "wonderful", "banana", "generally"]


# -- syllable counting ------------------------------------------------------------

@pytest.mark.parametrize("word,count", [
    ("cat", 1),
    ("beautiful", 3),
    ("the", 1),
    ("make", 1),
    ("table", 2),
    ("whale", 1),
    ("elephant", 3),
    ("rhythm", 1),
])
def test_english_syllables(word, count):
    assert count_syllables(word, "en") == count


@pytest.mark.parametrize("word,count", [
    ("молоко", 3),
    ("кот", 1),
    ("переводимость", 5),
])
def test_russian_syllables(word, count):
    assert count_syllables(word, "ru") == count


@pytest.mark.parametrize("word,count", [
    ("Haus", 1),      # au is one group
    ("wieder", 2),    # ie merges, final er adds one
    ("Bäume", 2),     # äu merges
    ("Übersetzung", 4),
])
def test_german_syllables(word, count):
    assert count_syllables(word, "de") == count


def test_degenerate_word_counts_one():
    assert count_syllables("...", "en") == 1
    assert count_syllables("xyz", "en") == 1


# -- sentence splitting -------------------------------------------------------------

def test_sentence_splitting():
    assert len(split_sentences("One. Two! Three?")) == 3
    assert len(split_sentences("No terminator at all")) == 1
    assert len(split_sentences("Trailing dots...")) == 1
    assert len(split_sentences("With ellipsis… and more.")) == 2


def test_stats_of_cat_sentence():
    st = text_stats("The cat sat on the mat.", "en")
    assert st.sentences == 1
    assert st.words == 6
    assert st.syllables == 6
    assert st.complex_words == 0
    assert st.monosyllables == 6


# -- Flesch ---------------------------------------------------------------------------

def test_flesch_cat_sentence():
    assert flesch_en("The cat sat on the mat.") == pytest.approx(116.145, abs=0.01)


def test_flesch_monotone_in_syllables():
    rng = random.Random(31)
    for _ in range(1000):
        n = rng.randint(4, 12)
        words = [rng.choice(MONO) for _ in range(n)]
        base = " ".join(words) + "."
        harder_words = list(words)
        harder_words[rng.randrange(n)] = rng.choice(POLY)
        harder = " ".join(harder_words) + "."
        assert flesch_en(harder) < flesch_en(base)


def test_flesch_empty_text():
    with pytest.raises(EmptyText):
        flesch_en("   ")


# -- Gunning Fog ------------------------------------------------------------------------

def test_fog_cat_sentence():
    assert gunning_fog("The cat sat on the mat.") == pytest.approx(2.40, abs=0.01)


def test_fog_monotone_in_complex_words():
    rng = random.Random(32)
    for _ in range(1000):
        n = rng.randint(4, 12)
        words = [rng.choice(MONO) for _ in range(n)]
        base = " ".join(words) + "."
        harder_words = list(words)
        harder_words[rng.randrange(n)] = rng.choice(POLY)  # >= 3 syllables
        harder = " ".join(harder_words) + "."
        assert gunning_fog(harder) > gunning_fog(base)


# -- WSTF ----------------------------------------------------------------------------------

def test_wstf_degenerate_plug_in():
    # Only monosyllabic short words, one word per sentence:
    # MS=0, SL=1, IW=0, ES=100 -> 0.1672 - 3.27 - 0.875
    text = "Der. Hund. Mag. Das."
    assert wstf(text) == pytest.approx(-3.9778, abs=1e-6)


def test_wstf_linear_in_ms():
    rng = random.Random(33)
    for _ in range(1000):
        ms = rng.uniform(0, 80)
        sl = rng.uniform(1, 40)
        iw = rng.uniform(0, 100)
        es = rng.uniform(0, 100)
        delta = wstf_terms(ms + 10, sl, iw, es) - wstf_terms(ms, sl, iw, es)
        assert delta == pytest.approx(1.935, abs=1e-9)


# -- Flesch-Ru ---------------------------------------------------------------------------

def test_flesch_ru_plug_in():
    # 1 sentence, 4 words, 4 syllables: 206.835 - 1.3*4 - 60.1*1
    text = "кот сел на мат."
    assert flesch_ru(text) == pytest.approx(141.535, abs=1e-6)


def test_flesch_ru_monotone_in_syllables():
    base = "кот сел на мат."
    longer = "кот сел на молоко."  # 3 syllables instead of 1
    assert flesch_ru(longer) < flesch_ru(base)


# -- purity ------------------------------------------------------------------------------

def test_indices_pure():
    text = "The committee convened to deliberate extraordinarily complicated matters."
    assert flesch_en(text) == flesch_en(text)
    assert gunning_fog(text) == gunning_fog(text)
