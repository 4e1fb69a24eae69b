import json
import random

import pytest

from rewritemt.corpus import LanguagePair, SegmentRecord

WORDS = [
    "the", "magnificent", "cat", "sat", "quietly", "on", "a", "comfortable",
    "mat", "while", "watching", "birds", "outside", "extraordinarily",
    "window", "yesterday", "sunny", "afternoon", "proclamation", "garden",
    "walked", "slowly", "through", "ancient", "forest", "stream",
]


def synthetic_segments(n, seed=7, pair=("en", "de"), with_reference=True):
    rng = random.Random(seed)
    segments = []
    for i in range(n):
        k = rng.randint(5, 12)
        src = " ".join(rng.choice(WORDS) for _ in range(k)).capitalize() + "."
        ref = ("Ref " + src.lower()) if with_reference else None
        segments.append(SegmentRecord(
            id=f"seg{i:04d}", source=src, reference=ref,
            src_lang=pair[0], tgt_lang=pair[1]))
    return segments


def write_corpus(path, segments):
    with open(path, "w", encoding="utf-8") as fh:
        for seg in segments:
            fh.write(json.dumps(seg.to_dict(), ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def en_de():
    return LanguagePair("en", "de")


@pytest.fixture
def small_corpus(tmp_path, en_de):
    segments = synthetic_segments(10)
    path = tmp_path / "corpus.jsonl"
    write_corpus(path, segments)
    return path, segments
