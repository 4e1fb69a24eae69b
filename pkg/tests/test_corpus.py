import json
import random

import pytest

from rewritemt.corpus import LanguagePair, SegmentRecord, load_segments, write_records
from rewritemt.errors import DuplicateId, EmptySource, MalformedLine

from conftest import synthetic_segments, write_corpus


def test_load_two_valid_lines_in_order(tmp_path, en_de):
    path = tmp_path / "c.jsonl"
    path.write_text(
        '{"id": "a", "source": "Hello.", "reference": "Hallo.", "src_lang": "en", "tgt_lang": "de"}\n'
        '{"id": "b", "source": "Bye.", "reference": null, "src_lang": "en", "tgt_lang": "de"}\n',
        encoding="utf-8")
    records = load_segments(path, en_de)
    assert [r.id for r in records] == ["a", "b"]
    assert records[0].reference == "Hallo."
    assert records[1].reference is None


def test_missing_source_field_is_malformed_line_1(tmp_path, en_de):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "reference": "x"}\n', encoding="utf-8")
    with pytest.raises(MalformedLine) as exc:
        load_segments(path, en_de)
    assert exc.value.line_no == 1


def test_invalid_json_reports_line_number(tmp_path, en_de):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "source": "ok"}\nnot json\n', encoding="utf-8")
    with pytest.raises(MalformedLine) as exc:
        load_segments(path, en_de)
    assert exc.value.line_no == 2


def test_duplicate_id_is_an_error_not_first_wins(tmp_path, en_de):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "source": "one"}\n{"id": "a", "source": "two"}\n',
                    encoding="utf-8")
    with pytest.raises(DuplicateId):
        load_segments(path, en_de)


def test_empty_source_after_trim_rejected(tmp_path, en_de):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "source": "   "}\n', encoding="utf-8")
    with pytest.raises(EmptySource):
        load_segments(path, en_de)


def test_trimming_outer_whitespace_preserves_interior(tmp_path, en_de):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "source": "  two  spaces  "}\n', encoding="utf-8")
    records = load_segments(path, en_de)
    assert records[0].source == "two  spaces"


def test_language_mismatch_rejected(tmp_path, en_de):
    path = tmp_path / "c.jsonl"
    path.write_text('{"id": "a", "source": "x", "src_lang": "en", "tgt_lang": "ru"}\n',
                    encoding="utf-8")
    with pytest.raises(MalformedLine):
        load_segments(path, en_de)


def test_write_zero_records_yields_empty_file(tmp_path):
    path = tmp_path / "out.jsonl"
    assert write_records(path, []) == 0
    assert path.read_text(encoding="utf-8") == ""


def test_round_trip_100_synthetic_records(tmp_path, en_de):
    segments = synthetic_segments(100, seed=3)
    path = tmp_path / "c.jsonl"
    assert write_records(path, segments) == 100
    assert load_segments(path, en_de) == segments


def test_round_trip_preserves_unicode_and_whitespace(tmp_path, en_de):
    seg = SegmentRecord("u1", "Füße — 跳舞 \t tabbed", "ссылка", "en", "de")
    path = tmp_path / "c.jsonl"
    write_records(path, [seg])
    assert load_segments(path, en_de) == [seg]


def test_round_trip_random_records_property(tmp_path, en_de):
    # Round-trip equality over many randomized corpora.
    rng = random.Random(42)
    alphabet = "abc déü漢 xyz."
    for trial in range(25):
        n = rng.randint(1, 20)
        segments = []
        for i in range(n):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 40))).strip()
            if not text:
                text = "x"
            ref = None if rng.random() < 0.3 else text[::-1] or "r"
            segments.append(SegmentRecord(f"s{trial}-{i}", text, ref, "en", "de"))
        path = tmp_path / f"c{trial}.jsonl"
        write_records(path, segments)
        assert load_segments(path, en_de) == segments


def test_pair_parse_and_str():
    pair = LanguagePair.parse("EN-De")
    assert (pair.src, pair.tgt) == ("en", "de")
    assert str(pair) == "en-de"
    with pytest.raises(ValueError):
        LanguagePair.parse("english")


def test_write_to_missing_parent_is_io_failure(tmp_path):
    from rewritemt.errors import IoFailure
    with pytest.raises(IoFailure):
        write_records(tmp_path / "nope" / "out.jsonl", [])


def test_load_missing_file_is_io_failure(tmp_path, en_de):
    from rewritemt.errors import IoFailure
    with pytest.raises(IoFailure):
        load_segments(tmp_path / "absent.jsonl", en_de)
