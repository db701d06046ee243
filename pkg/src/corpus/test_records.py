import json

import pytest

from src.corpus import (
    DatasetFormatError,
    CorpusError,
    ReviewRecord,
    corpus_statistics,
    filter_k_core,
    parse_lines,
    read_records,
    read_reviews,
    split_dataset,
    write_records,
)
from src.schemas import ConfigError


def _amazon_line(i, rating=4.0, **extra):
    row = {"reviewerID": f"u{i % 3}", "asin": f"i{i % 2}", "overall": rating,
           "reviewText": f"review number {i}", "unixReviewTime": 1000 + i}
    row.update(extra)
    return json.dumps(row)


def _records(n):
    return [ReviewRecord(f"u{i % 7}", f"i{i % 5}", float(1 + i % 5), f"text {i}", f"r{i}")
            for i in range(n)]


def test_three_line_file_gives_three_records(tmp_path):
    path = tmp_path / "toy.json"
    path.write_text("\n".join(_amazon_line(i) for i in range(3)) + "\n", encoding="utf-8")
    parsed = read_reviews(path, "amazon")
    assert len(parsed.records) == 3
    assert parsed.skipped == 0
    assert parsed.records[0] == ReviewRecord("u0", "i0", 4.0, "review number 0", "amazon-1", 1000)


def test_missing_rating_is_skipped_and_counted():
    lines = [_amazon_line(i) for i in range(10)]
    lines.append(json.dumps({"reviewerID": "u9", "asin": "i9", "reviewText": "no stars"}))
    parsed = parse_lines(lines, "amazon_json_lines")
    assert len(parsed.records) == 10
    assert parsed.skipped == 1


def test_too_many_malformed_lines_is_a_format_error():
    lines = [_amazon_line(0), "not json", "{}"]
    with pytest.raises(DatasetFormatError):
        parse_lines(lines, "amazon")


def test_out_of_range_rating_counts_as_malformed():
    lines = [_amazon_line(i) for i in range(10)] + [_amazon_line(11, rating=7)]
    assert parse_lines(lines, "amazon").skipped == 1


def test_yelp_and_tsv_formats():
    yelp = json.dumps({"user_id": "a", "business_id": "b", "stars": 5, "text": "Great!",
                       "review_id": "y1", "date": "2018-01-01 10:00:00"})
    record = parse_lines([yelp], "yelp").records[0]
    assert (record.user_id, record.item_id, record.rating, record.review_id) == ("a", "b", 5.0, "y1")
    assert record.timestamp is not None

    tsv = parse_lines(["a\tb\t3\tfine enough", "c\td\t1\tawful"], "tsv").records
    assert [r.review_id for r in tsv] == ["tsv-1", "tsv-2"]
    assert tsv[1].text == "awful"


def test_tsv_text_keeps_its_tabs():
    lines = ["u1\ti1\t5\tgreat\tproduct\n", "u2\ti2\t4\tnice\tproduct\n"]
    lines += [f"u{i}\ti{i}\t3\tplain text {i}\n" for i in range(3, 12)]
    parsed = parse_lines(lines, "tsv")

    assert parsed.skipped == 0
    assert len(parsed.records) == 11
    assert parsed.records[0].text == "great\tproduct"
    assert parsed.records[1].text == "nice\tproduct"
    assert len({r.review_id for r in parsed.records}) == 11


def test_unknown_format():
    with pytest.raises(DatasetFormatError):
        parse_lines([], "xml")


def test_records_round_trip(tmp_path):
    records = _records(6)
    write_records(tmp_path / "r.jsonl", records)
    assert read_records(tmp_path / "r.jsonl") == records


def test_split_sizes_and_determinism():
    records = _records(10)
    train, val, test = split_dataset(records, seed=7)
    assert (len(train), len(val), len(test)) == (8, 1, 1)
    assert split_dataset(records, seed=7) == (train, val, test)


def test_split_is_an_exact_partition():
    records = _records(100)
    parts = split_dataset(records, seed=3)
    ids = [set(r.review_id for r in part) for part in parts]
    assert ids[0] | ids[1] | ids[2] == {r.review_id for r in records}
    assert not (ids[0] & ids[1]) and not (ids[0] & ids[2]) and not (ids[1] & ids[2])
    assert all(abs(len(p) - ratio * 100) <= 1 for p, ratio in zip(parts, (0.8, 0.1, 0.1)))


def test_split_rejects_empty_input():
    with pytest.raises(CorpusError):
        split_dataset([])


def test_k_core_drops_weak_user_and_rechecks_items():
    records = []
    # u0..u4 review i0..i4 fully: a 5-core block
    for u in range(5):
        for i in range(5):
            records.append(ReviewRecord(f"u{u}", f"i{i}", 3.0, "x", f"r{u}-{i}"))
    # u5 has only 4 reviews, all on i5; i5 has no other reviews
    for j in range(4):
        records.append(ReviewRecord("u5", "i5", 3.0, "x", f"w{j}"))
    kept = filter_k_core(records, k=5)
    assert len(kept) == 25
    assert {r.user_id for r in kept} == {f"u{u}" for u in range(5)}


def test_k_core_must_be_positive():
    with pytest.raises(ConfigError):
        filter_k_core(_records(3), k=0)


def test_corpus_statistics():
    records = [
        ReviewRecord("a", "x", 5.0, "", "1"),
        ReviewRecord("a", "y", 3.0, "", "2"),
        ReviewRecord("b", "x", 1.0, "", "3"),
    ]
    stats = corpus_statistics(records)
    assert stats == {"reviews": 3, "users": 2, "items": 2, "density": 0.75, "mean_rating": 3.0}
