"""
Review datasets: parsing, splitting, k-core filtering and summary statistics.
"""

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Literal, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from src.schemas import ConfigError
from src.utils.logging_config import setup_logger, SUCCESS_ICON, ERROR_ICON

logger = setup_logger('corpus')

DatasetFormat = Literal["amazon", "yelp", "tsv", "records"]

# long names accepted as aliases of the CLI names
_FORMAT_ALIASES = {
    "amazon_json_lines": "amazon",
    "yelp_json_lines": "yelp",
}

MAX_MALFORMED_FRACTION = 0.10
MIN_RATING, MAX_RATING = 1.0, 5.0


class CorpusError(Exception):
    """Base class for dataset errors."""


class DatasetFormatError(CorpusError, ValueError):
    """Too many malformed lines, or a file in an unexpected layout."""


@dataclass(frozen=True)
class ReviewRecord:
    user_id: str
    item_id: str
    rating: float
    text: str
    review_id: str
    timestamp: Optional[int] = None


class ParsedReviews(NamedTuple):
    records: List[ReviewRecord]
    skipped: int


def _normalize_format(fmt: str) -> str:
    fmt = _FORMAT_ALIASES.get(fmt, fmt)
    if fmt not in ("amazon", "yelp", "tsv", "records"):
        raise DatasetFormatError(f"unknown dataset format {fmt!r}")
    return fmt


def _checked_rating(value) -> float:
    rating = float(value)
    if not math.isfinite(rating) or not MIN_RATING <= rating <= MAX_RATING:
        raise ValueError(f"rating {value!r} outside [{MIN_RATING}, {MAX_RATING}]")
    return rating


def _parse_yelp_date(value) -> Optional[int]:
    if value in (None, ""):
        return None
    return int(pd.Timestamp(value).timestamp())


def _parse_line(line: str, fmt: str, line_no: int) -> ReviewRecord:
    if fmt == "tsv":
        # text runs to the end of the line and may itself contain tabs
        fields = line.rstrip("\r\n").split("\t", 3)
        if len(fields) < 4:
            raise ValueError("expected user, item, rating, text")
        return ReviewRecord(fields[0], fields[1], _checked_rating(fields[2]), fields[3], f"tsv-{line_no}")

    row = json.loads(line)
    if fmt == "amazon":
        timestamp = row.get("unixReviewTime")
        return ReviewRecord(
            user_id=str(row["reviewerID"]),
            item_id=str(row["asin"]),
            rating=_checked_rating(row["overall"]),
            text=str(row.get("reviewText", "")),
            review_id=str(row.get("review_id") or f"amazon-{line_no}"),
            timestamp=int(timestamp) if timestamp is not None else None,
        )
    if fmt == "yelp":
        return ReviewRecord(
            user_id=str(row["user_id"]),
            item_id=str(row["business_id"]),
            rating=_checked_rating(row["stars"]),
            text=str(row.get("text", "")),
            review_id=str(row.get("review_id") or f"yelp-{line_no}"),
            timestamp=_parse_yelp_date(row.get("date")),
        )
    timestamp = row.get("timestamp")
    return ReviewRecord(
        user_id=str(row["user_id"]),
        item_id=str(row["item_id"]),
        rating=_checked_rating(row["rating"]),
        text=str(row["text"]),
        review_id=str(row["review_id"]),
        timestamp=int(timestamp) if timestamp is not None else None,
    )


def parse_lines(lines: Iterable[str], fmt: str) -> ParsedReviews:
    """Parse dataset lines, skipping (and counting) malformed ones.

    Lines with a duplicate review_id count as malformed.
    """
    fmt = _normalize_format(fmt)
    records: List[ReviewRecord] = []
    seen = set()
    skipped = total = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            record = _parse_line(line, fmt, line_no)
        except (ValueError, KeyError, TypeError) as e:
            skipped += 1
            logger.debug(f"line {line_no}: skipped ({e})")
            continue
        if record.review_id in seen:
            skipped += 1
            logger.debug(f"line {line_no}: duplicate review_id {record.review_id}")
            continue
        seen.add(record.review_id)
        records.append(record)

    if total and skipped / total > MAX_MALFORMED_FRACTION:
        raise DatasetFormatError(
            f"{skipped} of {total} lines malformed (limit {MAX_MALFORMED_FRACTION:.0%}); "
            f"is the format really {fmt!r}?")
    return ParsedReviews(records, skipped)


def read_reviews(path: str | Path, fmt: str) -> ParsedReviews:
    """Read a UTF-8 dataset file; see `parse_lines`."""
    with open(path, "r", encoding="utf-8") as f:
        parsed = parse_lines(f, fmt)
    if parsed.skipped:
        logger.warning(f"{ERROR_ICON} {path}: skipped {parsed.skipped} malformed lines")
    logger.info(f"{SUCCESS_ICON} {path}: parsed {len(parsed.records)} reviews")
    return parsed


def parse_dataset(path: str | Path, fmt: str) -> List[ReviewRecord]:
    """One ReviewRecord per well-formed line of `path`."""
    return read_reviews(path, fmt).records


def write_records(path: str | Path, records: Iterable[ReviewRecord]) -> None:
    """Write records as canonical JSON-lines (readable with format "records")."""
    text = "".join(json.dumps(asdict(r), sort_keys=True, ensure_ascii=False) + "\n"
                   for r in records)
    Path(path).write_text(text, encoding="utf-8")


def read_records(path: str | Path) -> List[ReviewRecord]:
    return parse_dataset(path, "records")


def split_dataset(records: List[ReviewRecord],
                  ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1),
                  seed: int = 2020) -> Tuple[List[ReviewRecord], List[ReviewRecord], List[ReviewRecord]]:
    """Seeded random partition into (train, validation, test).

    Sizes are round(ratio·N) for train and validation, the rest for test.
    """
    if not records:
        raise CorpusError("cannot split an empty dataset")
    if len(ratios) != 3 or min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")

    n = len(records)
    n_train = int(round(ratios[0] * n))
    n_val = min(int(round(ratios[1] * n)), n - n_train)
    order = np.random.default_rng(seed).permutation(n)
    pick = lambda idx: [records[i] for i in sorted(idx)]
    return (
        pick(order[:n_train]),
        pick(order[n_train:n_train + n_val]),
        pick(order[n_train + n_val:]),
    )


def _frame(records: List[ReviewRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "user_id": [r.user_id for r in records],
            "item_id": [r.item_id for r in records],
            "rating": [r.rating for r in records],
        }
    )


def filter_k_core(records: List[ReviewRecord], k: int = 5) -> List[ReviewRecord]:
    """Keep only reviews whose user and item both have at least k reviews.

    Filtering repeats until stable, since dropping a user can push an item
    below k and vice versa.
    """
    if k <= 0:
        raise ConfigError(f"k must be positive, got {k}")
    frame = _frame(records)
    keep = np.ones(len(frame), dtype=bool)
    while True:
        current = frame[keep]
        user_counts = current.groupby("user_id")["user_id"].transform("size")
        item_counts = current.groupby("item_id")["item_id"].transform("size")
        weak = (user_counts < k) | (item_counts < k)
        if not weak.any():
            break
        keep[current.index[weak.to_numpy()]] = False
    kept = [r for r, flag in zip(records, keep) if flag]
    logger.info(f"{k}-core filter kept {len(kept)} of {len(records)} reviews")
    return kept


def corpus_statistics(records: List[ReviewRecord]) -> Dict[str, float]:
    """Reviews, users, items, rating-matrix density and mean rating."""
    frame = _frame(records)
    users = int(frame["user_id"].nunique())
    items = int(frame["item_id"].nunique())
    return {
        "reviews": int(len(frame)),
        "users": users,
        "items": items,
        "density": float(len(frame) / (users * items)) if users and items else 0.0,
        "mean_rating": float(frame["rating"].mean()) if len(frame) else 0.0,
    }
