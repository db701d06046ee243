#!/usr/bin/env python
"""
conqar 命令行入口: prepare / train / grid / ablate / eval / viz
"""

import argparse
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from src.corpus import (
    DocumentBatch,
    ReviewIndex,
    Vocabulary,
    build_vocab,
    corpus_statistics,
    filter_k_core,
    read_records,
    read_reviews,
    save_documents,
    split_dataset,
    write_records,
)
from src.models import ConQARModel
from src.schemas import VARIANTS, ConfigError, GridSpec, TrainConfig, load_grid_spec, load_train_config
from src.trainer import CorpusSplits, evaluate, grid_search, run_ablation, train
from src.trainer.training import DATA_SOURCE_FILE, SPLIT_FILES
from src.utils.logging_config import setup_logger, SUCCESS_ICON, ERROR_ICON, WAIT_ICON
from src.utils.serialization import dumps, read_json, write_json
from src.viz import DEFAULT_TOP_K, export_pair

logger = setup_logger('main')

VOCAB_FILE = "vocab.txt"
STATS_FILE = "stats.json"
DOCUMENTS_FILE = "documents.bin"


# --- 数据目录 ---

def _load_data(data_dir: str | Path) -> Tuple[CorpusSplits, Optional[Vocabulary]]:
    """Splits of a prepared directory, plus its vocabulary when one was written."""
    data_dir = Path(data_dir)
    splits = CorpusSplits.load(data_dir)
    vocab_path = data_dir / VOCAB_FILE
    vocab = Vocabulary.load(vocab_path) if vocab_path.exists() else None
    return splits, vocab


def _check_document_lengths(configs: Iterable[TrainConfig], data_dir: str | Path) -> None:
    """Document lengths of the configs must match those the data directory was prepared with."""
    stats_path = Path(data_dir) / STATS_FILE
    if not stats_path.exists():
        return
    stats = read_json(stats_path)
    prepared = (stats.get("max_reviews"), stats.get("max_review_words"))
    if None in prepared:
        return
    for config in configs:
        if (config.max_reviews, config.max_review_words) != prepared:
            raise ConfigError(
                f"config documents are {config.max_reviews} reviews x {config.max_review_words} words, "
                f"but {data_dir} was prepared with {prepared[0]} x {prepared[1]}; "
                f"re-run prepare or change the config")


def _checkpoint_data_dir(checkpoint: Path, override: Optional[str]) -> Path:
    # 不指定 --data 时使用训练时记录的数据目录
    if override:
        return Path(override)
    source = checkpoint.parent / DATA_SOURCE_FILE
    if not source.exists():
        raise FileNotFoundError(f"no {DATA_SOURCE_FILE} next to {checkpoint}; pass --data")
    return Path(read_json(source)["data_dir"])


def _checkpoint_vocab(checkpoint: Path, data_dir: Path) -> Vocabulary:
    # a run directory keeps the vocabulary its model was trained with
    for candidate in (checkpoint.parent / VOCAB_FILE, data_dir / VOCAB_FILE):
        if candidate.exists():
            return Vocabulary.load(candidate)
    raise FileNotFoundError(f"no {VOCAB_FILE} next to {checkpoint} or in {data_dir}")


def _config(path: Optional[str]) -> TrainConfig:
    return load_train_config(path) if path else TrainConfig()


# --- 子命令 ---

def cmd_prepare(args) -> None:
    parsed = read_reviews(args.input, args.format)
    records = parsed.records
    if args.k_core:
        records = filter_k_core(records, args.k_core)
    train_set, validation, test = split_dataset(records, tuple(args.ratios), args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, split in zip(SPLIT_FILES.values(), (train_set, validation, test)):
        write_records(out / name, split)

    vocab = build_vocab(train_set, args.min_count)
    vocab.save(out / VOCAB_FILE)

    index = ReviewIndex(train_set, vocab, args.max_review_words, args.max_reviews)
    users, items = index.owners("user"), index.owners("item")
    documents = [index.document("user", u) for u in users] + [index.document("item", v) for v in items]
    save_documents(out / DOCUMENTS_FILE,
                   DocumentBatch.stack(documents, sides=["user"] * len(users) + ["item"] * len(items)))

    write_json(out / STATS_FILE, {
        "corpus": corpus_statistics(records),
        "train": corpus_statistics(train_set),
        "validation": corpus_statistics(validation),
        "test": corpus_statistics(test),
        "skipped_lines": parsed.skipped,
        "vocab_size": len(vocab),
        "max_reviews": args.max_reviews,
        "max_review_words": args.max_review_words,
        "document_length": index.doc_length,
    })
    logger.info(f"{SUCCESS_ICON} prepared {len(train_set)}/{len(validation)}/{len(test)} "
                f"train/validation/test reviews in {out}")


def cmd_train(args) -> None:
    config = _config(args.config)
    _check_document_lengths([config], args.data)
    splits, vocab = _load_data(args.data)
    result = train(config, splits, out_dir=args.out, vocab=vocab)
    print(dumps(result.report.model_dump(exclude={"epochs"}), indent=2))


def cmd_grid(args) -> None:
    grid = load_grid_spec(args.grid) if args.grid else GridSpec.full_search()
    _check_document_lengths(grid.configs(), args.data)
    splits, vocab = _load_data(args.data)
    logger.info(f"{WAIT_ICON} {grid.size} grid combinations")
    _, report = grid_search(splits, grid, out_dir=args.out, parallel=args.parallel, vocab=vocab)
    print(dumps({"best_index": report.best_index,
                 "best_config": report.best_config,
                 "test_mae": report.best_report.test_mae}, indent=2))


def cmd_ablate(args) -> None:
    config = _config(args.config)
    _check_document_lengths([config], args.data)
    splits, vocab = _load_data(args.data)
    table = run_ablation(splits, config, args.variants, out_dir=args.out, vocab=vocab)
    print(dumps(table, indent=2))


def cmd_eval(args) -> None:
    checkpoint = Path(args.checkpoint)
    data_dir = _checkpoint_data_dir(checkpoint, args.data)
    vocab = _checkpoint_vocab(checkpoint, data_dir)
    model = ConQARModel.load(checkpoint, vocab)
    train_set = read_records(data_dir / SPLIT_FILES["train"])
    examples = read_records(data_dir / SPLIT_FILES[args.split])
    index = ReviewIndex(train_set, vocab, model.config.max_review_words, model.config.max_reviews)
    result = evaluate(model, examples, index, clip=args.clip or None)
    logger.info(f"{SUCCESS_ICON} {args.split}: MAE {result.mae:.4f} RMSE {result.rmse:.4f} "
                f"over {result.count} reviews")
    print(dumps({"split": args.split, **asdict(result)}, indent=2))


def cmd_viz(args) -> None:
    checkpoint = Path(args.checkpoint)
    data_dir = _checkpoint_data_dir(checkpoint, args.data)
    vocab = _checkpoint_vocab(checkpoint, data_dir)
    model = ConQARModel.load(checkpoint, vocab)
    train_set = read_records(data_dir / SPLIT_FILES["train"])
    index = ReviewIndex(train_set, vocab, model.config.max_review_words, model.config.max_reviews)
    export = export_pair(model, index, vocab, args.user, args.item, args.out, args.k)
    print(dumps({"prediction": export.prediction,
                 "user_top_positions": export.highlights["user"].positions,
                 "item_top_positions": export.highlights["item"].positions}, indent=2))


# --- 参数解析 ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conqar",
        description="Review-based rating prediction with density matrices and mutual attention")
    commands = parser.add_subparsers(dest="command", required=True)

    prepare = commands.add_parser("prepare", help="parse a review dump into train/validation/test")
    prepare.add_argument("--input", required=True, help="raw dataset file")
    prepare.add_argument("--format", required=True, help="amazon, yelp, tsv or records")
    prepare.add_argument("--out", required=True, help="prepared data directory")
    prepare.add_argument("--k-core", type=int, default=0, help="apply a k-core filter first (0: off)")
    prepare.add_argument("--seed", type=int, default=2020)
    prepare.add_argument("--ratios", type=float, nargs=3, default=(0.8, 0.1, 0.1),
                         metavar=("TRAIN", "VALIDATION", "TEST"))
    prepare.add_argument("--min-count", type=int, default=1)
    prepare.add_argument("--max-reviews", type=int, default=15)
    prepare.add_argument("--max-review-words", type=int, default=100)
    prepare.set_defaults(handler=cmd_prepare)

    train_cmd = commands.add_parser("train", help="train one configuration")
    train_cmd.add_argument("--config", help="TOML or JSON TrainConfig (defaults when omitted)")
    train_cmd.add_argument("--data", required=True)
    train_cmd.add_argument("--out", required=True)
    train_cmd.set_defaults(handler=cmd_train)

    grid = commands.add_parser("grid", help="grid search on validation MAE")
    grid.add_argument("--grid", help="TOML or JSON GridSpec (full search grid when omitted)")
    grid.add_argument("--data", required=True)
    grid.add_argument("--out")
    grid.add_argument("--parallel", type=int, default=0, help="worker threads")
    grid.set_defaults(handler=cmd_grid)

    ablate = commands.add_parser("ablate", help="train every model variant on the same splits")
    ablate.add_argument("--config")
    ablate.add_argument("--data", required=True)
    ablate.add_argument("--out")
    ablate.add_argument("--variants", nargs="+", default=list(VARIANTS))
    ablate.set_defaults(handler=cmd_ablate)

    eval_cmd = commands.add_parser("eval", help="MAE / RMSE of a checkpoint on one split")
    eval_cmd.add_argument("--checkpoint", required=True)
    eval_cmd.add_argument("--data", help="prepared data directory (default: the one the checkpoint was trained on)")
    eval_cmd.add_argument("--split", choices=list(SPLIT_FILES), default="test")
    eval_cmd.add_argument("--clip", action="store_true", help="clip predictions to [1, 5]")
    eval_cmd.set_defaults(handler=cmd_eval)

    viz = commands.add_parser("viz", help="density heatmaps and top-k highlights for one pair")
    viz.add_argument("--checkpoint", required=True)
    viz.add_argument("--data", help="prepared data directory (default: the one the checkpoint was trained on)")
    viz.add_argument("--user", required=True)
    viz.add_argument("--item", required=True)
    viz.add_argument("--k", type=int, default=DEFAULT_TOP_K)
    viz.add_argument("--out", required=True)
    viz.set_defaults(handler=cmd_viz)
    return parser


def run_main(argv: Optional[List[str]] = None) -> int:
    """
    封装主程序逻辑，作为模块入口点
    """
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except Exception as e:
        logger.error(f"{ERROR_ICON} {args.command} failed: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(run_main())
