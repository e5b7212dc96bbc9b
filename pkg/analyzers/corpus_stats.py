"""
Exploratory statistics for datasets and variants: sentence and token counts
per split, length distributions, token frequencies and unknown-token rates.
"""

import csv
import io
import logging
from collections import Counter
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from analyzers.schemas import DatasetStats, HistogramBucket, SideStats, SplitStats, TokenCount
from builder.schemas import SPLIT_NAMES, SplitSet, SubwordModel
from lib.atomic_io import write_text_atomic
from lib.errors import StatsError
from reporting.svg import Series, bar_chart, write_svg
from subword.tokenizer import TokenizerModel
from subword.vocabulary import UNK

logger = logging.getLogger("CorpusStats")

# Unit buckets 0..50, width-10 buckets up to 200, then one overflow bucket.
OVERFLOW_FROM = 201
HISTOGRAM_EDGES = np.array([*range(0, 52), *range(61, OVERFLOW_FROM + 1, 10), OVERFLOW_FROM + 1])
TOP_TOKENS_PLOTTED = 30


def histogram_buckets(lengths: Sequence[int]) -> list[HistogramBucket]:
    clipped = np.minimum(np.asarray(lengths, dtype=int), OVERFLOW_FROM)
    counts, _ = np.histogram(clipped, bins=HISTOGRAM_EDGES)
    buckets = []
    for k, count in enumerate(counts):
        low, upper = int(HISTOGRAM_EDGES[k]), int(HISTOGRAM_EDGES[k + 1])
        if low == OVERFLOW_FROM:
            buckets.append(HistogramBucket(label=f">{low - 1}", low=low, high=None, count=int(count)))
        elif upper - low == 1:
            buckets.append(HistogramBucket(label=str(low), low=low, high=low, count=int(count)))
        else:
            buckets.append(HistogramBucket(label=f"{low}-{upper - 1}", low=low, high=upper - 1, count=int(count)))
    return buckets


def frequency_table(counts: Counter[str]) -> list[TokenCount]:
    ranked = sorted(counts.items(), key=lambda tc: (-tc[1], tc[0]))
    return [TokenCount(rank=k + 1, token=token, count=count) for k, (token, count) in enumerate(ranked)]


def _tokenizer_for(model: TokenizerModel | None):
    if model is None or model.scheme is SubwordModel.NONE:
        return str.split
    return model.tokenize


def side_stats(lines: Sequence[str], model: TokenizerModel | None = None) -> tuple[SideStats, Counter[str]]:
    tokenize = _tokenizer_for(model)
    counts: Counter[str] = Counter()
    lengths, unknowns = [], []
    for line in lines:
        tokens = tokenize(line)
        counts.update(tokens)
        lengths.append(len(tokens))
        unknowns.append(sum(1 for t in tokens if t == UNK))

    if not lengths:
        return SideStats(histogram=histogram_buckets([])), counts

    length_arr = np.asarray(lengths)
    unk_arr = np.asarray(unknowns)
    token_count = int(length_arr.sum())
    unknown_count = int(unk_arr.sum())
    stats = SideStats(
        sentence_count=len(lengths),
        token_count=token_count,
        min_length=int(length_arr.min()),
        max_length=int(length_arr.max()),
        mean_length=float(length_arr.mean()),
        histogram=histogram_buckets(lengths),
        token_freq=frequency_table(counts),
        vocab_size=len(counts),
        unknown_count=unknown_count,
        mean_unknowns=float(unk_arr.mean()),
        unknown_sentence_fraction=float(np.count_nonzero(unk_arr) / len(unknowns)),
        coverage=1.0 - unknown_count / token_count if token_count else 1.0,
    )
    return stats, counts


def compute_stats(
    splits: SplitSet,
    model: TokenizerModel | None = None,
    trg_model: TokenizerModel | None = None,
    dataset: str = "",
    variant: str | None = None,
) -> DatasetStats:
    """
    Stats per split and side. `model` tokenizes the source side and, unless
    `trg_model` is given, the target side too; without a model lines are
    whitespace-split.
    """
    trg_model = trg_model or model
    combined: Counter[str] = Counter()
    per_split = {}
    for name in SPLIT_NAMES:
        corpus = splits.split(name)
        src, src_counts = side_stats(corpus.src, model)
        trg, trg_counts = side_stats(corpus.trg, trg_model)
        combined.update(src_counts)
        combined.update(trg_counts)
        per_split[name] = SplitStats(src=src, trg=trg)

    tokenization = "whitespace" if model is None else model.scheme.value
    logger.debug(f"Computed stats for {dataset or 'splits'} ({tokenization})")
    return DatasetStats(
        dataset=dataset,
        variant=variant,
        tokenization=tokenization,
        splits=per_split,
        token_freq=frequency_table(combined),
    )


def token_freq_csv(stats: DatasetStats) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["rank", "token", "count"])
    for entry in stats.token_freq:
        writer.writerow([entry.rank, entry.token, entry.count])
    return buffer.getvalue()


def _split_series(stats: DatasetStats, field: str) -> list[Series]:
    return [
        Series(side, [float(getattr(getattr(stats.splits[s], side), field)) for s in SPLIT_NAMES])
        for side in ("src", "trg")
    ]


def emit_stats(stats: DatasetStats, out_dir: str | Path) -> list[Path]:
    """Writes stats.json, token_freq.csv and the four plot_*.svg charts."""
    out_dir = Path(out_dir)
    title = stats.dataset + (f" / {stats.variant}" if stats.variant else "")
    train = stats.splits.get("train", SplitStats())
    lengths = train.trg.histogram or histogram_buckets([])
    top = stats.token_freq[:TOP_TOKENS_PLOTTED]

    charts = {
        "plot_sentences.svg": bar_chart(
            f"Sentences per split: {title}", list(SPLIT_NAMES), _split_series(stats, "sentence_count"),
            x_label="split", y_label="sentences",
        ),
        "plot_tokens.svg": bar_chart(
            f"Tokens per split: {title}", list(SPLIT_NAMES), _split_series(stats, "token_count"),
            x_label="split", y_label="tokens",
        ),
        "plot_lengths.svg": bar_chart(
            f"Sentence length distribution (train): {title}",
            [b.label for b in lengths],
            [Series("src", [float(b.count) for b in train.src.histogram or lengths]),
             Series("trg", [float(b.count) for b in lengths])],
            x_label="tokens per sentence", y_label="sentences",
        ),
        "plot_token_freq.svg": bar_chart(
            f"Token frequencies (top {len(top)}): {title}",
            [t.token for t in top],
            [Series("count", [float(t.count) for t in top])],
            x_label="token", y_label="count",
        ),
    }

    written = []
    try:
        written.append(write_text_atomic(out_dir / "stats.json", stats.model_dump_json(indent=2) + "\n"))
        written.append(write_text_atomic(out_dir / "token_freq.csv", token_freq_csv(stats)))
        for name, svg in charts.items():
            written.append(write_svg(out_dir / name, svg))
    except OSError as e:
        raise StatsError(f"cannot write stats to {out_dir}: {e}") from e
    logger.info(f"Wrote {len(written)} stats files to {out_dir}")
    return written
