"""
Writes a deterministic word-substitution parallel corpus into the raw layout
of a dataset: every target sentence is the source sentence translated word
by word through a fixed bijective lexicon.

Usage:
    python scripts/synthetic_corpus.py --base datasets --name health --pair de-en --pairs 1000 --domain health
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from builder.dataset_registry import RAW_STEM, raw_dir, write_corpus  # noqa: E402
from builder.schemas import DatasetRef, ParallelCorpus  # noqa: E402

logger = logging.getLogger("SyntheticCorpus")

SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "pa", "do", "fu", "gi", "hu", "be")
DOMAINS = ("general", "health", "bio")


def make_lexicon(size: int = 300, seed: int = 7) -> dict[str, str]:
    """Source word -> target word. Target words are the reversed source words, so the map is a bijection."""
    rng = np.random.default_rng(seed)
    words: set[str] = set()
    while len(words) < size:
        n = int(rng.integers(2, 4))
        words.add("".join(SYLLABLES[int(i)] for i in rng.integers(0, len(SYLLABLES), n)))
    return {w: w[::-1] for w in sorted(words)}


def domain_vocabulary(lexicon: dict[str, str], domain: str) -> list[str]:
    """A shared half of the lexicon plus a quarter specific to the domain."""
    words = sorted(lexicon)
    half, quarter = len(words) // 2, len(words) // 4
    shared = words[:half]
    if domain == "general":
        return words
    k = DOMAINS.index(domain) - 1
    return shared + words[half + k * quarter: half + (k + 1) * quarter]


def generate_pairs(
    n_pairs: int,
    lexicon: dict[str, str],
    seed: int = 1234,
    domain: str = "general",
    min_len: int = 3,
    max_len: int = 10,
) -> list[tuple[str, str]]:
    rng = np.random.default_rng(seed)
    vocabulary = domain_vocabulary(lexicon, domain)
    pairs = []
    for _ in range(n_pairs):
        length = int(rng.integers(min_len, max_len + 1))
        src_words = [vocabulary[int(i)] for i in rng.integers(0, len(vocabulary), length)]
        pairs.append((" ".join(src_words), " ".join(lexicon[w] for w in src_words)))
    return pairs


def write_dataset(
    base_path: Path,
    name: str,
    src: str,
    trg: str,
    n_pairs: int,
    seed: int = 1234,
    domain: str = "general",
    lexicon_seed: int = 7,
    tag_column: bool = False,
) -> Path:
    """Writes data/raw/data.<src|trg> (and data.domain.meta when tag_column is set) for an original-size dataset."""
    ref = DatasetRef(name=name, src=src, trg=trg, base_path=base_path)
    pairs = generate_pairs(n_pairs, make_lexicon(seed=lexicon_seed), seed=seed, domain=domain)
    metadata = {"domain": tuple(domain for _ in pairs)} if tag_column else {}
    corpus = ParallelCorpus(src=tuple(p[0] for p in pairs), trg=tuple(p[1] for p in pairs), metadata=metadata)
    write_corpus(raw_dir(ref), RAW_STEM, src, trg, corpus)
    logger.info(f"Wrote {n_pairs} pairs to {raw_dir(ref)}")
    return raw_dir(ref)


def main() -> int:
    parser = argparse.ArgumentParser(description="Generate a synthetic word-substitution parallel corpus.")
    parser.add_argument("--base", required=True, type=Path)
    parser.add_argument("--name", required=True)
    parser.add_argument("--pair", default="de-en")
    parser.add_argument("--pairs", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=1234)
    parser.add_argument("--domain", choices=DOMAINS, default="general")
    parser.add_argument("--tag-column", action="store_true", help="Also write a data.domain.meta column.")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    src, trg = args.pair.split("-")
    write_dataset(args.base, args.name, src, trg, args.pairs, args.seed, args.domain, tag_column=args.tag_column)
    return 0


if __name__ == "__main__":
    sys.exit(main())
