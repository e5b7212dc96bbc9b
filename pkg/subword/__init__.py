from subword.tokenizer import TokenizerModel, decode, encode, load_tokenizer, train_tokenizer
from subword.vocabulary import SPECIAL_TOKENS, UNK_ID, WORD_MARKER, Vocabulary

__all__ = [
    "SPECIAL_TOKENS",
    "UNK_ID",
    "WORD_MARKER",
    "TokenizerModel",
    "Vocabulary",
    "decode",
    "encode",
    "load_tokenizer",
    "train_tokenizer",
]
