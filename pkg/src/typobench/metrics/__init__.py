from .bleu import BleuParams, bleu, bleu_statistics, sentence_bleu
from .chrf import ChrfParams, chrf, chrf_statistics, sentence_chrf
from .composite import IndexMismatchError, delta_qe, faux_metric
from .tokens import BPETokenizer, fertility, get_tokenizer, token_f1

__all__ = [
    "BPETokenizer",
    "BleuParams",
    "ChrfParams",
    "IndexMismatchError",
    "bleu",
    "bleu_statistics",
    "chrf",
    "chrf_statistics",
    "delta_qe",
    "faux_metric",
    "fertility",
    "get_tokenizer",
    "sentence_bleu",
    "sentence_chrf",
    "token_f1",
]
