from .engine import (
    LADDER_LEVELS,
    TokenView,
    attempt_stats,
    make_noise_ladder,
    mix_segment,
    noise_corpus,
    noise_segment,
    replay_segment,
    tokenize,
    write_ladder,
)
from .hangul import compose as hangul_compose, decompose as hangul_decompose
from .layouts import KeyboardLayout, LayoutError, load_layout
from .ops import perturb_drop, perturb_dupe, perturb_key, perturb_swap
from .rng import derive_rng, derive_seed

__all__ = [
    "LADDER_LEVELS",
    "KeyboardLayout",
    "LayoutError",
    "TokenView",
    "attempt_stats",
    "derive_rng",
    "derive_seed",
    "hangul_compose",
    "hangul_decompose",
    "load_layout",
    "make_noise_ladder",
    "mix_segment",
    "noise_corpus",
    "noise_segment",
    "perturb_drop",
    "perturb_dupe",
    "perturb_key",
    "perturb_swap",
    "replay_segment",
    "tokenize",
    "write_ladder",
]
