"""Multimodal conversational stance detection workbench."""

from ._core import (
    StanceBenchError,
    __version__,
    build_prompt,
    cohen_kappa,
    corpus_stats,
    edit_distance,
    evaluate_files,
    f1_avg,
    match_label,
    paired_bootstrap_files,
    patchify,
    round_half_up2,
    run_cli,
    score,
    write_toy_corpus,
)

__all__ = [
    "StanceBenchError",
    "__version__",
    "build_prompt",
    "cohen_kappa",
    "corpus_stats",
    "edit_distance",
    "evaluate_files",
    "f1_avg",
    "match_label",
    "paired_bootstrap_files",
    "patchify",
    "round_half_up2",
    "run_cli",
    "score",
    "write_toy_corpus",
]
