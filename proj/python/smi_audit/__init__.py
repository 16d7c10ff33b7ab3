"""Dataset-level membership inference auditing via self-comparison.

The heavy lifting lives in the C++ extension; this package re-exports the
main operations.
"""

from ._core import (  # noqa: F401
    EvalResult,
    LinearityCheck,
    PValueSeries,
    SlopeFit,
    SyntheticSet,
    Verdict,
    ZTestResult,
    __version__,
    a_nll,
    build_paraphrase_prompt,
    dataset_level_vote,
    ddi_decide,
    evaluate_methods,
    generate_synthetic,
    linearity_check,
    min_k_score,
    p_value_series,
    percentile_threshold,
    segment_sentences,
    slope_fit,
    smi_decide,
    split_half,
    suffix_a_nll,
    tokenize,
    truncate_to_budget,
    validate_paraphrase,
    z_test_one_tailed,
    z_test_paired,
    zlib_ratio,
)
