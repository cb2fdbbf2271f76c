"""Lexical semantic change detection between two corpus slices."""

from ._semshift import (
    ConfigError,
    ContractViolation,
    Error,
    InvalidArgument,
    IoError,
    NeuralMap,
    NumericalError,
    RunConfig,
    accuracy,
    classify,
    classify_run,
    cosine,
    evaluate,
    fit_ffnn,
    fit_linear,
    mu_rank,
    recall_at_fraction,
    recall_at_k,
    score,
    solve_orthogonal,
    svd,
    synth,
    threshold,
    tokenize,
    train,
)


def run(config):
    """Runs train, score, classify and evaluate; returns the report rows."""
    train(config)
    score(config)
    classify_run(config)
    return evaluate(config)
