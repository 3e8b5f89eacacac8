//! Hypothesis-testing figures of merit.
