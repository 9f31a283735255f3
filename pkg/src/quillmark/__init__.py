"""Authorship attribution toolkit for drama corpora.

Pipeline: ingest plays -> segment speaker utterances into 5-450 word samples
-> build seeded train/val/test splits with per-author holdout plays -> fit
most-frequent-word features -> attribute samples with cosine delta, logistic
regression, linear SVM, or external model predictions -> report accuracy,
confusion, scapegoating, uniqueness, and timeline diagnostics.
"""

__version__ = "0.1.0"
