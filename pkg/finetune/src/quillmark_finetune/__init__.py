"""Fine-tuning harness: consumes the toolkit's pair files, emits its
prediction CSV contract."""

__version__ = "0.1.0"
