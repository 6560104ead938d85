"""End-to-end autoencoder communication over AWGN, comparing batch-scope and
alphabet-scope average power normalization."""

from . import comm, metrics, nn, train

__all__ = ["comm", "metrics", "nn", "train"]
__version__ = "0.1.0"
