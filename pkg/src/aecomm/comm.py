"""Communication-specific layers: power normalization, batch slicing, the AWGN
channel, and hard decoding.

Symbols live in R^2 (one complex value per row). Power conventions: P is the
total symbol energy, sigma2 the total complex noise variance (split sigma2/2
per real component), and SNR = P / sigma2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class NormalizationMode(enum.Enum):
    FIXED_POWER = "fixed"
    AVERAGE_POWER_BATCH = "average-batch"
    AVERAGE_POWER_ALPHABET = "average-alphabet"


class DegenerateInputError(ValueError):
    """Raised when normalization is asked to rescale an (all-)zero signal."""


@dataclass
class Constellation:
    """M complex symbols (as an M x 2 array) under a power constraint."""

    points: np.ndarray
    power: float
    mode: NormalizationMode = NormalizationMode.AVERAGE_POWER_ALPHABET

    def validate(self, rtol: float = 1e-9) -> None:
        row_power = np.sum(self.points * self.points, axis=1)
        if self.mode is NormalizationMode.FIXED_POWER:
            ok = np.allclose(row_power, self.power, rtol=rtol, atol=0.0)
        else:
            ok = np.isclose(row_power.mean(), self.power, rtol=rtol, atol=0.0)
        if not ok:
            raise ValueError(f"constellation violates {self.mode.value} power constraint")


@dataclass
class ChannelParams:
    snr_db: float
    power: float

    @property
    def sigma2(self) -> float:
        return sigma2_from_snr(self.power, self.snr_db)


def sigma2_from_snr(power: float, snr_db: float) -> float:
    """Total complex noise variance for a given transmit power and SNR in dB."""
    if power <= 0:
        raise ValueError("power must be positive")
    return power * 10.0 ** (-snr_db / 10.0)


def power_from_eb(M: int, eb: float) -> float:
    """Transmit power for energy-per-bit eb: P = eb * log2(M). M must be a power of 2."""
    if M < 2 or (M & (M - 1)) != 0:
        raise ValueError(f"alphabet size must be a power of 2, got {M}")
    if eb <= 0:
        raise ValueError("energy per bit must be positive")
    return eb * np.log2(M)


def normalize_fixed(X: np.ndarray, power: float) -> np.ndarray:
    """Scale each row so that |x_i|^2 = power exactly."""
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateInputError("zero-norm row cannot be normalized to fixed power")
    return X * (np.sqrt(power) / norms)


def normalize_average(X: np.ndarray, power: float) -> tuple[np.ndarray, float]:
    """Scale X so the mean row power equals `power`.

    Returns (X', s) with X' = s * X and s = sqrt(N * power / sum_j |x_j|^2).
    """
    q = float(np.sum(X * X))
    if q == 0.0:
        raise DegenerateInputError("all-zero input cannot satisfy an average power constraint")
    s = np.sqrt(X.shape[0] * power / q)
    return s * X, s


def normalize_average_backward(dXp: np.ndarray, X: np.ndarray, s: float, power: float) -> np.ndarray:
    """Gradient of the average-power normalization X' = s(X) * X.

    dX_j = s * (dX'_j - x_j * sum_i <dX'_i, x_i> / Q) with Q = sum |x_k|^2.
    The second term couples every row to every other row: gradient reaches all
    rows of X even when only a few rows of X' are used downstream.
    """
    if dXp.shape != X.shape:
        raise ValueError("upstream gradient shape does not match input shape")
    q = float(np.sum(X * X))
    inner = float(np.sum(dXp * X))
    return s * (dXp - X * (inner / q))


def gather(X_all: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Select rows of X_all; duplicates allowed (sampling with replacement)."""
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= X_all.shape[0]):
        raise ValueError("gather index out of range")
    return X_all[indices]


def gather_backward(dX_batch: np.ndarray, indices: np.ndarray, n_rows: int) -> np.ndarray:
    """Scatter-add of batch gradients back to the full-alphabet rows."""
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= n_rows):
        raise ValueError("gather index out of range")
    dX_all = np.zeros((n_rows, dX_batch.shape[1]))
    np.add.at(dX_all, indices, dX_batch)
    return dX_all


def awgn(X: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise with variance sigma2/2 per real component."""
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    return X + rng.normal(0.0, np.sqrt(sigma2 / 2.0), size=X.shape)


def decode(logits: np.ndarray) -> np.ndarray:
    """Per-row argmax; ties go to the lowest index."""
    if logits.size == 0:
        raise ValueError("cannot decode empty logits")
    return np.argmax(logits, axis=1)


def export_constellation_csv(points: np.ndarray, path) -> None:
    """Write the constellation as CSV rows `index,re,im` with 17 significant digits."""
    lines = ["index,re,im"]
    for i, (re, im) in enumerate(points):
        lines.append(f"{i},{re:.17g},{im:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_constellation_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "index,re,im":
            raise ValueError(f"unexpected constellation header: {header!r}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    points = np.empty((len(rows), 2))
    for idx, re, im in rows:
        points[int(idx)] = (float(re), float(im))
    return points
