"""End-to-end training of the autoencoder link, for both architectures.

Baseline: one-hot batch -> transmitter -> average-power normalization over the
batch -> AWGN -> receiver -> cross-entropy.

Proposed: full alphabet -> transmitter -> average-power normalization over all
M messages -> gather the batch rows -> AWGN -> receiver -> cross-entropy. The
backward pass scatter-adds through the gather and then applies the coupled
normalization gradient, so every transmitter output row receives gradient even
when absent from the batch.

Paired runs share init_seed (identical initialization), data_seed (identical
batch sequences) and noise_seed (identical noise draws), so the architecture
is the only varied factor.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import comm, nn

ARCHITECTURES = ("baseline", "proposed")


@dataclass
class TrainConfig:
    M: int = 128
    batch_size: int = 64
    snr_db: float = 45.0
    power: float = 1.0
    architecture: str = "proposed"
    tx_hidden: tuple[int, ...] = (100, 100)
    rx_hidden: tuple[int, ...] = (100, 100)
    lr: float = 0.008
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    data_budget: int = 76800
    init_seed: int = 0
    data_seed: int = 0
    noise_seed: int | None = None  # defaults to data_seed

    def __post_init__(self):
        if self.M < 2 or (self.M & (self.M - 1)) != 0:
            raise ValueError("M must be a power of 2")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}")
        if self.noise_seed is None:
            self.noise_seed = self.data_seed
        self.tx_hidden = tuple(self.tx_hidden)
        self.rx_hidden = tuple(self.rx_hidden)

    @property
    def sigma2(self) -> float:
        return comm.sigma2_from_snr(self.power, self.snr_db)

    @property
    def n_steps(self) -> int:
        return self.data_budget // self.batch_size


@dataclass
class RunResult:
    config: TrainConfig
    loss_curve: list[float]
    tx: nn.Mlp
    rx: nn.Mlp
    constellation: np.ndarray  # M x 2, alphabet-normalized
    steps_taken: int
    diverged_at: int | None = None


def init_model(config: TrainConfig) -> tuple[nn.Mlp, nn.Mlp]:
    """Transmitter and receiver from a single init stream (architecture-independent)."""
    rng = np.random.default_rng(config.init_seed)
    tx = nn.build_mlp([config.M, *config.tx_hidden, 2], rng)
    rx = nn.build_mlp([2, *config.rx_hidden, config.M], rng)
    return tx, rx


def sample_batch(M: int, batch_size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform i.i.d. message indices, with replacement."""
    if M < 1 or batch_size < 1:
        raise ValueError("M and batch_size must be >= 1")
    return rng.integers(0, M, size=batch_size)


def loss_and_grads_baseline(
    tx: nn.Mlp,
    rx: nn.Mlp,
    batch: np.ndarray,
    noise: np.ndarray,
    power: float,
) -> tuple[float, list[np.ndarray], list[np.ndarray], np.ndarray]:
    """Loss, tx grads, rx grads and transmitted symbols for one baseline batch."""
    M = tx.in_dim
    X = np.eye(M)[batch]
    raw, tx_cache = nn.mlp_forward(X, tx)
    sent, s = comm.normalize_average(raw, power)
    y = sent + noise
    logits, rx_cache = nn.mlp_forward(y, rx)
    loss, dlogits = nn.softmax_cross_entropy(logits, batch)

    dy, rx_grads = nn.mlp_backward(dlogits, rx_cache, rx)
    draw = comm.normalize_average_backward(dy, raw, s, power)
    _, tx_grads = nn.mlp_backward(draw, tx_cache, tx)
    return loss, tx_grads, rx_grads, sent


def loss_and_grads_proposed(
    tx: nn.Mlp,
    rx: nn.Mlp,
    batch: np.ndarray,
    noise: np.ndarray,
    power: float,
) -> tuple[float, list[np.ndarray], list[np.ndarray], np.ndarray]:
    """Loss and grads for one proposed-architecture batch.

    Also returns the full alphabet-normalized constellation of this step.
    """
    M = tx.in_dim
    raw, tx_cache = nn.mlp_forward(np.eye(M), tx)
    points, s = comm.normalize_average(raw, power)
    sent = comm.gather(points, batch)
    y = sent + noise
    logits, rx_cache = nn.mlp_forward(y, rx)
    loss, dlogits = nn.softmax_cross_entropy(logits, batch)

    dy, rx_grads = nn.mlp_backward(dlogits, rx_cache, rx)
    dpoints = comm.gather_backward(dy, batch, M)
    draw = comm.normalize_average_backward(dpoints, raw, s, power)
    _, tx_grads = nn.mlp_backward(draw, tx_cache, tx)
    return loss, tx_grads, rx_grads, points


def train_step(
    tx: nn.Mlp,
    rx: nn.Mlp,
    optimizer: nn.Adam,
    batch: np.ndarray,
    noise_rng: np.random.Generator,
    config: TrainConfig,
) -> float:
    """One gradient step; draws one batch_size x 2 noise block from noise_rng."""
    noise = noise_rng.normal(0.0, np.sqrt(config.sigma2 / 2.0), size=(len(batch), 2))
    if config.architecture == "baseline":
        loss, tx_grads, rx_grads, _ = loss_and_grads_baseline(tx, rx, batch, noise, config.power)
    else:
        loss, tx_grads, rx_grads, _ = loss_and_grads_proposed(tx, rx, batch, noise, config.power)
    optimizer.step(tx_grads + rx_grads)
    return loss


def train_run(config: TrainConfig) -> RunResult:
    """Train for data_budget // batch_size steps; deterministic given the seeds."""
    tx, rx = init_model(config)
    optimizer = nn.Adam(
        tx.param_list() + rx.param_list(),
        lr=config.lr,
        beta1=config.beta1,
        beta2=config.beta2,
        epsilon=config.epsilon,
    )
    data_rng = np.random.default_rng(config.data_seed)
    noise_rng = np.random.default_rng(config.noise_seed)

    loss_curve: list[float] = []
    diverged_at = None
    steps = 0
    for step in range(config.n_steps):
        batch = sample_batch(config.M, config.batch_size, data_rng)
        loss = train_step(tx, rx, optimizer, batch, noise_rng, config)
        loss_curve.append(loss)
        steps = step + 1
        if not np.isfinite(loss):
            diverged_at = step
            break

    raw, _ = nn.mlp_forward(np.eye(config.M), tx)
    constellation, _ = comm.normalize_average(raw, config.power)
    return RunResult(config, loss_curve, tx, rx, constellation, steps, diverged_at)


def run_result_to_dict(result: RunResult) -> dict:
    """JSON-serializable view of a run (schema documented in the README)."""
    return {
        "config": asdict(result.config),
        "steps_taken": result.steps_taken,
        "diverged_at": result.diverged_at,
        "loss_curve": result.loss_curve,
        "constellation": result.constellation.tolist(),
        "rx": {
            "weights": [W.tolist() for W in result.rx.weights],
            "biases": [b.tolist() for b in result.rx.biases],
            "activations": result.rx.activations,
        },
        "tx": {
            "weights": [W.tolist() for W in result.tx.weights],
            "biases": [b.tolist() for b in result.tx.biases],
            "activations": result.tx.activations,
        },
    }


def mlp_from_dict(d: dict) -> nn.Mlp:
    return nn.Mlp(
        [np.asarray(W, dtype=float) for W in d["weights"]],
        [np.asarray(b, dtype=float) for b in d["biases"]],
        list(d["activations"]),
    )
