"""Graph-convolutional autoencoder with a cluster-aware training loss.

Two-layer encoder and decoder over the normalized adjacency, trained
full-graph by plain gradient descent under a 1cycle learning-rate
schedule.  The loss adds, on top of reconstruction error, a term
pulling each embedding toward its nearest cluster center and an L2
embedding regularizer; gradients are hand-derived reverse mode (the
cluster centers are constants within a step).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import spectral_cluster
from .features import FeatureBundle
from .metrics import Partition

SeedLike = "int | np.random.SeedSequence"


class NonFiniteTensorError(FloatingPointError):
    """A forward or backward tensor contains NaN or infinity."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, detail: str):
        super().__init__(f"training diverged at epoch {epoch}: {detail}")
        self.epoch = epoch


@dataclass
class GcnParams:
    """Weight matrices of the 2-layer encoder and 2-layer decoder."""

    W1: np.ndarray
    W2: np.ndarray
    W3: np.ndarray
    W4: np.ndarray
    seed: int | None = None

    def copy(self) -> "GcnParams":
        return GcnParams(self.W1.copy(), self.W2.copy(), self.W3.copy(), self.W4.copy(), self.seed)


@dataclass(frozen=True)
class TrainingConfig:
    k: int = 5
    epochs: int = 300
    base_lr: float = 0.01
    max_lr: float = 0.1
    lr_update_interval: int = 200
    dropout_rate: float = 0.2
    alpha1: float = 0.1
    alpha2: float = 0.1
    alpha3: float = 0.1
    h1: int = 32
    h2: int = 32

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")
        if not 0 < self.base_lr <= self.max_lr:
            raise ValueError("need 0 < base_lr <= max_lr")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must be in [0, 1)")
        if min(self.alpha1, self.alpha2, self.alpha3) < 0:
            raise ValueError("loss coefficients must be non-negative")
        if self.h1 < 1 or self.h2 < 1:
            raise ValueError("hidden sizes must be positive")
        if self.lr_update_interval < 1:
            raise ValueError("lr_update_interval must be positive")


def _check_finite(name: str, arr: np.ndarray) -> np.ndarray:
    if not np.isfinite(arr).all():
        raise NonFiniteTensorError(f"tensor {name} contains non-finite values")
    return arr


def init_params(dims: tuple[int, int, int], seed) -> GcnParams:
    """Zero-mean weights scaled by 1/sqrt(fan_in), deterministic per seed."""
    in_dim, h1, h2 = dims
    if min(in_dim, h1, h2) <= 0:
        raise ValueError(f"dimensions must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    def draw(fan_in, fan_out):
        return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out))
    return GcnParams(
        W1=draw(in_dim, h1),
        W2=draw(h1, h2),
        W3=draw(h2, h1),
        W4=draw(h1, in_dim),
        seed=seed if isinstance(seed, int) else None,
    )


def make_dropout_mask(shape: tuple[int, int], dropout_rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: entries are 0 or 1/(1-p)."""
    if not 0 <= dropout_rate < 1:
        raise ValueError("dropout_rate must be in [0, 1)")
    if dropout_rate == 0:
        return np.ones(shape)
    keep = rng.random(shape) >= dropout_rate
    return keep / (1.0 - dropout_rate)


@dataclass(frozen=True, eq=False)
class _Forward:
    """Cached activations of one full forward pass."""

    Z1: np.ndarray
    H1: np.ndarray
    H1d: np.ndarray  # after dropout scaling
    Z2: np.ndarray
    E: np.ndarray
    Z3: np.ndarray
    H3: np.ndarray
    Z4: np.ndarray
    R: np.ndarray
    mask: np.ndarray | None


def _forward(X: np.ndarray, A_hat: np.ndarray, params: GcnParams, mask: np.ndarray | None) -> _Forward:
    # overflow is legal here; _check_finite turns it into a typed error
    with np.errstate(over="ignore", invalid="ignore"):
        Z1 = _check_finite("Z1", A_hat @ X @ params.W1)
        H1 = np.maximum(Z1, 0.0)
        H1d = H1 if mask is None else H1 * mask
        Z2 = _check_finite("Z2", A_hat @ H1d @ params.W2)
        E = np.maximum(Z2, 0.0)
        Z3 = _check_finite("Z3", A_hat @ E @ params.W3)
        H3 = np.maximum(Z3, 0.0)
        Z4 = _check_finite("Z4", A_hat @ H3 @ params.W4)
        R = np.maximum(Z4, 0.0)
    return _Forward(Z1=Z1, H1=H1, H1d=H1d, Z2=Z2, E=E, Z3=Z3, H3=H3, Z4=Z4, R=R, mask=mask)


def encode(
    X: np.ndarray,
    A_hat: np.ndarray,
    params: GcnParams,
    dropout_rate: float = 0.0,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Two graph convolutions with ReLU; dropout on the hidden layer when training."""
    if X.shape[0] != A_hat.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but A_hat is {A_hat.shape[0]}x{A_hat.shape[1]}")
    mask = None
    if training and dropout_rate > 0:
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        mask = make_dropout_mask((X.shape[0], params.W1.shape[1]), dropout_rate, rng)
    return _forward(X, A_hat, params, mask).E


def decode(E: np.ndarray, A_hat: np.ndarray, params: GcnParams) -> np.ndarray:
    """Mirror of encode: two graph convolutions mapping embeddings back to features."""
    if E.shape[1] != params.W3.shape[0]:
        raise ValueError(f"embedding width {E.shape[1]} does not match W3 rows {params.W3.shape[0]}")
    Z3 = _check_finite("Z3", A_hat @ E @ params.W3)
    H3 = np.maximum(Z3, 0.0)
    Z4 = _check_finite("Z4", A_hat @ H3 @ params.W4)
    return np.maximum(Z4, 0.0)


def cluster_loss(embeddings: np.ndarray, centers: np.ndarray) -> float:
    """Sum over points of the Euclidean distance to the nearest center."""
    if centers.size == 0:
        raise ValueError("centers must be non-empty")
    diff = embeddings[:, None, :] - centers[None, :, :]
    dists = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return float(dists.min(axis=1).sum())


def training_loss(
    X: np.ndarray,
    reconstruction: np.ndarray,
    embeddings: np.ndarray,
    centers: np.ndarray | None,
    alpha1: float,
    alpha2: float,
    alpha3: float,
) -> float:
    """alpha1 * mean sq. error + alpha2 * cluster pull + alpha3 * mean sq. norm."""
    if min(alpha1, alpha2, alpha3) < 0:
        raise ValueError("loss coefficients must be non-negative")
    total = 0.0
    if alpha1 != 0:
        total += alpha1 * float(np.mean((reconstruction - X) ** 2))
    if alpha2 != 0:
        if centers is None:
            raise ValueError("cluster term requires centers")
        total += alpha2 * cluster_loss(embeddings, centers)
    if alpha3 != 0:
        total += alpha3 * float(np.mean(np.sum(embeddings**2, axis=1)))
    return total


@dataclass(frozen=True, eq=False)
class GradientResult:
    loss: float
    dW1: np.ndarray
    dW2: np.ndarray
    dW3: np.ndarray
    dW4: np.ndarray
    embeddings: np.ndarray = field(repr=False, default=None)
    reconstruction: np.ndarray = field(repr=False, default=None)


def gradients(
    params: GcnParams,
    X: np.ndarray,
    A_hat: np.ndarray,
    centers: np.ndarray | None,
    alpha1: float,
    alpha2: float,
    alpha3: float,
    dropout_mask: np.ndarray | None = None,
) -> GradientResult:
    """Loss and exact dL/dW1..dW4 for one full-graph step.

    Cluster centers are treated as constants.  ReLU uses the 0-at-0
    subgradient; the cluster distance gradient is 0 at a center.
    """
    fw = _forward(X, A_hat, params, dropout_mask)
    n, m = X.shape
    with np.errstate(over="ignore", invalid="ignore"):
        loss = training_loss(X, fw.R, fw.E, centers, alpha1, alpha2, alpha3)

        # dL/dE from the cluster and regularizer terms
        dE = np.zeros_like(fw.E)
        if alpha2 != 0:
            diff = fw.E[:, None, :] - centers[None, :, :]
            dists = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            nearest = dists.argmin(axis=1)
            vecs = fw.E - centers[nearest]
            norms = dists[np.arange(n), nearest]
            safe = norms > 0
            dE[safe] += alpha2 * vecs[safe] / norms[safe, None]
        if alpha3 != 0:
            dE += alpha3 * 2.0 * fw.E / n

        # decoder backward
        dR = alpha1 * 2.0 * (fw.R - X) / (n * m) if alpha1 != 0 else np.zeros_like(fw.R)
        G4 = dR * (fw.Z4 > 0)
        dW4 = (A_hat @ fw.H3).T @ G4
        dH3 = A_hat @ G4 @ params.W4.T
        G3 = dH3 * (fw.Z3 > 0)
        dW3 = (A_hat @ fw.E).T @ G3
        dE += A_hat @ G3 @ params.W3.T

        # encoder backward
        G2 = dE * (fw.Z2 > 0)
        dW2 = (A_hat @ fw.H1d).T @ G2
        dH1d = A_hat @ G2 @ params.W2.T
        dH1 = dH1d if fw.mask is None else dH1d * fw.mask
        G1 = dH1 * (fw.Z1 > 0)
        dW1 = (A_hat @ X).T @ G1

    for name, g in (("dW1", dW1), ("dW2", dW2), ("dW3", dW3), ("dW4", dW4)):
        _check_finite(name, g)
    return GradientResult(
        loss=loss, dW1=dW1, dW2=dW2, dW3=dW3, dW4=dW4,
        embeddings=fw.E, reconstruction=fw.R,
    )


def one_cycle_lr(step: float, total_steps: int, base_lr: float, max_lr: float) -> float:
    """Piecewise-linear 1cycle rate: up 45%, down 45%, annihilate to base/100."""
    if total_steps <= 0:
        raise ValueError("total_steps must be positive")
    if step < 0:
        raise ValueError("step must be non-negative")
    step = min(step, total_steps)
    p1 = 0.45 * total_steps
    p2 = 0.90 * total_steps
    if step <= p1:
        return base_lr + (max_lr - base_lr) * (step / p1)
    if step <= p2:
        return max_lr - (max_lr - base_lr) * ((step - p1) / (p2 - p1))
    return base_lr - (base_lr - base_lr / 100.0) * ((step - p2) / (total_steps - p2))


@dataclass(frozen=True, eq=False)
class TrainResult:
    """Unpacks as (embeddings, partition); losses kept for diagnostics."""

    embeddings: np.ndarray
    partition: Partition
    losses: tuple[float, ...]

    def __iter__(self):
        return iter((self.embeddings, self.partition))


def _estimate_centers(E: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Nearest-center assignment then per-cluster means; empty keeps old center."""
    diff = E[:, None, :] - centers[None, :, :]
    nearest = np.einsum("ijk,ijk->ij", diff, diff).argmin(axis=1)
    out = centers.copy()
    for j in range(centers.shape[0]):
        mask = nearest == j
        if mask.any():
            out[j] = E[mask].mean(axis=0)
    return out


def _centers_from_labels(E: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    return np.vstack([E[labels == j].mean(axis=0) for j in range(k)])


def _repair_empty_clusters(E: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Move the farthest point of the largest cluster into each empty one."""
    labels = labels.copy()
    for j in range(k):
        while not np.any(labels == j):
            sizes = np.bincount(labels, minlength=k)
            big = int(sizes.argmax())
            members = np.nonzero(labels == big)[0]
            center = E[members].mean(axis=0)
            far = members[((E[members] - center) ** 2).sum(axis=1).argmax()]
            labels[far] = j
    return labels


def train(bundle: FeatureBundle, config: TrainingConfig, seed) -> TrainResult:
    """Full training run: pretrain, spectral-init centers, descend, cluster.

    All randomness (weight init, dropout, both spectral clusterings)
    derives from `seed`; identical inputs give identical partitions.
    """
    n = len(bundle.nodes)
    if config.k > n:
        raise ValueError(f"k={config.k} exceeds number of classes {n}")
    X, A_hat = bundle.X, bundle.A_hat
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    init_ss, dropout_ss, spectral0_ss, spectral1_ss = root.spawn(4)
    params = init_params((X.shape[1], config.h1, config.h2), init_ss)
    dropout_rng = np.random.default_rng(dropout_ss)

    # one reconstruction-only epoch at the base rate, no dropout
    try:
        g = gradients(params, X, A_hat, None, config.alpha1, 0.0, 0.0)
    except NonFiniteTensorError as exc:
        raise DivergenceError(0, str(exc)) from None
    for W, dW in ((params.W1, g.dW1), (params.W2, g.dW2), (params.W3, g.dW3), (params.W4, g.dW4)):
        W -= config.base_lr * dW

    E0 = encode(X, A_hat, params)
    centers = _centers_from_labels(E0, spectral_cluster(E0, config.k, spectral0_ss).labels, config.k)

    losses: list[float] = []
    for epoch in range(config.epochs):
        sched_step = (epoch // config.lr_update_interval) * config.lr_update_interval
        lr = one_cycle_lr(sched_step, config.epochs, config.base_lr, config.max_lr)
        mask = None
        if config.dropout_rate > 0:
            mask = make_dropout_mask((n, config.h1), config.dropout_rate, dropout_rng)
        try:
            g = gradients(
                params, X, A_hat, centers,
                config.alpha1, config.alpha2, config.alpha3, dropout_mask=mask,
            )
        except NonFiniteTensorError as exc:
            raise DivergenceError(epoch, str(exc)) from None
        if not np.isfinite(g.loss):
            raise DivergenceError(epoch, f"loss={g.loss!r}")
        losses.append(g.loss)
        for W, dW in ((params.W1, g.dW1), (params.W2, g.dW2), (params.W3, g.dW3), (params.W4, g.dW4)):
            W -= lr * dW
        centers = _estimate_centers(encode(X, A_hat, params), centers)

    E_final = encode(X, A_hat, params)
    labels = spectral_cluster(E_final, config.k, spectral1_ss).labels
    labels = _repair_empty_clusters(E_final, labels, config.k)
    return TrainResult(
        embeddings=E_final,
        partition=Partition.from_labels(bundle.nodes, labels.tolist()),
        losses=tuple(losses),
    )
