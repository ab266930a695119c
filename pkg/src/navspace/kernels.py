"""Loss and layer kernels for the two segmentation networks, as plain numpy.

Nothing here learns: these are forward evaluations of the categorical VAE
objective, the SSIM/MSE appearance loss, graph convolution, and bilinear
feature pooling, suitable for golden tests and property checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class OutOfSupportError(ValueError):
    """KL(q || p) is infinite: q puts mass where p has none."""


def gumbel_noise(rng: np.random.Generator, shape) -> np.ndarray:
    u = rng.uniform(size=shape)
    # uniform() can return exactly 0.0; nudge into the open interval
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
    return -np.log(-np.log(u))


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def gumbel_softmax_sample(logits, tau: float, rng: Optional[np.random.Generator] = None,
                          noise: Optional[np.ndarray] = None) -> np.ndarray:
    """Relaxed categorical sample ``softmax((logits + g) / tau)``.

    ``logits`` may carry leading batch axes; categories are on the last axis.
    Pass ``noise`` to supply the Gumbel draws directly instead of ``rng``.
    """
    if not tau > 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits must be finite")
    if noise is None:
        if rng is None:
            raise ValueError("need either rng or noise")
        noise = gumbel_noise(rng, logits.shape)
    return softmax((logits + np.asarray(noise, dtype=float)) / tau)


def categorical_kl(q, p) -> float:
    """KL(q || p) with 0 log 0 = 0. Raises OutOfSupportError when infinite."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape:
        raise ValueError(f"shape mismatch {q.shape} vs {p.shape}")
    pos = q > 0
    if np.any(pos & (p <= 0)):
        raise OutOfSupportError("q has mass outside the support of p")
    kl = float(np.sum(q[pos] * (np.log(q[pos]) - np.log(p[pos]))))
    return max(kl, 0.0)


@dataclass(frozen=True)
class Net1LossConfig:
    sigma_sq: float = 1.0
    k_samples: int = 1
    j_pixels: Optional[int] = None  # defaults to the image size

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise ValueError("sigma_sq must be positive")
        if self.k_samples < 1:
            raise ValueError("k_samples must be >= 1")
        if self.j_pixels is not None and self.j_pixels < 1:
            raise ValueError("j_pixels must be >= 1")


def uniform_prior(n_categories: int = 2) -> np.ndarray:
    return np.full(n_categories, 1.0 / n_categories)


def net1_loss(x, x_hat_samples: Sequence, q_field, prior, cfg: Net1LossConfig = Net1LossConfig()) -> float:
    """Single-image term of the categorical-VAE training loss.

    ``q_field`` has shape ``x.shape + (C,)``: one posterior per pixel.
    Returns ``sum_j KL(q_j || prior) + ||x - x_hat_k||^2 summed over the K
    samples / (2 K sigma^2) + (J / 2) log sigma^2``.
    """
    x = np.asarray(x, dtype=float)
    samples = [np.asarray(s, dtype=float) for s in x_hat_samples]
    if len(samples) != cfg.k_samples:
        raise ValueError(f"expected {cfg.k_samples} reconstructions, got {len(samples)}")
    for s in samples:
        if s.shape != x.shape:
            raise ValueError(f"reconstruction shape {s.shape} != image shape {x.shape}")
    q_field = np.asarray(q_field, dtype=float)
    prior = np.asarray(prior, dtype=float)
    if q_field.shape != x.shape + prior.shape:
        raise ValueError(f"posterior field shape {q_field.shape} does not match image {x.shape}")
    j = cfg.j_pixels if cfg.j_pixels is not None else x.size

    kl = sum(categorical_kl(q, prior) for q in q_field.reshape(-1, prior.size))
    sq = sum(float(np.sum((x - s) ** 2)) for s in samples)
    return kl + sq / (2.0 * cfg.k_samples * cfg.sigma_sq) + 0.5 * j * np.log(cfg.sigma_sq)


def ssim(a, b, window: int = 11, c1: float = 0.01 ** 2, c2: float = 0.03 ** 2) -> float:
    """Mean SSIM over all fully contained ``window`` x ``window`` patches.

    Uniform weighting; statistics are population moments of each patch.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd size")
    if window > min(a.shape):
        raise ValueError(f"window {window} larger than image {a.shape}")
    pa = sliding_window_view(a, (window, window)).reshape(-1, window * window)
    pb = sliding_window_view(b, (window, window)).reshape(-1, window * window)
    mu_a = pa.mean(axis=1)
    mu_b = pb.mean(axis=1)
    da = pa - mu_a[:, None]
    db = pb - mu_b[:, None]
    var_a = np.mean(da * da, axis=1)
    var_b = np.mean(db * db, axis=1)
    cov = np.mean(da * db, axis=1)
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def net2_loss(target, recon, lambda1: float = 0.8, lambda2: float = 0.2, window: int = 11,
              c1: float = 0.01 ** 2, c2: float = 0.03 ** 2) -> float:
    """``lambda1 (1 - SSIM) / 2 + lambda2 * MSE``; the weights must sum to one."""
    if abs(lambda1 + lambda2 - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {lambda1} + {lambda2}")
    target = np.asarray(target, dtype=float)
    recon = np.asarray(recon, dtype=float)
    if target.shape != recon.shape:
        raise ValueError(f"shape mismatch {target.shape} vs {recon.shape}")
    mse = float(np.sum((target - recon) ** 2)) / target.size
    s = ssim(target, recon, window=window, c1=c1, c2=c2)
    return lambda1 * (1.0 - s) / 2.0 + lambda2 * mse


ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda x: x,
    "relu": lambda x: np.maximum(x, 0.0),
    "tanh": np.tanh,
    "sigmoid": lambda x: 1.0 / (1.0 + np.exp(-x)),
}


@dataclass(frozen=True)
class GcnLayerParams:
    w0: np.ndarray  # (d_out, d_in), applied to the node itself
    w1: np.ndarray  # (d_out, d_in), applied to each neighbour
    activation: str = "relu"
    residual: bool = True

    def __post_init__(self):
        w0 = np.atleast_2d(np.asarray(self.w0, dtype=float))
        w1 = np.atleast_2d(np.asarray(self.w1, dtype=float))
        if w0.shape != w1.shape:
            raise ValueError(f"w0 {w0.shape} and w1 {w1.shape} differ")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "w0", w0)
        object.__setattr__(self, "w1", w1)


@dataclass(frozen=True)
class GraphSpec:
    adjacency: tuple  # neighbour index tuples, one per node
    features: np.ndarray  # (n_nodes, d)

    def __post_init__(self):
        adj = tuple(tuple(int(j) for j in nbrs) for nbrs in self.adjacency)
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim == 1:
            feats = feats[:, None]
        if len(adj) != len(feats):
            raise ValueError("adjacency and features disagree on node count")
        for i, nbrs in enumerate(adj):
            for j in nbrs:
                if j == i:
                    raise ValueError(f"self-loop at node {i}")
                if not 0 <= j < len(adj) or i not in adj[j]:
                    raise ValueError(f"edge {i}-{j} is not symmetric")
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "features", feats)

    @property
    def n_nodes(self) -> int:
        return len(self.adjacency)

    @classmethod
    def chain(cls, features) -> "GraphSpec":
        """Path graph 0 - 1 - ... - n-1, the polyline's vertex graph."""
        n = len(features)
        adj = [tuple(j for j in (i - 1, i + 1) if 0 <= j < n) for i in range(n)]
        return cls(adj, features)

    def with_features(self, features) -> "GraphSpec":
        return GraphSpec(self.adjacency, features)


def gcn_layer_forward(graph: GraphSpec, params: GcnLayerParams) -> np.ndarray:
    """``f_i' = act(w0 f_i + sum_{j in N(i)} w1 f_j)``, synchronous over all nodes."""
    f = graph.features
    if f.shape[1] != params.w0.shape[1]:
        raise ValueError(f"feature dim {f.shape[1]} != layer input dim {params.w0.shape[1]}")
    agg = np.zeros_like(f)
    for i, nbrs in enumerate(graph.adjacency):
        if nbrs:
            agg[i] = f[list(nbrs)].sum(axis=0)
    return ACTIVATIONS[params.activation](f @ params.w0.T + agg @ params.w1.T)


def gcn_stack_forward(graph: GraphSpec, layers: Sequence[GcnLayerParams]) -> np.ndarray:
    """Apply layers in order; residual layers add their input to their output."""
    if not layers:
        raise ValueError("empty layer stack")
    g = graph
    for i, layer in enumerate(layers):
        out = gcn_layer_forward(g, layer)
        if layer.residual:
            if out.shape != g.features.shape:
                raise ValueError(f"layer {i} changes width {g.features.shape[1]} -> "
                                 f"{out.shape[1]}; cannot add residual")
            out = out + g.features
        g = g.with_features(out)
    return g.features


def bilinear_pool(feature_map, point) -> np.ndarray:
    """Bilinearly interpolate an (H, W, d) map at real ``(u, v)`` = (column, row)."""
    fmap = np.asarray(feature_map, dtype=float)
    if fmap.ndim == 2:
        fmap = fmap[:, :, None]
    h, w = fmap.shape[:2]
    u, v = float(point[0]), float(point[1])
    if not (0.0 <= u <= w - 1 and 0.0 <= v <= h - 1):
        raise ValueError(f"point ({u}, {v}) outside [0, {w - 1}] x [0, {h - 1}]")
    u0 = min(int(np.floor(u)), max(w - 2, 0))
    v0 = min(int(np.floor(v)), max(h - 2, 0))
    u1, v1 = min(u0 + 1, w - 1), min(v0 + 1, h - 1)
    du, dv = u - u0, v - v0
    return ((1 - du) * (1 - dv) * fmap[v0, u0] + du * (1 - dv) * fmap[v0, u1]
            + (1 - du) * dv * fmap[v1, u0] + du * dv * fmap[v1, u1])


def bilinear_sample(field: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorised bilinear lookup of a 2-D field at in-range points."""
    h, w = field.shape
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u0 = np.clip(np.floor(u).astype(np.int64), 0, max(w - 2, 0))
    v0 = np.clip(np.floor(v).astype(np.int64), 0, max(h - 2, 0))
    u1 = np.minimum(u0 + 1, w - 1)
    v1 = np.minimum(v0 + 1, h - 1)
    du, dv = u - u0, v - v0
    return ((1 - du) * (1 - dv) * field[v0, u0] + du * (1 - dv) * field[v0, u1]
            + (1 - du) * dv * field[v1, u0] + du * dv * field[v1, u1])
