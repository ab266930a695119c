"""Quick numeric checks of the loss and layer kernels, runnable without pytest."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .kernels import (GcnLayerParams, GraphSpec, Net1LossConfig, categorical_kl, gcn_layer_forward,
                      gumbel_softmax_sample, net1_loss, softmax, ssim, uniform_prior)


def _kl_checks(rng) -> str:
    for _ in range(200):
        q = rng.dirichlet(np.ones(5))
        p = rng.dirichlet(np.ones(5))
        if categorical_kl(q, p) < 0:
            raise AssertionError("negative divergence")
        if abs(categorical_kl(q, q)) > 1e-12:
            raise AssertionError("KL(q, q) is not zero")
        if not np.allclose(q, p) and categorical_kl(q, p) <= 0:
            raise AssertionError("KL zero for distinct distributions")
    return "200 random pairs"


def _gumbel_checks(rng) -> str:
    logits = np.array([1.0, 0.0, -0.5, 2.0])
    draws = gumbel_softmax_sample(np.broadcast_to(logits, (100_000, 4)), tau=0.5, rng=rng)
    if np.any(draws < 0) or np.max(np.abs(draws.sum(axis=1) - 1)) > 1e-12:
        raise AssertionError("sample left the simplex")
    freq = np.bincount(draws.argmax(axis=1), minlength=4) / len(draws)
    gap = float(np.max(np.abs(freq - softmax(logits))))
    if gap > 0.02:
        raise AssertionError(f"argmax frequency off by {gap:.4f}")
    return f"max argmax-frequency gap {gap:.4f}"


def _ssim_checks(rng) -> str:
    for _ in range(20):
        a = rng.random((16, 16))
        b = rng.random((16, 16))
        if abs(ssim(a, a) - 1.0) > 1e-12:
            raise AssertionError("ssim(x, x) != 1")
        if abs(ssim(a, b) - ssim(b, a)) > 1e-12:
            raise AssertionError("ssim not symmetric")
    return "20 random pairs"


def _net1_fixture(_rng) -> str:
    x = np.array([[1.0, 0.0], [0.0, 1.0]])
    x_hat = np.array([[0.5, 0.0], [0.0, 1.0]])
    q = np.full((2, 2, 2), 0.5)
    q[0, 0] = (1.0, 0.0)
    got = net1_loss(x, [x_hat], q, uniform_prior(2), Net1LossConfig(sigma_sq=2.0))
    # KL((1,0) || uniform) = log 2; 0.25 / (2 * 2); (4 / 2) log 2
    want = math.log(2) + 0.0625 + 2 * math.log(2)
    if abs(got - want) > 1e-10:
        raise AssertionError(f"net1 loss {got!r} != {want!r}")
    return f"{got:.12f}"


def _gcn_fixture(_rng) -> str:
    out = gcn_layer_forward(GraphSpec.chain([1.0, 2.0, 3.0]),
                            GcnLayerParams([[2.0]], [[1.0]], activation="identity", residual=False))
    if out.ravel().tolist() != [4.0, 8.0, 8.0]:
        raise AssertionError(f"chain fixture gave {out.ravel().tolist()}")
    return "(1, 2, 3) -> (4, 8, 8)"


CHECKS: dict[str, Callable] = {
    "kl": _kl_checks,
    "gumbel_softmax": _gumbel_checks,
    "ssim": _ssim_checks,
    "net1_fixture": _net1_fixture,
    "gcn_chain": _gcn_fixture,
}


def run_selftest(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Run every check; returns ``(name, passed, detail)`` rows."""
    rows = []
    for name, check in CHECKS.items():
        rng = np.random.default_rng([seed, len(rows)])
        try:
            rows.append((name, True, check(rng)))
        except AssertionError as exc:
            rows.append((name, False, str(exc)))
    return rows
