"""Minimal feedforward engine with hand-derived gradients.

Layers are affine with ReLU on hidden layers and identity output.  The
four coupled nets of the dual-autoencoder variants are trained through
total_loss, which shares forward traces and accumulates every gradient
path analytically.  No autodiff anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class LossWeights:
    k_r: float = 1.0
    k_z: float = 1.0
    k_t: float = 1.0

    def __post_init__(self):
        if min(self.k_r, self.k_z, self.k_t) < 0:
            raise InputError("loss weights must be non-negative")


@dataclass(frozen=True)
class ContrastiveParams:
    """lam=None means the per-batch default 1/(n-1), which balances the
    total negative mass against the n positive terms."""

    lam: float | None = None
    margin: float = 1.0

    def __post_init__(self):
        if self.lam is not None and self.lam < 0:
            raise InputError("lambda must be non-negative")
        if self.margin < 0:
            raise InputError("margin must be non-negative")

    def resolve_lam(self, n: int) -> float:
        if self.lam is not None:
            return self.lam
        return 1.0 / (n - 1) if n > 1 else 0.0


class FeedForwardNet:
    """Affine + ReLU chain. weights[k] has shape (dims[k+1], dims[k])."""

    def __init__(self, dims, weights, biases):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 2:
            raise InputError("need at least input and output dims")
        if any(d < 1 for d in dims):
            raise InputError("layer dims must be positive")
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise InputError("one weight matrix and bias vector per layer")
        self.dims = dims
        self.weights = []
        self.biases = []
        for k, (w, b) in enumerate(zip(weights, biases)):
            w = np.asarray(w, dtype=float)
            b = np.asarray(b, dtype=float)
            if w.shape != (dims[k + 1], dims[k]):
                raise InputError(f"layer {k}: weight shape {w.shape} != {(dims[k+1], dims[k])}")
            if b.shape != (dims[k + 1],):
                raise InputError(f"layer {k}: bias shape {b.shape} != {(dims[k+1],)}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise InputError(f"layer {k}: non-finite parameters")
            self.weights.append(w)
            self.biases.append(b)

    @classmethod
    def initialize(cls, dims, rng) -> "FeedForwardNet":
        """Uniform(-limit, limit) weights with limit = sqrt(6/(fan_in+fan_out)),
        zero biases."""
        weights = []
        biases = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(dims, weights, biases)

    def parameters(self) -> list:
        """Interleaved [W0, b0, W1, b1, ...]; the arrays themselves, not copies."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.dims[0]:
            raise InputError(f"input width {x.shape} incompatible with first layer dim {self.dims[0]}")
        return x, squeeze

    def forward(self, x) -> np.ndarray:
        x, squeeze = self._check_input(x)
        a = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            a = z if k == last else np.maximum(z, 0.0)
        return a[0] if squeeze else a

    def forward_trace(self, x) -> "ForwardTrace":
        """Forward pass that keeps per-layer inputs and pre-activations
        around for a later backward call. Batch-only (n, dim) interface."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.dims[0]:
            raise InputError(f"trace input must be (n, {self.dims[0]})")
        inputs = [x]
        preacts = []
        a = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            preacts.append(z)
            a = z if k == last else np.maximum(z, 0.0)
            if k != last:
                inputs.append(a)
        return ForwardTrace(net=self, inputs=inputs, preacts=preacts, out=a)


@dataclass
class ForwardTrace:
    net: FeedForwardNet
    inputs: list  # input to each layer, length = n_layers
    preacts: list  # pre-activation of each layer
    out: np.ndarray

    def backward(self, grad_out: np.ndarray):
        """Returns (param grads interleaved like parameters(), grad w.r.t. input)."""
        net = self.net
        grad_out = np.asarray(grad_out, dtype=float)
        if grad_out.shape != self.out.shape:
            raise InputError("grad_out shape mismatch")
        n_layers = len(net.weights)
        grads_w = [None] * n_layers
        grads_b = [None] * n_layers
        da = grad_out
        for k in range(n_layers - 1, -1, -1):
            if k == n_layers - 1:
                dz = da
            else:
                dz = da * (self.preacts[k] > 0.0)
            grads_w[k] = dz.T @ self.inputs[k]
            grads_b[k] = dz.sum(axis=0)
            da = dz @ net.weights[k]
        flat = []
        for gw, gb in zip(grads_w, grads_b):
            flat.append(gw)
            flat.append(gb)
        return flat, da


@dataclass
class DualNets:
    """The four nets of a dual autoencoder."""

    force_encoder: FeedForwardNet
    force_decoder: FeedForwardNet
    phrase_encoder: FeedForwardNet
    phrase_decoder: FeedForwardNet

    def items(self):
        return [
            ("force_encoder", self.force_encoder),
            ("force_decoder", self.force_decoder),
            ("phrase_encoder", self.phrase_encoder),
            ("phrase_decoder", self.phrase_decoder),
        ]


def mse_loss(pred, target):
    """Mean of squared componentwise differences over every entry.
    Gradient w.r.t. pred is 2(pred-target)/count."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise InputError(f"shape mismatch {pred.shape} vs {target.shape}")
    diff = pred - target
    value = float(np.mean(diff * diff))
    grad = 2.0 * diff / diff.size
    return value, grad


def _block_softmax(logits):
    """Softmax over each half of the last axis, with max-subtraction."""
    shaped = logits.reshape(logits.shape[:-1] + (2, logits.shape[-1] // 2))
    shifted = shaped - shaped.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=-1, keepdims=True)
    return p.reshape(logits.shape)

def ce_loss(logits, target):
    """Blockwise softmax cross-entropy over the two halves of a two-hot
    phrase vector; batched inputs average over rows."""
    logits = np.asarray(logits, dtype=float)
    target = np.asarray(target, dtype=float)
    if logits.shape != target.shape:
        raise InputError(f"shape mismatch {logits.shape} vs {target.shape}")
    if logits.shape[-1] % 2 != 0:
        raise InputError("vector length must split into two equal blocks")
    single = logits.ndim == 1
    if single:
        logits = logits[None, :]
        target = target[None, :]
    p = _block_softmax(logits)
    # -sum(t*log p) over both blocks, averaged over the batch
    logp = np.log(np.clip(p, 1e-300, None))
    value = float(-(target * logp).sum() / logits.shape[0])
    grad = (p - target) / logits.shape[0]
    if single:
        grad = grad[0]
    return value, grad


def contrastive_loss(zf, zp, params: ContrastiveParams):
    """Paired-batch latent alignment loss.

    Positive terms pull each pair together (squared distance); every
    cross pairing within the batch acts as a negative and is penalized
    while its squared distance sits inside the margin.  A hinge exactly
    at the margin is inactive (zero gradient).  Returns (value, dzf, dzp).
    """
    zf = np.asarray(zf, dtype=float)
    zp = np.asarray(zp, dtype=float)
    if zf.ndim == 1:
        zf = zf[None, :]
    if zp.ndim == 1:
        zp = zp[None, :]
    if zf.shape != zp.shape:
        raise InputError(f"batch mismatch {zf.shape} vs {zp.shape}")
    n = zf.shape[0]
    if n < 1:
        raise InputError("batch must be non-empty")
    lam = params.resolve_lam(n)
    diff = zf[:, None, :] - zp[None, :, :]  # (n, n, k)
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    pos = float(np.trace(d2))
    off = ~np.eye(n, dtype=bool)
    active = off & (params.margin - d2 > 0.0)
    hinge = float((params.margin - d2)[active].sum()) if active.any() else 0.0
    value = pos + lam * hinge
    dzf = np.zeros_like(zf)
    dzp = np.zeros_like(zp)
    pos_diff = zf - zp
    dzf += 2.0 * pos_diff
    dzp -= 2.0 * pos_diff
    if lam != 0.0 and active.any():
        w = active.astype(float)
        # d/dzf_i of -(d2_ij) summed over active j
        dzf -= 2.0 * lam * np.einsum("ij,ijk->ik", w, diff)
        dzp += 2.0 * lam * np.einsum("ij,ijk->jk", w, diff)
    return value, dzf, dzp


def _phrase_err(kind):
    if kind == "ce":
        return ce_loss
    if kind == "mse":
        return mse_loss
    raise InputError(f"unknown phrase error kind {kind!r}")


def _accumulate(into: dict, name: str, grads: list):
    slot = into.get(name)
    if slot is None:
        into[name] = list(grads)
    else:
        for k, g in enumerate(grads):
            slot[k] = slot[k] + g


def translation_loss(xf, xp, nets: DualNets, phrase_err: str = "ce"):
    """Cross-decoding loss: decode the phrase latent to force space and the
    force latent to phrase space, each scored against the paired original.
    Returns (value, grads keyed by net name)."""
    err_p = _phrase_err(phrase_err)
    xf = np.atleast_2d(np.asarray(xf, dtype=float))
    xp = np.atleast_2d(np.asarray(xp, dtype=float))
    tp = nets.phrase_encoder.forward_trace(xp)
    tf = nets.force_encoder.forward_trace(xf)
    tdf = nets.force_decoder.forward_trace(tp.out)
    tdp = nets.phrase_decoder.forward_trace(tf.out)
    l_f, d_f = mse_loss(tdf.out, xf)
    l_p, d_p = err_p(tdp.out, xp)
    value = l_f + l_p
    grads: dict[str, list] = {}
    g, dz_p = tdf.backward(d_f)
    _accumulate(grads, "force_decoder", g)
    g, dz_f = tdp.backward(d_p)
    _accumulate(grads, "phrase_decoder", g)
    g, _ = tp.backward(dz_p)
    _accumulate(grads, "phrase_encoder", g)
    g, _ = tf.backward(dz_f)
    _accumulate(grads, "force_encoder", g)
    return value, grads


def total_loss(
    xf,
    xp,
    nets: DualNets,
    weights: LossWeights = LossWeights(),
    cparams: ContrastiveParams = ContrastiveParams(),
    phrase_err: str = "ce",
):
    """Weighted sum of both reconstruction losses, the latent contrastive
    loss, and the translation loss, with gradients for all four nets.

    Returns (value, components dict, grads keyed by net name).  Forward
    traces are shared across the loss terms so each encoder receives the
    sum of every gradient path that touches it.
    """
    err_p = _phrase_err(phrase_err)
    xf = np.atleast_2d(np.asarray(xf, dtype=float))
    xp = np.atleast_2d(np.asarray(xp, dtype=float))
    if xf.shape[0] != xp.shape[0]:
        raise InputError("paired batch size mismatch")

    tf = nets.force_encoder.forward_trace(xf)
    tp = nets.phrase_encoder.forward_trace(xp)
    zf, zp = tf.out, tp.out
    tdf_r = nets.force_decoder.forward_trace(zf)
    tdp_r = nets.phrase_decoder.forward_trace(zp)
    tdf_t = nets.force_decoder.forward_trace(zp)
    tdp_t = nets.phrase_decoder.forward_trace(zf)

    l_rf, d_rf = mse_loss(tdf_r.out, xf)
    l_rp, d_rp = err_p(tdp_r.out, xp)
    l_c, dzf_c, dzp_c = contrastive_loss(zf, zp, cparams)
    l_tf, d_tf = mse_loss(tdf_t.out, xf)
    l_tp, d_tp = err_p(tdp_t.out, xp)

    components = {
        "recon_force": l_rf,
        "recon_phrase": l_rp,
        "contrastive": l_c,
        "translation": l_tf + l_tp,
    }
    value = (
        weights.k_r * (l_rf + l_rp)
        + weights.k_z * l_c
        + weights.k_t * (l_tf + l_tp)
    )

    grads: dict[str, list] = {}
    dzf = weights.k_z * dzf_c
    dzp = weights.k_z * dzp_c
    if weights.k_r != 0.0:
        g, d = tdf_r.backward(weights.k_r * d_rf)
        _accumulate(grads, "force_decoder", g)
        dzf = dzf + d
        g, d = tdp_r.backward(weights.k_r * d_rp)
        _accumulate(grads, "phrase_decoder", g)
        dzp = dzp + d
    if weights.k_t != 0.0:
        g, d = tdf_t.backward(weights.k_t * d_tf)
        _accumulate(grads, "force_decoder", g)
        dzp = dzp + d
        g, d = tdp_t.backward(weights.k_t * d_tp)
        _accumulate(grads, "phrase_decoder", g)
        dzf = dzf + d
    g, _ = tf.backward(dzf)
    _accumulate(grads, "force_encoder", g)
    g, _ = tp.backward(dzp)
    _accumulate(grads, "phrase_encoder", g)
    for name, net in nets.items():
        if name not in grads:
            grads[name] = [np.zeros_like(p) for p in net.parameters()]
    return value, components, grads


class Adam:
    """Adaptive-moment optimizer over a fixed list of parameter arrays;
    step() updates them in place."""

    def __init__(self, params: list, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise InputError("learning rate must be positive")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: list):
        if len(grads) != len(self.params):
            raise InputError("gradient list length mismatch")
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            g = np.asarray(g, dtype=float)
            if g.shape != p.shape:
                raise InputError("gradient shape mismatch")
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
