"""The five trainable translation models behind one interface.

dae_b / dae_s: dual autoencoders with a shared 16-dim latent space, binary
or embedding phrase representation.  dmlp_b / dmlp_s: two independent
direct-mapping MLPs, no shared latent.  svm_knn: per-slot linear
classifiers over the final 3-dim impulse plus k=1 exemplar recall.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import (
    DIRECTIONS,
    EMBED_DIM,
    FEATURE_DIM,
    GRID_N,
    HORIZON_S,
    LATENT_DIM,
    MODIFIERS,
    PHRASE_VEC_DIM,
    VOCAB_VERSION,
    ForceProfile,
    ImpulseFeature,
    Phrase,
    direction_unit_vector,
    phrase_to_text,
)
from .errors import CheckpointError, InputError
from .lang import (
    HashingProvider,
    TableProvider,
    decode_binary,
    encode_binary,
    nearest_mvv,
    nearest_phrase_to_vector,
    table_provider,
)
from .nn import (
    Adam,
    ContrastiveParams,
    DualNets,
    FeedForwardNet,
    LossWeights,
    ce_loss,
    mse_loss,
    total_loss,
)
from .signal import NormalizationParams, fit_normalizer, impulse_to_force, integrate_impulse, normalize, denormalize, resample

VARIANTS = ("dae_b", "dae_s", "dmlp_b", "dmlp_s", "svm_knn")

CHECKPOINT_FORMAT_VERSION = 1

_FORCE_ENC = (FEATURE_DIM, 256, 64, LATENT_DIM)
_FORCE_DEC = (LATENT_DIM, 64, 256, FEATURE_DIM)
_BIN_ENC = (PHRASE_VEC_DIM, 48, LATENT_DIM)
_BIN_DEC = (LATENT_DIM, 48, PHRASE_VEC_DIM)
_EMB_ENC = (EMBED_DIM, 256, 64, LATENT_DIM)
_EMB_DEC = (LATENT_DIM, 64, 256, EMBED_DIM)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    batch_size: int = 32
    learning_rate: float = 1e-3
    weights: LossWeights = LossWeights()
    contrastive: ContrastiveParams = ContrastiveParams()
    svm_learning_rate: float = 1e-2
    svm_epochs: int = 200
    svm_l2: float = 1e-4

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.svm_epochs < 1:
            raise InputError("epochs and batch size must be positive")
        if self.learning_rate <= 0 or self.svm_learning_rate <= 0:
            raise InputError("learning rates must be positive")
        if self.svm_l2 < 0:
            raise InputError("L2 weight must be non-negative")


def profile_feature(profile: ForceProfile) -> ImpulseFeature:
    """resample -> cumulative impulse, the shared preprocessing chain."""
    return integrate_impulse(resample(profile))


def _phrase_rep(phrase: Phrase, kind: str, provider) -> np.ndarray:
    if kind == "binary":
        return encode_binary(phrase)
    return provider.embed(phrase_to_text(phrase))


def _provider_info(provider):
    if provider is None:
        return None
    if isinstance(provider, HashingProvider):
        return {"kind": "hashing", "seed": provider.seed}
    if isinstance(provider, TableProvider):
        return {"kind": "table", "path": provider.source}
    raise InputError(f"cannot describe provider {type(provider).__name__} in a checkpoint")


class _TrainedModel:
    """Common state: normalization, seed, config, provider, loss history."""

    variant: str
    phrase_kind: str

    def __init__(self, norm, seed, config, provider, loss_history):
        self.norm = norm
        self.seed = seed
        self.config = config
        self.provider = provider
        self.loss_history = loss_history

    def _force_input(self, profile: ForceProfile) -> np.ndarray:
        return normalize(profile_feature(profile), self.norm).values

    def _decode_phrase_output(self, out: np.ndarray) -> Phrase:
        if self.phrase_kind == "binary":
            return decode_binary(out)
        # same gated matcher as free-text input: a reconstruction too far
        # from every rendering reads as the empty phrase
        return nearest_phrase_to_vector(out, self.provider)

    def _decoded_force(self, feature_values: np.ndarray) -> np.ndarray:
        feat = denormalize(ImpulseFeature(feature_values), self.norm)
        return impulse_to_force(feat)

    def force_to_phrase(self, profile: ForceProfile) -> Phrase:
        raise NotImplementedError

    def phrase_to_force(self, phrase: Phrase) -> np.ndarray:
        raise NotImplementedError


class DualAutoencoderModel(_TrainedModel):
    def __init__(self, variant, nets: DualNets, norm, seed, config, provider, loss_history):
        super().__init__(norm, seed, config, provider, loss_history)
        self.variant = variant
        self.phrase_kind = "binary" if variant == "dae_b" else "embedding"
        self.nets = nets

    def force_to_phrase(self, profile: ForceProfile) -> Phrase:
        x = self._force_input(profile)
        z = self.nets.force_encoder.forward(x)
        return self._decode_phrase_output(self.nets.phrase_decoder.forward(z))

    def phrase_to_force(self, phrase: Phrase) -> np.ndarray:
        xp = _phrase_rep(phrase, self.phrase_kind, self.provider)
        z = self.nets.phrase_encoder.forward(xp)
        return self._decoded_force(self.nets.force_decoder.forward(z))


class DirectMlpModel(_TrainedModel):
    def __init__(self, variant, f2p: FeedForwardNet, p2f: FeedForwardNet,
                 norm, seed, config, provider, loss_history):
        super().__init__(norm, seed, config, provider, loss_history)
        self.variant = variant
        self.phrase_kind = "binary" if variant == "dmlp_b" else "embedding"
        self.f2p = f2p
        self.p2f = p2f

    def force_to_phrase(self, profile: ForceProfile) -> Phrase:
        x = self._force_input(profile)
        return self._decode_phrase_output(self.f2p.forward(x))

    def phrase_to_force(self, phrase: Phrase) -> np.ndarray:
        xp = _phrase_rep(phrase, self.phrase_kind, self.provider)
        return self._decoded_force(self.p2f.forward(xp))


@dataclass
class SlotClassifier:
    """One-vs-rest linear hinge classifiers for one word slot, with an
    internal feature standardizer."""

    classes: list  # tokens plus None, fixed order
    weights: np.ndarray  # (C, 3)
    bias: np.ndarray  # (C,)
    mean: np.ndarray  # (3,)
    std: np.ndarray  # (3,)

    def decision(self, x: np.ndarray) -> np.ndarray:
        xs = (np.asarray(x, dtype=float) - self.mean) / self.std
        return xs @ self.weights.T + self.bias

    def predict(self, x: np.ndarray):
        scores = self.decision(x)
        return self.classes[int(np.argmax(scores))]


def _train_slot_classifier(features: np.ndarray, labels: list, classes: list,
                           lr: float, epochs: int, l2: float):
    """Full-batch hinge subgradient descent; returns (classifier, per-epoch loss)."""
    n = features.shape[0]
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std < 1e-9, 1.0, std)
    x = (features - mean) / std
    index = {c: k for k, c in enumerate(classes)}
    y = -np.ones((n, len(classes)))
    for i, label in enumerate(labels):
        y[i, index[label]] = 1.0
    w = np.zeros((len(classes), x.shape[1]))
    b = np.zeros(len(classes))
    history = []
    for _ in range(epochs):
        scores = x @ w.T + b
        margin = 1.0 - y * scores
        active = margin > 0.0
        coeff = y * active  # (n, C)
        grad_w = -(coeff.T @ x) / n + 2.0 * l2 * w
        grad_b = -coeff.sum(axis=0) / n
        w = w - lr * grad_w
        b = b - lr * grad_b
        history.append(float(np.maximum(margin, 0.0).mean() + l2 * np.sum(w * w)))
    return SlotClassifier(list(classes), w, b, mean, std), history


class SvmKnnModel(_TrainedModel):
    variant = "svm_knn"
    phrase_kind = "binary"

    def __init__(self, modifier_clf: SlotClassifier, direction_clf: SlotClassifier,
                 exemplars: list, norm, seed, config, provider, loss_history):
        super().__init__(norm, seed, config, provider, loss_history)
        self.modifier_clf = modifier_clf
        self.direction_clf = direction_clf
        # (modifier, direction, final impulse 3-vector) per training sample
        self.exemplars = exemplars

    def force_to_phrase(self, profile: ForceProfile) -> Phrase:
        j = profile_feature(profile).final_impulse()
        return Phrase(self.modifier_clf.predict(j), self.direction_clf.predict(j))

    def _recall_impulse(self, phrase: Phrase) -> np.ndarray:
        impulses = np.stack([e[2] for e in self.exemplars])
        matches = [k for k, e in enumerate(self.exemplars)
                   if e[0] == phrase.modifier and e[1] == phrase.direction]
        if matches:
            # representative exemplar: the label-matching impulse closest to
            # the matching set's centroid (k=1 against the set's own center)
            sub = impulses[matches]
            dist = np.linalg.norm(sub - sub.mean(axis=0), axis=1)
            return sub[int(np.argmin(dist))]
        if phrase.direction is not None:
            scale = float(np.mean(np.linalg.norm(impulses, axis=1)))
            query = direction_unit_vector(phrase.direction) * scale
        else:
            query = np.zeros(3)
        dist = np.linalg.norm(impulses - query, axis=1)
        return impulses[int(np.argmin(dist))]

    def phrase_to_force(self, phrase: Phrase) -> np.ndarray:
        final = self._recall_impulse(phrase)
        # linear impulse ramp 0 -> final over the horizon == constant force
        return np.repeat((final / HORIZON_S)[:, None], GRID_N, axis=1)


def train(variant: str, samples: list, config: TrainConfig = TrainConfig(),
          seed: int = 0, provider=None):
    """Train one variant on a paired corpus.  Deterministic given
    (variant, samples, config, seed, provider)."""
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    if not samples:
        raise InputError("training corpus is empty")
    kind = "binary" if variant in ("dae_b", "dmlp_b", "svm_knn") else "embedding"
    if kind == "embedding" and provider is None:
        raise InputError(f"variant {variant} needs an embedding provider")

    features = [profile_feature(s.profile) for s in samples]
    norm = fit_normalizer(features)
    if variant == "svm_knn":
        return _train_svm_knn(samples, features, norm, config, seed, provider)

    xf = np.stack([normalize(f, norm).values for f in features])
    xp = np.stack([_phrase_rep(s.phrase, kind, provider) for s in samples])
    if variant in ("dae_b", "dae_s"):
        return _train_dae(variant, xf, xp, norm, config, seed, provider)
    return _train_dmlp(variant, xf, xp, norm, config, seed, provider)


def _batches(n, batch_size, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def _train_dae(variant, xf, xp, norm, config, seed, provider):
    rng = np.random.default_rng([11, seed])
    pdim = xp.shape[1]
    enc_dims, dec_dims = ((_BIN_ENC, _BIN_DEC) if pdim == PHRASE_VEC_DIM
                          else (_EMB_ENC, _EMB_DEC))
    nets = DualNets(
        force_encoder=FeedForwardNet.initialize(_FORCE_ENC, rng),
        force_decoder=FeedForwardNet.initialize(_FORCE_DEC, rng),
        phrase_encoder=FeedForwardNet.initialize(enc_dims, rng),
        phrase_decoder=FeedForwardNet.initialize(dec_dims, rng),
    )
    phrase_err = "ce" if pdim == PHRASE_VEC_DIM else "mse"
    names = [name for name, _ in nets.items()]
    params = []
    for _, net in nets.items():
        params.extend(net.parameters())
    adam = Adam(params, lr=config.learning_rate)
    history = []
    n = xf.shape[0]
    for _ in range(config.epochs):
        sums = {"total": 0.0, "recon_force": 0.0, "recon_phrase": 0.0,
                "contrastive": 0.0, "translation": 0.0}
        count = 0
        for idx in _batches(n, config.batch_size, rng):
            value, comps, grads = total_loss(
                xf[idx], xp[idx], nets, config.weights, config.contrastive, phrase_err)
            flat = []
            for name in names:
                flat.extend(grads[name])
            adam.step(flat)
            sums["total"] += value
            for key in comps:
                sums[key] += comps[key]
            count += 1
        history.append({k: v / count for k, v in sums.items()})
    return DualAutoencoderModel(variant, nets, norm, seed, config, provider, history)


def _train_dmlp(variant, xf, xp, norm, config, seed, provider):
    rng = np.random.default_rng([12, seed])
    pdim = xp.shape[1]
    f2p = FeedForwardNet.initialize((FEATURE_DIM, 256, 64, pdim), rng)
    p2f = FeedForwardNet.initialize((pdim, 64, 256, FEATURE_DIM), rng)
    phrase_loss = ce_loss if pdim == PHRASE_VEC_DIM else mse_loss
    params = f2p.parameters() + p2f.parameters()
    adam = Adam(params, lr=config.learning_rate)
    history = []
    n = xf.shape[0]
    for _ in range(config.epochs):
        sums = {"total": 0.0, "force_to_phrase": 0.0, "phrase_to_force": 0.0}
        count = 0
        for idx in _batches(n, config.batch_size, rng):
            t1 = f2p.forward_trace(xf[idx])
            l1, d1 = phrase_loss(t1.out, xp[idx])
            g1, _ = t1.backward(d1)
            t2 = p2f.forward_trace(xp[idx])
            l2, d2 = mse_loss(t2.out, xf[idx])
            g2, _ = t2.backward(d2)
            adam.step(g1 + g2)
            sums["total"] += l1 + l2
            sums["force_to_phrase"] += l1
            sums["phrase_to_force"] += l2
            count += 1
        history.append({k: v / count for k, v in sums.items()})
    return DirectMlpModel(variant, f2p, p2f, norm, seed, config, provider, history)


def _train_svm_knn(samples, features, norm, config, seed, provider):
    finals = np.stack([f.final_impulse() for f in features])
    mod_labels = [s.phrase.modifier for s in samples]
    dir_labels = [s.phrase.direction for s in samples]
    mod_clf, mod_hist = _train_slot_classifier(
        finals, mod_labels, list(MODIFIERS) + [None],
        config.svm_learning_rate, config.svm_epochs, config.svm_l2)
    dir_clf, dir_hist = _train_slot_classifier(
        finals, dir_labels, list(DIRECTIONS) + [None],
        config.svm_learning_rate, config.svm_epochs, config.svm_l2)
    history = [
        {"total": m + d, "modifier_hinge": m, "direction_hinge": d}
        for m, d in zip(mod_hist, dir_hist)
    ]
    exemplars = [(s.phrase.modifier, s.phrase.direction, finals[i].copy())
                 for i, s in enumerate(samples)]
    return SvmKnnModel(mod_clf, dir_clf, exemplars, norm, seed, config, provider, history)


def translate_text(model, text: str, provider=None, sigma: float = 0.6):
    """Open-vocabulary entry point: match text onto the phrase set, then
    run phrase_to_force.  An empty-phrase match short-circuits to the zero
    force matrix.  Returns (3x256 force matrix, matched Phrase)."""
    provider = provider if provider is not None else model.provider
    if provider is None:
        raise InputError("an embedding provider is required to match text")
    phrase = nearest_mvv(text, provider, sigma)
    if phrase.is_empty():
        return np.zeros((3, GRID_N)), phrase
    return model.phrase_to_force(phrase), phrase


def _net_payload(net: FeedForwardNet) -> dict:
    params = []
    for w, b in zip(net.weights, net.biases):
        params.append(w.reshape(-1).tolist())
        params.append(b.tolist())
    return {"dims": list(net.dims), "params": params}


def _net_from_payload(payload: dict) -> FeedForwardNet:
    dims = payload["dims"]
    flat = payload["params"]
    weights = []
    biases = []
    for k in range(len(dims) - 1):
        w = np.array(flat[2 * k], dtype=float).reshape(dims[k + 1], dims[k])
        b = np.array(flat[2 * k + 1], dtype=float)
        weights.append(w)
        biases.append(b)
    return FeedForwardNet(dims, weights, biases)


def _config_payload(config: TrainConfig) -> dict:
    return {
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
        "k_r": config.weights.k_r,
        "k_z": config.weights.k_z,
        "k_t": config.weights.k_t,
        "contrastive_lam": config.contrastive.lam,
        "contrastive_margin": config.contrastive.margin,
        "svm_learning_rate": config.svm_learning_rate,
        "svm_epochs": config.svm_epochs,
        "svm_l2": config.svm_l2,
    }


def _config_from_payload(payload: dict) -> TrainConfig:
    return TrainConfig(
        epochs=payload["epochs"],
        batch_size=payload["batch_size"],
        learning_rate=payload["learning_rate"],
        weights=LossWeights(payload["k_r"], payload["k_z"], payload["k_t"]),
        contrastive=ContrastiveParams(payload["contrastive_lam"], payload["contrastive_margin"]),
        svm_learning_rate=payload["svm_learning_rate"],
        svm_epochs=payload["svm_epochs"],
        svm_l2=payload["svm_l2"],
    )


def save_checkpoint(model, path) -> None:
    """Write a self-describing structured-text checkpoint.  Identical
    models serialize to byte-identical files."""
    doc = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "variant": model.variant,
        "vocab_version": VOCAB_VERSION,
        "seed": model.seed,
        "config": _config_payload(model.config),
        "normalization": {"lo": model.norm.lo.tolist(), "hi": model.norm.hi.tolist()},
        "provider": _provider_info(model.provider),
    }
    if isinstance(model, DualAutoencoderModel):
        doc["nets"] = {name: _net_payload(net) for name, net in model.nets.items()}
    elif isinstance(model, DirectMlpModel):
        doc["nets"] = {"f2p": _net_payload(model.f2p), "p2f": _net_payload(model.p2f)}
    elif isinstance(model, SvmKnnModel):
        doc["svm"] = {}
        for slot, clf in (("modifier", model.modifier_clf), ("direction", model.direction_clf)):
            doc["svm"][slot] = {
                "classes": clf.classes,
                "weights": clf.weights.reshape(-1).tolist(),
                "bias": clf.bias.tolist(),
                "mean": clf.mean.tolist(),
                "std": clf.std.tolist(),
            }
        doc["exemplars"] = [
            {"modifier": m, "direction": d, "impulse": j.tolist()}
            for m, d, j in model.exemplars
        ]
    else:
        raise InputError(f"cannot checkpoint {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        fh.write("\n")


def _rebuild_provider(info, provider):
    if provider is not None:
        return provider
    if info is None:
        return None
    if info["kind"] == "hashing":
        return HashingProvider(info["seed"])
    if info["kind"] == "table":
        return table_provider(info["path"])
    raise CheckpointError(f"unknown provider kind {info['kind']!r}")


def load_checkpoint(path, provider=None):
    """Rebuild a trained model; pass provider to override the recorded
    embedding source (required if a table file has moved)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CheckpointError(f"{path}: malformed checkpoint ({e.msg} at line {e.lineno})") from None
    if not isinstance(doc, dict):
        raise CheckpointError(f"{path}: checkpoint must be an object")
    version = doc.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version!r}")
    variant = doc.get("variant")
    if variant not in VARIANTS:
        raise CheckpointError(f"{path}: unknown variant tag {variant!r}")
    if doc.get("vocab_version") != VOCAB_VERSION:
        raise CheckpointError(
            f"{path}: vocabulary version {doc.get('vocab_version')!r} != {VOCAB_VERSION}")
    try:
        norm = NormalizationParams(
            lo=np.array(doc["normalization"]["lo"], dtype=float),
            hi=np.array(doc["normalization"]["hi"], dtype=float))
        config = _config_from_payload(doc["config"])
        seed = doc["seed"]
        prov = _rebuild_provider(doc.get("provider"), provider)
        if variant in ("dae_b", "dae_s"):
            nets = DualNets(**{name: _net_from_payload(doc["nets"][name])
                               for name in ("force_encoder", "force_decoder",
                                            "phrase_encoder", "phrase_decoder")})
            return DualAutoencoderModel(variant, nets, norm, seed, config, prov, [])
        if variant in ("dmlp_b", "dmlp_s"):
            f2p = _net_from_payload(doc["nets"]["f2p"])
            p2f = _net_from_payload(doc["nets"]["p2f"])
            return DirectMlpModel(variant, f2p, p2f, norm, seed, config, prov, [])
        clfs = {}
        for slot in ("modifier", "direction"):
            payload = doc["svm"][slot]
            classes = [c if c is None else str(c) for c in payload["classes"]]
            weights = np.array(payload["weights"], dtype=float).reshape(len(classes), 3)
            clfs[slot] = SlotClassifier(
                classes, weights, np.array(payload["bias"], dtype=float),
                np.array(payload["mean"], dtype=float), np.array(payload["std"], dtype=float))
        exemplars = [(e["modifier"], e["direction"], np.array(e["impulse"], dtype=float))
                     for e in doc["exemplars"]]
        return SvmKnnModel(clfs["modifier"], clfs["direction"], exemplars,
                           norm, seed, config, prov, [])
    except (KeyError, TypeError, ValueError, InputError) as e:
        raise CheckpointError(f"{path}: invalid checkpoint contents ({e})") from None
