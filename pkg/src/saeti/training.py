"""Dataset assembly, the two training loops, and bundle persistence.

Training always happens in the normalized [0, 1] frame. Windows are cut
at stride ``m`` (the final window backs up to cover the tail), the
classifier trains on gap-free windows against snippet-derived labels,
and the autoencoder trains on every window that has at least one
observed point, with random masking of observed positions as
augmentation so it learns to fill holes it has never seen.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .autograd import Adam, cross_entropy, masked_mse, zero_grads
from .core_ts import NormParams, Subsequence, TimeSeries, split_nonoverlapping
from .models import MISSING_FILL, RecognizerModel, ReconstructorModel
from .snippets import (
    SnippetSet,
    label_subsequence,
    snippet_sets_from_json,
    snippet_sets_to_json,
)

__all__ = [
    "TrainConfig",
    "EpochStats",
    "ModelBundle",
    "build_recognizer_dataset",
    "build_reconstructor_dataset",
    "mask_random_points",
    "split_train_val",
    "train_recognizer",
    "train_reconstructor",
    "train_bundle",
    "save_bundle",
    "load_bundle",
    "BUNDLE_MAGIC",
]

BUNDLE_MAGIC = b"SAETIMB1"


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by both training loops."""

    m: int
    k: int
    ell: int | None = None
    latent: int | None = None
    seed: int = 42
    lr: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    val_fraction: float = 0.25
    mask_fraction: float = 0.25


@dataclass(frozen=True)
class EpochStats:
    """One line of training history."""

    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float | None = None


@dataclass
class ModelBundle:
    """Everything imputation needs, in one serializable object."""

    names: tuple[str, ...]
    norm: NormParams
    snippet_sets: list[SnippetSet]
    recognizer: RecognizerModel
    reconstructor: ReconstructorModel
    seed: int = 42

    @property
    def d(self) -> int:
        return self.recognizer.d

    @property
    def m(self) -> int:
        return self.recognizer.m

    @property
    def k(self) -> int:
        return self.recognizer.k

    @property
    def ell(self) -> int:
        return self.snippet_sets[0].ell


def _fill(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Missing points become the out-of-range fill value."""
    return np.where(mask, values, MISSING_FILL)


def window_labels(sub: Subsequence, sets: list[SnippetSet],
                  recognizer: RecognizerModel | None = None) -> np.ndarray:
    """0-based snippet rank per coordinate for one (d, m) window.

    Gap-free windows are labeled exactly from the snippet neighbor sets;
    windows with holes are routed through the classifier.
    """
    d = sub.values.shape[0]
    if sub.is_clean:
        labels = np.empty(d, dtype=int)
        for j in range(d):
            piece = Subsequence(coord=j, start=sub.start, length=sub.length,
                                values=sub.values[j], mask=sub.mask[j])
            labels[j] = label_subsequence(piece, sets[j]) - 1
        return labels
    if recognizer is None:
        raise ValueError("window has gaps and no classifier was provided")
    filled = _fill(sub.values, sub.mask)
    return recognizer.predict(filled[None])[0]


def build_recognizer_dataset(
    ts_norm: TimeSeries, sets: list[SnippetSet], m: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Gap-free stride-m windows and their per-coordinate labels.

    Returns ``(X, y)`` with ``X`` shaped (N, d, m) and ``y`` (N, d),
    labels 0-based.
    """
    windows = [w for w in split_nonoverlapping(ts_norm, m) if w.is_clean]
    if not windows:
        raise ValueError("insufficient clean data: no gap-free windows")
    x = np.stack([w.values for w in windows])
    y = np.stack([window_labels(w, sets) for w in windows])
    return x, y


def build_reconstructor_dataset(
    ts_norm: TimeSeries, sets: list[SnippetSet], m: int,
    recognizer: RecognizerModel,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Window/snippet input pairs for the autoencoder.

    Returns ``(X, target, weight)``: ``X`` is (N, d, 2, m) holding the
    filled window in channel 0 and the matched snippet in channel 1;
    ``target`` is the window itself and ``weight`` is 1.0 exactly where
    the truth is observed. Windows with no observed point at all are
    dropped.
    """
    windows = [w for w in split_nonoverlapping(ts_norm, m) if w.mask.any()]
    if not windows:
        raise ValueError("insufficient clean data: no observed points in any window")
    d = ts_norm.d
    xs, targets, weights = [], [], []
    for w in windows:
        labels = window_labels(w, sets, recognizer)
        pair = np.empty((d, 2, m))
        pair[:, 0, :] = _fill(w.values, w.mask)
        for j in range(d):
            pair[j, 1, :] = sets[j].items[labels[j]].values
        xs.append(pair)
        targets.append(np.where(w.mask, w.values, 0.0))
        weights.append(w.mask.astype(float))
    return np.stack(xs), np.stack(targets), np.stack(weights)


def mask_random_points(observed: np.ndarray, fraction: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Pick exactly ``floor(fraction * size)`` observed positions to hide.

    Capped at the number of observed positions. Returns a boolean array
    shaped like ``observed``, True at the points to blank out.
    """
    observed = np.asarray(observed, dtype=bool)
    n_pick = min(int(fraction * observed.size), int(observed.sum()))
    hide = np.zeros(observed.shape, dtype=bool)
    if n_pick > 0:
        pool = np.flatnonzero(observed.ravel())
        chosen = rng.choice(pool, size=n_pick, replace=False)
        hide.ravel()[chosen] = True
    return hide


def split_train_val(n: int, val_fraction: float,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Shuffled index split; validation gets at least one sample."""
    if n < 2:
        raise ValueError("need at least 2 windows to split")
    order = rng.permutation(n)
    n_val = min(max(1, int(round(val_fraction * n))), n - 1)
    return order[n_val:], order[:n_val]


def _batches(order: np.ndarray, size: int):
    for lo in range(0, order.shape[0], size):
        yield order[lo:lo + size]


def _snapshot(model) -> list[np.ndarray]:
    return [p.data.copy() for _, p in model.parameters()]


def _restore(model, snap: list[np.ndarray]) -> None:
    for (_, p), data in zip(model.parameters(), snap):
        p.data = data.copy()


def _check_finite(value: float, what: str, epoch: int) -> None:
    if not math.isfinite(value):
        raise RuntimeError(
            f"{what} became non-finite at epoch {epoch}; "
            "lower the learning rate or check the input scaling")


def train_recognizer(model: RecognizerModel, x: np.ndarray, y: np.ndarray,
                     config: TrainConfig) -> list[EpochStats]:
    """Adam + early stopping on validation loss; restores the best epoch.

    The loss is cross-entropy summed over coordinates, averaged over the
    batch. Input windows are occluded: per sample, a share of points drawn
    uniformly between 0 and twice the configured fraction (mean = the
    configured fraction) is replaced by the missing-value fill. At use the
    classifier sees anything from untouched windows to mostly-hidden ones,
    so training has to cover that whole range; a fixed share would let it
    key on the occlusion pattern itself. Validation inputs get one fixed
    occlusion at the nominal fraction drawn up front; accuracy in the
    history rows is measured on those.
    """
    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = split_train_val(x.shape[0], config.val_fraction, rng)
    val_x = x[val_idx].copy()
    for i in range(val_x.shape[0]):
        hide = mask_random_points(np.ones_like(val_x[i], dtype=bool),
                                  config.mask_fraction, rng)
        val_x[i][hide] = MISSING_FILL
    params = [p for _, p in model.parameters()]
    opt = Adam(params, lr=config.lr)
    history: list[EpochStats] = []
    best_val = math.inf
    best_snap = _snapshot(model)
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(train_idx)
        total = 0.0
        for batch in _batches(order, config.batch_size):
            xb = x[batch].copy()
            for i in range(batch.shape[0]):
                frac = rng.uniform(0.0, 2.0 * config.mask_fraction)
                hide = mask_random_points(np.ones_like(xb[i], dtype=bool),
                                          frac, rng)
                xb[i][hide] = MISSING_FILL
            probs = model.forward(xb)
            loss = cross_entropy(probs, y[batch]) * (1.0 / batch.shape[0])
            zero_grads(params)
            loss.backward()
            opt.step()
            total += loss.item() * batch.shape[0]
        train_loss = total / train_idx.shape[0]
        _check_finite(train_loss, "training loss", epoch)

        val_probs = model.forward(val_x)
        val_loss = cross_entropy(val_probs, y[val_idx]).item() / val_idx.shape[0]
        _check_finite(val_loss, "validation loss", epoch)
        val_acc = float(np.mean(np.argmax(val_probs.data, axis=-1) == y[val_idx]))
        history.append(EpochStats(epoch, train_loss, val_loss, val_acc))

        if val_loss < best_val:
            best_val = val_loss
            best_snap = _snapshot(model)
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    _restore(model, best_snap)
    return history


def train_reconstructor(model: ReconstructorModel, x: np.ndarray,
                        target: np.ndarray, weight: np.ndarray,
                        config: TrainConfig) -> list[EpochStats]:
    """Masked-MSE training with random occlusion of observed inputs.

    Each epoch re-rolls which observed points are blanked out of the
    input channel; the loss still sees them, which is what teaches the
    model to fill gaps. Validation runs without occlusion.
    """
    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = split_train_val(x.shape[0], config.val_fraction, rng)
    params = [p for _, p in model.parameters()]
    opt = Adam(params, lr=config.lr)
    history: list[EpochStats] = []
    best_val = math.inf
    best_snap = _snapshot(model)
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(train_idx)
        total = 0.0
        count = 0.0
        for batch in _batches(order, config.batch_size):
            xb = x[batch].copy()
            for i in range(batch.shape[0]):
                hide = mask_random_points(weight[batch[i]] > 0,
                                          config.mask_fraction, rng)
                xb[i, :, 0, :][hide] = MISSING_FILL
            pred = model.forward(xb)
            loss = masked_mse(pred, target[batch], weight[batch])
            zero_grads(params)
            loss.backward()
            opt.step()
            n_pos = weight[batch].sum()
            total += loss.item() * n_pos
            count += n_pos
        train_loss = total / count
        _check_finite(train_loss, "training loss", epoch)

        val_pred = model.forward(x[val_idx])
        val_loss = masked_mse(val_pred, target[val_idx], weight[val_idx]).item()
        _check_finite(val_loss, "validation loss", epoch)
        history.append(EpochStats(epoch, train_loss, val_loss))

        if val_loss < best_val:
            best_val = val_loss
            best_snap = _snapshot(model)
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    _restore(model, best_snap)
    return history


def train_bundle(
    ts_norm: TimeSeries, norm: NormParams, sets: list[SnippetSet],
    config: TrainConfig,
) -> tuple[ModelBundle, list[EpochStats], list[EpochStats]]:
    """Train both models on an already normalized series.

    Returns the bundle plus the two training histories (classifier
    first). Pass the snippet sets discovered on the same series.
    """
    d = ts_norm.d
    recognizer = RecognizerModel(d, config.m, config.k, seed=config.seed)
    rx, ry = build_recognizer_dataset(ts_norm, sets, config.m)
    recog_history = train_recognizer(recognizer, rx, ry, config)

    reconstructor = ReconstructorModel(d, config.m, latent=config.latent,
                                       seed=config.seed)
    ax, at, aw = build_reconstructor_dataset(ts_norm, sets, config.m, recognizer)
    recon_history = train_reconstructor(reconstructor, ax, at, aw, config)

    bundle = ModelBundle(names=ts_norm.names, norm=norm, snippet_sets=sets,
                         recognizer=recognizer, reconstructor=reconstructor,
                         seed=config.seed)
    return bundle, recog_history, recon_history


# -- persistence -------------------------------------------------------------


def _param_manifest(model) -> list[list]:
    return [[name, list(p.data.shape)] for name, p in model.parameters()]


def save_bundle(bundle: ModelBundle, path) -> None:
    """Write a bundle: magic, header length, JSON header, raw float64.

    Weights are stored as little-endian float64 in the exact parameter
    order the models report, classifier first, so a load followed by a
    save reproduces the file byte for byte.
    """
    header = {
        "format": 1,
        "config": {
            "d": bundle.d,
            "m": bundle.m,
            "k": bundle.k,
            "ell": bundle.ell,
            "latent": bundle.reconstructor.latent,
            "seed": bundle.seed,
            "names": list(bundle.names),
        },
        "norm": {
            "mins": [float(v) for v in bundle.norm.mins],
            "maxs": [float(v) for v in bundle.norm.maxs],
        },
        "snippets": json.loads(snippet_sets_to_json(bundle.snippet_sets)),
        "params": {
            "recognizer": _param_manifest(bundle.recognizer),
            "reconstructor": _param_manifest(bundle.reconstructor),
        },
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(BUNDLE_MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for model in (bundle.recognizer, bundle.reconstructor):
            for _, p in model.parameters():
                fh.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())


def load_bundle(path) -> ModelBundle:
    """Read a bundle back; any size or name mismatch is an error."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:8] != BUNDLE_MAGIC:
        raise ValueError("not a model bundle: bad magic")
    (header_len,) = struct.unpack("<Q", blob[8:16])
    if 16 + header_len > len(blob):
        raise ValueError("truncated bundle: header extends past end of file")
    header = json.loads(blob[16:16 + header_len].decode("utf-8"))
    cfg = header["config"]
    norm = NormParams(mins=np.array(header["norm"]["mins"], dtype=float),
                      maxs=np.array(header["norm"]["maxs"], dtype=float))
    sets = snippet_sets_from_json(json.dumps(header["snippets"]))
    recognizer = RecognizerModel(cfg["d"], cfg["m"], cfg["k"], seed=cfg["seed"])
    reconstructor = ReconstructorModel(cfg["d"], cfg["m"], latent=cfg["latent"],
                                       seed=cfg["seed"])
    offset = 16 + header_len
    for model, key in ((recognizer, "recognizer"), (reconstructor, "reconstructor")):
        manifest = header["params"][key]
        named = model.parameters()
        if [[n, list(p.data.shape)] for n, p in named] != manifest:
            raise ValueError(f"bundle parameter mismatch in {key}")
        for _, p in named:
            nbytes = p.data.size * 8
            if offset + nbytes > len(blob):
                raise ValueError("truncated bundle: weight block cut short")
            flat = np.frombuffer(blob, dtype="<f8", count=p.data.size,
                                 offset=offset)
            p.data = flat.reshape(p.data.shape).astype(float)
            offset += nbytes
    if offset != len(blob):
        raise ValueError("bundle has trailing bytes")
    return ModelBundle(names=tuple(cfg["names"]), norm=norm, snippet_sets=sets,
                       recognizer=recognizer, reconstructor=reconstructor,
                       seed=cfg["seed"])
