"""The two networks: a window classifier and a masked autoencoder.

Both operate on fixed-length windows cut from a min-max normalized
series, with missing points filled with -1 so gaps sit outside the
observed [0, 1] range. Shapes follow the (batch, coordinate, time)
convention throughout.
"""

from __future__ import annotations

import math

import numpy as np

from .autograd import (
    GRUParams,
    Tensor,
    concat,
    conv1d,
    dense,
    glorot_uniform,
    gru_forward,
    leaky_relu,
    maxpool1d,
    relu,
    sigmoid,
    softmax,
)

__all__ = ["RecognizerModel", "ReconstructorModel", "MISSING_FILL"]

MISSING_FILL = -1.0

KERNEL = 5
RECOGNIZER_FILTERS = (256, 128, 64)
RECOGNIZER_HIDDEN = 128
ENCODER_FILTERS = (128, 64, 32)
DECODER_FILTERS = (64, 128)


class _Conv:
    """Weight/bias pair for one same-padded convolution."""

    def __init__(self, c_in: int, c_out: int, rng: np.random.Generator):
        self.weight = glorot_uniform((c_out, c_in, KERNEL), rng)
        self.bias = Tensor(np.zeros(c_out), requires_grad=True)


class _Dense:
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        self.weight = glorot_uniform((n_in, n_out), rng)
        self.bias = Tensor(np.zeros(n_out), requires_grad=True)


def _gru_over_time(x: Tensor, params: GRUParams) -> tuple[list[Tensor], Tensor]:
    """Feed a (B, C, L) tensor step by step along its last axis."""
    steps = [x[:, :, t] for t in range(x.shape[-1])]
    return gru_forward(steps, params)


class RecognizerModel:
    """Classify each coordinate of a window into one of k snippet ranks.

    Three convolution/pool stages shrink the window, a GRU reads what is
    left of the sequence, and a dense head emits per-coordinate
    probabilities.
    """

    def __init__(self, d: int, m: int, k: int, seed: int = 0):
        if m < 8:
            raise ValueError(f"window too short for three pools: m={m} < 8")
        if d < 1 or k < 1:
            raise ValueError("d and k must be positive")
        self.d = d
        self.m = m
        self.k = k
        self.seed = seed
        rng = np.random.default_rng(seed)
        f1, f2, f3 = RECOGNIZER_FILTERS
        self.conv1 = _Conv(d, f1, rng)
        self.conv2 = _Conv(f1, f2, rng)
        self.conv3 = _Conv(f2, f3, rng)
        self.gru = GRUParams(f3, RECOGNIZER_HIDDEN, rng)
        self.head = _Dense(RECOGNIZER_HIDDEN, d * k, rng)

    def parameters(self) -> list[tuple[str, Tensor]]:
        named: list[tuple[str, Tensor]] = []
        for i, conv in enumerate((self.conv1, self.conv2, self.conv3), start=1):
            named.append((f"conv{i}.weight", conv.weight))
            named.append((f"conv{i}.bias", conv.bias))
        named.extend((f"gru.{n}", t) for n, t in self.gru.tensors())
        named.append(("head.weight", self.head.weight))
        named.append(("head.bias", self.head.bias))
        return named

    def forward(self, x: np.ndarray) -> Tensor:
        """Map (B, d, m) windows to (B, d, k) class probabilities."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 3 or x.shape[1] != self.d or x.shape[2] != self.m:
            raise ValueError(f"expected (B, {self.d}, {self.m}) input, got {x.shape}")
        h = Tensor(x)
        for conv in (self.conv1, self.conv2, self.conv3):
            h = maxpool1d(relu(conv1d(h, conv.weight, conv.bias)))
        _, last = _gru_over_time(h, self.gru)
        feats = leaky_relu(last)
        logits = dense(feats, self.head.weight, self.head.bias)
        scores = logits.reshape(x.shape[0], self.d, self.k)
        return softmax(scores, axis=-1)

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Most likely class per coordinate, 0-based, shape (B, d)."""
        probs = self.forward(np.asarray(x, dtype=float))
        return np.argmax(probs.data, axis=-1)


def default_latent(d: int, m: int) -> int:
    return math.ceil(d * m / 4)


class ReconstructorModel:
    """Autoencode windows paired with their matched snippet.

    The input carries two channels per coordinate (window values with
    -1 at gaps, and the snippet suggested for that window); the output
    is a sigmoid reconstruction of the window itself. Encoding funnels
    per-coordinate conv stacks into a GRU and a dense bottleneck;
    decoding mirrors it back.
    """

    def __init__(self, d: int, m: int, latent: int | None = None, seed: int = 0):
        if d < 1 or m < 1:
            raise ValueError("d and m must be positive")
        z = default_latent(d, m) if latent is None else int(latent)
        if z >= d * m:
            raise ValueError(f"latent not compressive: z={z} >= d*m={d * m}")
        if z < 1:
            raise ValueError("latent size must be positive")
        self.d = d
        self.m = m
        self.latent = z
        self.seed = seed
        rng = np.random.default_rng(seed)
        e1, e2, e3 = ENCODER_FILTERS
        self.encoders = [
            (_Conv(2, e1, rng), _Conv(e1, e2, rng), _Conv(e2, e3, rng))
            for _ in range(d)
        ]
        self.enc_gru = GRUParams(e3 * d, m, rng)
        self.to_latent = _Dense(m, z, rng)
        self.from_latent = _Dense(z, m * m, rng)
        self.dec_gru = GRUParams(m, e3 * d, rng)
        d1, d2 = DECODER_FILTERS
        self.decoders = [
            (_Conv(e3, d1, rng), _Conv(d1, d2, rng), _Conv(d2, 1, rng))
            for _ in range(d)
        ]

    def parameters(self) -> list[tuple[str, Tensor]]:
        named: list[tuple[str, Tensor]] = []
        for i, stack in enumerate(self.encoders):
            for j, conv in enumerate(stack, start=1):
                named.append((f"enc{i}.conv{j}.weight", conv.weight))
                named.append((f"enc{i}.conv{j}.bias", conv.bias))
        named.extend((f"enc_gru.{n}", t) for n, t in self.enc_gru.tensors())
        named.append(("to_latent.weight", self.to_latent.weight))
        named.append(("to_latent.bias", self.to_latent.bias))
        named.append(("from_latent.weight", self.from_latent.weight))
        named.append(("from_latent.bias", self.from_latent.bias))
        named.extend((f"dec_gru.{n}", t) for n, t in self.dec_gru.tensors())
        for i, stack in enumerate(self.decoders):
            for j, conv in enumerate(stack, start=1):
                named.append((f"dec{i}.conv{j}.weight", conv.weight))
                named.append((f"dec{i}.conv{j}.bias", conv.bias))
        return named

    def encode(self, x: np.ndarray) -> Tensor:
        """Compress (B, d, 2, m) window/snippet pairs to (B, latent)."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 4 or x.shape[1:] != (self.d, 2, self.m):
            raise ValueError(
                f"expected (B, {self.d}, 2, {self.m}) input, got {x.shape}")
        branches = []
        for i, stack in enumerate(self.encoders):
            h = Tensor(x[:, i])            # (B, 2, m)
            for conv in stack:
                h = leaky_relu(conv1d(h, conv.weight, conv.bias))
            branches.append(h)             # (B, 32, m)
        merged = concat(branches, axis=1)  # (B, 32*d, m)
        _, last = _gru_over_time(merged, self.enc_gru)
        return dense(last, self.to_latent.weight, self.to_latent.bias)

    def decode(self, z: Tensor) -> Tensor:
        """Expand (B, latent) codes back to (B, d, m) reconstructions."""
        if z.ndim != 2 or z.shape[1] != self.latent:
            raise ValueError(f"expected (B, {self.latent}) latent, got {z.shape}")
        batch = z.shape[0]
        seed = dense(z, self.from_latent.weight, self.from_latent.bias)
        steps_in = seed.reshape(batch, self.m, self.m)   # m steps of m features
        states, _ = gru_forward(
            [steps_in[:, t, :] for t in range(self.m)], self.dec_gru)
        width = ENCODER_FILTERS[-1]
        # (B, 32*d, m): hidden state per step laid out as channels
        trace = concat([s.reshape(batch, width * self.d, 1) for s in states],
                       axis=2)
        outputs = []
        for i, stack in enumerate(self.decoders):
            h = trace[:, i * width:(i + 1) * width, :]
            for conv in stack[:-1]:
                h = leaky_relu(conv1d(h, conv.weight, conv.bias))
            final = stack[-1]
            h = sigmoid(conv1d(h, final.weight, final.bias))  # (B, 1, m)
            outputs.append(h)
        return concat(outputs, axis=1)

    def forward(self, x: np.ndarray) -> Tensor:
        """Encode then decode; exactly the composition of the two."""
        return self.decode(self.encode(x))
