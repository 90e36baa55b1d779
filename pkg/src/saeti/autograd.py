"""Dense float64 tensors with reverse-mode autodiff and the layer kit.

A :class:`Tensor` wraps a numpy array and, when gradients are required,
records a backward closure plus its parents so that ``backward()`` on a
scalar loss can replay the chain rule over a topological ordering. Ops
are deliberately coarse (a whole convolution is one node) so graphs stay
small and the heavy lifting runs inside BLAS.

Conventions baked in here:

* gradients accumulate across repeated ``backward()`` calls until
  :func:`zero_grads` resets them to exact zeros;
* convolutions use same-padding with zeros and odd kernel widths;
* max-pooling keeps a trailing singleton window for odd lengths and
  routes gradient to the first maximal element on ties;
* leaky ReLU slope is 0.01 unless overridden;
* the GRU recurrence is ``h_t = (1 - z_t) * h_{t-1} + z_t * h_cand`` with
  sigmoid update/reset gates, a tanh candidate and a zero initial state;
* parameters initialize uniform(-a, a) with ``a = sqrt(6 / (fan_in +
  fan_out))``, biases at zero, from a caller-supplied seeded generator.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

__all__ = [
    "Tensor",
    "concat",
    "conv1d",
    "maxpool1d",
    "relu",
    "leaky_relu",
    "sigmoid",
    "tanh",
    "dense",
    "softmax",
    "cross_entropy",
    "masked_mse",
    "gru_forward",
    "GRUParams",
    "backward",
    "zero_grads",
    "adam_step",
    "Adam",
    "glorot_uniform",
]

LEAKY_SLOPE = 0.01


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to ``shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A numpy array with an optional gradient and a backward closure."""

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_prev")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None
        self._prev = ()

    # -- bookkeeping -------------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, grad: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- graph construction ------------------------------------------------

    def backward(self):
        """Reverse-mode sweep from a scalar; grads accumulate into ``.grad``."""
        if self.data.size != 1:
            raise ValueError("backward requires a scalar tensor")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._prev:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _as_tensor(other)
        out = _node(self.data + other.data, (self, other))
        if out.requires_grad:
            def _bwd(g):
                if self.requires_grad:
                    self._accumulate(_unbroadcast(g, self.data.shape))
                if other.requires_grad:
                    other._accumulate(_unbroadcast(g, other.data.shape))
            out._backward = _bwd
        return out

    __radd__ = __add__

    def __mul__(self, other):
        other = _as_tensor(other)
        out = _node(self.data * other.data, (self, other))
        if out.requires_grad:
            def _bwd(g):
                if self.requires_grad:
                    self._accumulate(_unbroadcast(g * other.data, self.data.shape))
                if other.requires_grad:
                    other._accumulate(_unbroadcast(g * self.data, other.data.shape))
            out._backward = _bwd
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-_as_tensor(other))

    def __rsub__(self, other):
        return _as_tensor(other) + (-self)

    def __pow__(self, p):
        if not isinstance(p, (int, float)):
            raise TypeError("only scalar exponents are supported")
        out = _node(self.data ** p, (self,))
        if out.requires_grad:
            def _bwd(g):
                self._accumulate(g * p * self.data ** (p - 1))
            out._backward = _bwd
        return out

    def __matmul__(self, other):
        other = _as_tensor(other)
        if self.data.ndim != 2 or other.data.ndim != 2:
            raise ValueError("matmul expects 2-D operands; reshape first")
        out = _node(self.data @ other.data, (self, other))
        if out.requires_grad:
            def _bwd(g):
                if self.requires_grad:
                    self._accumulate(g @ other.data.T)
                if other.requires_grad:
                    other._accumulate(self.data.T @ g)
            out._backward = _bwd
        return out

    # -- shape ops ---------------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = _node(self.data.reshape(shape), (self,))
        if out.requires_grad:
            src_shape = self.data.shape
            def _bwd(g):
                self._accumulate(g.reshape(src_shape))
            out._backward = _bwd
        return out

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        out = _node(self.data.transpose(axes) if axes else self.data.T, (self,))
        if out.requires_grad:
            inv = np.argsort(axes) if axes else None
            def _bwd(g):
                self._accumulate(g.transpose(inv) if inv is not None else g.T)
            out._backward = _bwd
        return out

    def __getitem__(self, idx):
        out = _node(self.data[idx], (self,))
        if out.requires_grad:
            def _bwd(g):
                full = np.zeros_like(self.data)
                full[idx] = g
                self._accumulate(full)
            out._backward = _bwd
        return out

    def sum(self, axis=None, keepdims: bool = False):
        out = _node(self.data.sum(axis=axis, keepdims=keepdims), (self,))
        if out.requires_grad:
            src_shape = self.data.shape
            def _bwd(g):
                if axis is not None and not keepdims:
                    g = np.expand_dims(g, axis)
                self._accumulate(np.broadcast_to(g, src_shape).copy())
            out._backward = _bwd
        return out

    # -- pointwise nonlinearities -------------------------------------------

    def exp(self):
        out = _node(np.exp(self.data), (self,))
        if out.requires_grad:
            y = out.data
            def _bwd(g):
                self._accumulate(g * y)
            out._backward = _bwd
        return out

    def log(self):
        out = _node(np.log(self.data), (self,))
        if out.requires_grad:
            def _bwd(g):
                self._accumulate(g / self.data)
            out._backward = _bwd
        return out


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data: np.ndarray, parents: tuple[Tensor, ...]) -> Tensor:
    out = Tensor(data)
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._prev = parents
    return out


def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    out = _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    if out.requires_grad:
        sizes = [t.data.shape[axis] for t in tensors]
        offsets = np.cumsum([0] + sizes)
        def _bwd(g):
            for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
                if t.requires_grad:
                    idx = [slice(None)] * g.ndim
                    idx[axis] = slice(lo, hi)
                    t._accumulate(g[tuple(idx)])
        out._backward = _bwd
    return out


def relu(x: Tensor) -> Tensor:
    out = _node(np.maximum(x.data, 0.0), (x,))
    if out.requires_grad:
        keep = x.data > 0
        def _bwd(g):
            x._accumulate(g * keep)
        out._backward = _bwd
    return out


def leaky_relu(x: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    out = _node(np.where(x.data > 0, x.data, slope * x.data), (x,))
    if out.requires_grad:
        factor = np.where(x.data > 0, 1.0, slope)
        def _bwd(g):
            x._accumulate(g * factor)
        out._backward = _bwd
    return out


def sigmoid(x: Tensor) -> Tensor:
    out = _node(expit(x.data), (x,))
    if out.requires_grad:
        y = out.data
        def _bwd(g):
            x._accumulate(g * y * (1.0 - y))
        out._backward = _bwd
    return out


def tanh(x: Tensor) -> Tensor:
    out = _node(np.tanh(x.data), (x,))
    if out.requires_grad:
        y = out.data
        def _bwd(g):
            x._accumulate(g * (1.0 - y * y))
        out._backward = _bwd
    return out


def conv1d(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Same-padded 1-D convolution.

    ``x`` is ``(C_in, L)`` or batched ``(B, C_in, L)``; ``weight`` is
    ``(C_out, C_in, kw)`` with odd ``kw``; output length equals input
    length. Implemented as one im2col matmul node.
    """
    squeeze = x.data.ndim == 2
    xd = x.data[None] if squeeze else x.data
    if xd.ndim != 3:
        raise ValueError("conv1d input must be (C_in, L) or (B, C_in, L)")
    c_out, c_in, kw = weight.data.shape
    if kw % 2 == 0:
        raise ValueError(f"kernel width must be odd, got {kw}")
    if xd.shape[1] != c_in:
        raise ValueError(f"channel mismatch: input has {xd.shape[1]}, kernel expects {c_in}")
    b, _, length = xd.shape
    pad = kw // 2
    xp = np.pad(xd, ((0, 0), (0, 0), (pad, pad)))
    patches = sliding_window_view(xp, kw, axis=2)          # (B, C_in, L, kw)
    cols = patches.transpose(0, 2, 1, 3).reshape(b * length, c_in * kw)
    w2 = weight.data.reshape(c_out, c_in * kw)
    y = (cols @ w2.T).reshape(b, length, c_out).transpose(0, 2, 1)
    y = y + bias.data[None, :, None]
    out = _node(y[0] if squeeze else y, (x, weight, bias))
    if out.requires_grad:
        def _bwd(g):
            gb3 = g[None] if squeeze else g
            g2 = gb3.transpose(0, 2, 1).reshape(b * length, c_out)
            if weight.requires_grad:
                weight._accumulate((g2.T @ cols).reshape(c_out, c_in, kw))
            if bias.requires_grad:
                bias._accumulate(gb3.sum(axis=(0, 2)))
            if x.requires_grad:
                gcols = (g2 @ w2).reshape(b, length, c_in, kw)
                gxp = np.zeros_like(xp)
                for t in range(kw):
                    gxp[:, :, t:t + length] += gcols[:, :, :, t].transpose(0, 2, 1)
                gx = gxp[:, :, pad:pad + length]
                x._accumulate(gx[0] if squeeze else gx)
        out._backward = _bwd
    return out


def maxpool1d(x: Tensor, window: int = 2) -> Tensor:
    """Max-pool along the last axis; odd lengths keep a final singleton."""
    if window != 2:
        raise ValueError("only window=2 pooling is supported")
    length = x.data.shape[-1]
    if length < 1:
        raise ValueError("cannot pool an empty axis")
    half = length // 2
    lead = x.data.shape[:-1]
    main = x.data[..., :2 * half].reshape(lead + (half, 2))
    idx = np.argmax(main, axis=-1)            # first max on ties
    pooled = np.take_along_axis(main, idx[..., None], axis=-1)[..., 0]
    if length % 2:
        pooled = np.concatenate([pooled, x.data[..., -1:]], axis=-1)
    out = _node(pooled, (x,))
    if out.requires_grad:
        def _bwd(g):
            gx = np.zeros_like(x.data)
            gmain = np.zeros(lead + (half, 2))
            np.put_along_axis(gmain, idx[..., None], g[..., :half, None], axis=-1)
            gx[..., :2 * half] = gmain.reshape(lead + (2 * half,))
            if length % 2:
                gx[..., -1] += g[..., -1]
            x._accumulate(gx)
        out._backward = _bwd
    return out


def dense(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine map ``x @ weight + bias`` with ``weight`` shaped (in, out)."""
    return x @ weight + bias


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Stable softmax along ``axis``; rows sum to one."""
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = _node(y, (x,))
    if out.requires_grad:
        def _bwd(g):
            dot = (g * y).sum(axis=axis, keepdims=True)
            x._accumulate(y * (g - dot))
        out._backward = _bwd
    return out


def cross_entropy(probs: Tensor, target) -> Tensor:
    """Summed negative log-likelihood of integer classes under ``probs``.

    ``probs`` holds probabilities along the last axis; ``target`` is an
    integer index (1-D probs) or an integer array matching the leading
    shape. The result is the sum over all target positions; divide by the
    batch size at the call site when a mean is wanted.
    """
    target = np.asarray(target)
    if probs.data.ndim == 1:
        gather = probs.data[int(target)]
        picked = np.array([gather])
        index = (np.array([int(target)]),)
        flat_shape = (1,)
    else:
        lead = probs.data.shape[:-1]
        if target.shape != lead:
            raise ValueError(f"target shape {target.shape} != {lead}")
        flat = probs.data.reshape(-1, probs.data.shape[-1])
        rows = np.arange(flat.shape[0])
        cols = target.reshape(-1)
        picked = flat[rows, cols]
        index = (rows, cols)
        flat_shape = flat.shape
    picked = np.maximum(picked, 1e-300)  # guard log(0) -> inf, not NaN
    out = _node(np.array(-np.log(picked).sum()), (probs,))
    if out.requires_grad:
        def _bwd(g):
            gflat = np.zeros(flat_shape)
            if probs.data.ndim == 1:
                gflat[index[0][0]] = -g / picked[0]
                probs._accumulate(gflat)
            else:
                gflat[index] = -g / picked
                probs._accumulate(gflat.reshape(probs.data.shape))
        out._backward = _bwd
    return out


def masked_mse(pred: Tensor, target, weight_mask) -> Tensor:
    """Mean squared error restricted to positions with weight 1.

    An all-zero mask yields 0 with a warning (nothing to score, but the
    graph stays differentiable).
    """
    target = np.asarray(target, dtype=float)
    weight = np.asarray(weight_mask, dtype=float)
    if weight.shape != pred.data.shape:
        raise ValueError("weight mask shape differs from prediction shape")
    count = weight.sum()
    if count == 0:
        warnings.warn("masked_mse: empty weight mask, returning 0", stacklevel=2)
        return (pred * 0.0).sum()
    diff = np.where(weight > 0, pred.data - target, 0.0)
    out = _node(np.array((weight * diff * diff).sum() / count), (pred,))
    if out.requires_grad:
        def _bwd(g):
            pred._accumulate(g * 2.0 * weight * diff / count)
        out._backward = _bwd
    return out


class GRUParams:
    """Gate matrices and biases for one GRU layer.

    Holds ``w_*`` (input_size, hidden), ``u_*`` (hidden, hidden) and
    ``b_*`` (hidden,) for the update (z), reset (r) and candidate (h)
    transforms.
    """

    GATES = ("z", "r", "h")

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator):
        self.input_size = input_size
        self.hidden_size = hidden_size
        for gate in self.GATES:
            setattr(self, f"w_{gate}", glorot_uniform((input_size, hidden_size), rng))
            setattr(self, f"u_{gate}", glorot_uniform((hidden_size, hidden_size), rng))
            setattr(self, f"b_{gate}", Tensor(np.zeros(hidden_size), requires_grad=True))

    def tensors(self) -> list[tuple[str, Tensor]]:
        return [
            (f"{kind}_{gate}", getattr(self, f"{kind}_{gate}"))
            for gate in self.GATES
            for kind in ("w", "u", "b")
        ]


def gru_forward(xs: list[Tensor], params: GRUParams) -> tuple[list[Tensor], Tensor]:
    """Run a GRU over a sequence of (B, input_size) tensors.

    Starts from a zero hidden state and returns (all hidden states, final
    state). Recurrence: ``z = sigm(x W_z + h U_z + b_z)``, ``r = sigm(x W_r
    + h U_r + b_r)``, ``cand = tanh(x W_h + (r*h) U_h + b_h)``,
    ``h' = (1 - z) * h + z * cand``.
    """
    if not xs:
        raise ValueError("empty sequence")
    batch = xs[0].data.shape[0]
    h = Tensor(np.zeros((batch, params.hidden_size)))
    states: list[Tensor] = []
    for x in xs:
        z = sigmoid(x @ params.w_z + h @ params.u_z + params.b_z)
        r = sigmoid(x @ params.w_r + h @ params.u_r + params.b_r)
        cand = tanh(x @ params.w_h + (r * h) @ params.u_h + params.b_h)
        h = (1.0 - z) * h + z * cand
        states.append(h)
    return states, h


def backward(loss: Tensor) -> None:
    loss.backward()


def zero_grads(params: list[Tensor]) -> None:
    for p in params:
        p.grad = None


def glorot_uniform(shape: tuple[int, ...], rng: np.random.Generator,
                   fan_in: int | None = None, fan_out: int | None = None) -> Tensor:
    """Uniform(-a, a) init with ``a = sqrt(6 / (fan_in + fan_out))``."""
    if fan_in is None or fan_out is None:
        if len(shape) == 2:
            fan_in, fan_out = shape
        elif len(shape) == 3:  # conv kernels (C_out, C_in, kw)
            c_out, c_in, kw = shape
            fan_in, fan_out = c_in * kw, c_out * kw
        else:
            raise ValueError("cannot infer fans; pass fan_in/fan_out")
    a = math.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-a, a, size=shape), requires_grad=True)


def adam_step(params: list[Tensor], state: dict, lr: float = 1e-3,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One Adam update with bias correction; ``state`` persists across calls."""
    if "m" not in state:
        state["m"] = [np.zeros_like(p.data) for p in params]
        state["v"] = [np.zeros_like(p.data) for p in params]
        state["t"] = 0
    state["t"] += 1
    t = state["t"]
    for p, m, v in zip(params, state["m"], state["v"]):
        if p.grad is None:
            continue
        g = p.grad
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Adam:
    """Adam optimizer over a fixed parameter list."""

    def __init__(self, params: list[Tensor], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state: dict = {}

    def step(self):
        adam_step(self.params, self.state, self.lr, self.beta1, self.beta2, self.eps)

    def zero_grad(self):
        zero_grads(self.params)
