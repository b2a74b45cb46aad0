"""Fully connected networks with analytic gradients over flat parameters.

Parameters of a network live in one vector (float64 by default, float32 for
faster training runs) so optimizers and target synchronization are single
vector operations.  Layer ``i`` stores a weight matrix of shape
(fan_in, fan_out) followed by its bias, row-major.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _n_params(sizes) -> int:
    return sum(i * o + o for i, o in zip(sizes, sizes[1:]))


class Mlp:
    """ReLU hidden layers, linear output."""

    def __init__(self, sizes, rng: np.random.Generator | None = None,
                 params: np.ndarray | None = None, out_scale: float = 1.0, dtype=np.float64):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError(f"bad layer sizes {sizes}")
        n = _n_params(self.sizes)
        if params is None:
            params = np.zeros(n, dtype=dtype)
        elif params.shape != (n,):
            raise ValueError(f"expected {n} parameters, got {params.shape}")
        self.params = params
        self._bind()
        if rng is not None:
            self.init(rng, out_scale)

    def _bind(self):
        self.W, self.b = [], []
        k = 0
        for i, o in zip(self.sizes, self.sizes[1:]):
            self.W.append(self.params[k:k + i * o].reshape(i, o))
            k += i * o
            self.b.append(self.params[k:k + o])
            k += o

    @property
    def n_params(self) -> int:
        return self.params.size

    def init(self, rng: np.random.Generator, out_scale: float = 1.0) -> None:
        """Uniform(+-1/sqrt(fan_in)) weights, zero biases; output layer scaled."""
        for j, W in enumerate(self.W):
            lim = 1.0 / np.sqrt(W.shape[0])
            if j == len(self.W) - 1:
                lim *= out_scale
            W[...] = rng.uniform(-lim, lim, size=W.shape)
        for b in self.b:
            b[...] = 0.0

    def forward(self, x: np.ndarray, keep: bool = False):
        x = np.asarray(x, dtype=self.params.dtype)
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise ValueError(f"input shape {x.shape} does not match width {self.sizes[0]}")
        acts = [x]
        h = x
        last = len(self.W) - 1
        for j, (W, b) in enumerate(zip(self.W, self.b)):
            h = h @ W + b
            if j < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        return (h, acts) if keep else h

    __call__ = forward

    def backward(self, acts, grad_out: np.ndarray, need_input: bool = False):
        """Parameter gradient (flat) and optionally the input gradient."""
        grad = np.empty_like(self.params)
        gW, gb = _views(grad, self.sizes)
        g = np.asarray(grad_out, dtype=self.params.dtype)
        if g.shape != acts[-1].shape:
            raise ValueError(f"upstream gradient {g.shape} does not match output {acts[-1].shape}")
        for j in range(len(self.W) - 1, -1, -1):
            if j < len(self.W) - 1:
                g = g * (acts[j + 1] > 0)
            gW[j][...] = acts[j].T @ g
            gb[j][...] = g.sum(axis=0)
            if j > 0 or need_input:
                g = g @ self.W[j].T
        return (grad, g) if need_input else grad

    def copy(self) -> "Mlp":
        return Mlp(self.sizes, params=self.params.copy())


def _views(flat, sizes):
    Ws, bs = [], []
    k = 0
    for i, o in zip(sizes, sizes[1:]):
        Ws.append(flat[k:k + i * o].reshape(i, o))
        k += i * o
        bs.append(flat[k:k + o])
        k += o
    return Ws, bs


def forward_backward(net, x, upstream):
    """Output and parameter gradient of ``sum(upstream * net(x))``; no side effects."""
    out, acts = net.forward(x, keep=True)
    return out, net.backward(acts, upstream)


class DuelingQ:
    """Separate value and advantage streams; Q = V + A - mean_a A."""

    def __init__(self, in_dim: int, n_actions: int, hidden=(64, 64), rng=None, dtype=np.float64):
        sv = (in_dim, *hidden, 1)
        sa = (in_dim, *hidden, n_actions)
        nv = _n_params(sv)
        self.params = np.zeros(nv + _n_params(sa), dtype=dtype)
        self.value = Mlp(sv, params=self.params[:nv])
        self.adv = Mlp(sa, params=self.params[nv:])
        self.n_actions = n_actions
        self.sizes = (sv, sa)
        if rng is not None:
            self.value.init(rng)
            self.adv.init(rng)

    @property
    def n_params(self) -> int:
        return self.params.size

    def combine(self, v, a):
        return v + a - a.mean(axis=1, keepdims=True)

    def forward(self, x, keep: bool = False):
        v, cv = self.value.forward(x, keep=True)
        a, ca = self.adv.forward(x, keep=True)
        q = self.combine(v, a)
        return (q, (cv, ca)) if keep else q

    __call__ = forward

    def backward(self, cache, grad_q):
        cv, ca = cache
        g_v = grad_q.sum(axis=1, keepdims=True)
        g_a = grad_q - grad_q.mean(axis=1, keepdims=True)
        return np.concatenate([self.value.backward(cv, g_v), self.adv.backward(ca, g_a)])

    def copy(self) -> "DuelingQ":
        out = DuelingQ.__new__(DuelingQ)
        out.params = self.params.copy()
        nv = self.value.n_params
        out.value = Mlp(self.value.sizes, params=out.params[:nv])
        out.adv = Mlp(self.adv.sizes, params=out.params[nv:])
        out.n_actions, out.sizes = self.n_actions, self.sizes
        return out


@dataclass
class Adam:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = field(default=None, repr=False)
    v: np.ndarray | None = field(default=None, repr=False)
    t: int = 0

    def step(self, params: np.ndarray, grads: np.ndarray) -> None:
        """In-place Adam update with bias correction.

        Uses the algebraically identical form with the corrections folded
        into the step size and epsilon, which saves two vector passes.
        """
        if not np.isfinite(grads.sum()) and not np.all(np.isfinite(grads)):
            raise FloatingPointError("non-finite gradient; aborting training")
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m += (1 - self.beta1) * (grads - self.m)
        self.v += (1 - self.beta2) * (grads * grads - self.v)
        c2 = math.sqrt(1 - self.beta2 ** self.t)
        step = self.lr * c2 / (1 - self.beta1 ** self.t)
        params -= step * self.m / (np.sqrt(self.v) + self.eps * c2)
        if self.t % 10 == 0:
            # moments of dead units decay geometrically into subnormals, which
            # make every later vector op an order of magnitude slower
            floor = np.finfo(self.m.dtype).tiny * 2.0 ** 24
            for buf in (self.m, self.v):
                buf[np.abs(buf) < floor] = 0.0


def adam_step(params, grads, moments: Adam | None = None, **hyper):
    """Functional wrapper: returns (new_params, moments)."""
    opt = moments if moments is not None else Adam(**hyper)
    out = np.array(params, dtype=float, copy=True)
    opt.step(out, np.asarray(grads, dtype=float))
    return out, opt


def polyak(target: np.ndarray, online: np.ndarray, tau: float) -> None:
    """target <- tau * online + (1 - tau) * target, in place."""
    if tau >= 1.0:
        target[...] = online
    else:
        target *= 1.0 - tau
        target += tau * online


def encode_product_state(features: np.ndarray, omega: int, n_states: int) -> np.ndarray:
    """Environment features followed by a one-hot of the automaton state."""
    onehot = np.zeros(n_states)
    onehot[omega] = 1.0
    return np.concatenate([np.asarray(features, dtype=float), onehot])
