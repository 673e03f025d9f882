"""A fixed-architecture tanh MLP with hand-written derivatives.

Parameters live in one flat vector ``theta`` laid out layer by layer as
``W (in, out)`` followed by ``b (out,)``. Besides the forward pass the
network exposes vector-Jacobian products (reverse mode) and Jacobian-vector
products (forward mode) with respect to ``theta``; together they give exact
Fisher-vector products without a general autodiff engine.
"""
from __future__ import annotations

import numpy as np


class NonFiniteError(FloatingPointError):
    pass


class Mlp:
    def __init__(self, sizes, output_gain=1.0):
        self.sizes = tuple(int(n) for n in sizes)
        if len(self.sizes) < 2:
            raise ValueError("an MLP needs at least input and output sizes")
        self.output_gain = output_gain
        self.shapes = []
        offset = 0
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            self.shapes.append((offset, n_in, n_out))
            offset += n_in * n_out + n_out
        self.n_params = offset

    def unpack(self, theta):
        layers = []
        for offset, n_in, n_out in self.shapes:
            w = theta[offset : offset + n_in * n_out].reshape(n_in, n_out)
            b = theta[offset + n_in * n_out : offset + n_in * n_out + n_out]
            layers.append((w, b))
        return layers

    def init_params(self, rng) -> np.ndarray:
        """Orthogonal weights (gain 1 for hidden layers), zero biases."""
        theta = np.zeros(self.n_params)
        for k, (w, _) in enumerate(self.unpack(theta)):
            n_in, n_out = w.shape
            a = rng.normal(size=(max(n_in, n_out), min(n_in, n_out)))
            q, r = np.linalg.qr(a)
            q = q * np.sign(np.diag(r))
            q = q if n_in >= n_out else q.T
            gain = self.output_gain if k == len(self.shapes) - 1 else 1.0
            w[...] = gain * q[:n_in, :n_out]
        return theta

    def forward(self, theta, x):
        """Returns ``(output, cache)``; ``x`` has shape (N, in)."""
        h = np.atleast_2d(np.asarray(x, dtype=np.float64))
        acts = [h]
        layers = self.unpack(theta)
        for k, (w, b) in enumerate(layers):
            z = h @ w + b
            h = z if k == len(layers) - 1 else np.tanh(z)
            acts.append(h)
        if not np.all(np.isfinite(h)):
            raise NonFiniteError("non-finite MLP output")
        return h, acts

    def __call__(self, theta, x):
        return self.forward(theta, x)[0]

    def vjp(self, theta, cache, grad_out, wrt_input=False):
        """sum_i grad_out[i] . d out_i / d theta (and optionally d/d input)."""
        layers = self.unpack(theta)
        grad = np.zeros(self.n_params)
        glayers = self.unpack(grad)
        delta = np.asarray(grad_out, dtype=np.float64).reshape(cache[-1].shape)
        for k in range(len(layers) - 1, -1, -1):
            w, _ = layers[k]
            gw, gb = glayers[k]
            gw[...] = cache[k].T @ delta
            gb[...] = delta.sum(0)
            delta = delta @ w.T
            if k > 0:
                delta = delta * (1.0 - cache[k] ** 2)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError("non-finite MLP gradient")
        return (grad, delta) if wrt_input else grad

    def jvp(self, theta, cache, v):
        """d out / d theta . v for every row of the cached batch."""
        layers = self.unpack(theta)
        vlayers = self.unpack(np.asarray(v, dtype=np.float64))
        dh = np.zeros_like(cache[0])
        for k, ((w, _), (vw, vb)) in enumerate(zip(layers, vlayers)):
            dz = dh @ w + cache[k] @ vw + vb
            dh = dz if k == len(layers) - 1 else dz * (1.0 - cache[k + 1] ** 2)
        return dh


def mlp_forward(mlp: Mlp, theta, x):
    return mlp(theta, x)


def mlp_param_grad(mlp: Mlp, theta, x, output_seed):
    """Gradient of sum(output * output_seed) with respect to theta."""
    _, cache = mlp.forward(theta, x)
    return mlp.vjp(theta, cache, output_seed)


class Adam:
    """Adam on a flat parameter vector (ascent or descent chosen by the caller's sign)."""

    def __init__(self, n_params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0

    def step(self, theta, grad):
        """Returns theta moved against ``grad`` (a minimization step)."""
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
