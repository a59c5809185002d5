"""Small dense network with analytic gradients, written out by hand.

Both predictors in this package (the experience regressor and the
step-outcome predictor) share one architecture: two ReLU hidden layers
of 64 and 32 units and a two-unit output whose first component is
squashed by tanh into (-1, 1) and second by a sigmoid into (0, 1), the
natural ranges of an accuracy-change rate and a reduction rate. The
backward pass is explicit so its correctness can be established against
finite differences rather than trusted to an autograd framework.
"""

from __future__ import annotations

import numpy as np

HIDDEN = (64, 32)


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean over rows of the squared 2-norm of the residual."""
    diff = pred - target
    return float(np.mean(np.sum(diff * diff, axis=1)))


def mse_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    return 2.0 * (pred - target) / pred.shape[0]


class Adam:
    """Adam with one shared step counter across all parameter arrays."""

    def __init__(self, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        """Update ``params`` in place from ``grads`` (matching keys)."""
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for name, grad in grads.items():
            param = params[name]
            if name not in self._m:
                self._m[name] = np.zeros_like(param)
                self._v[name] = np.zeros_like(param)
            m = self._m[name]
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            param -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


class TwoHeadNet:
    """n_in -> 64 -> 32 -> (tanh, sigmoid)."""

    def __init__(self, n_in: int, rng: np.random.Generator) -> None:
        self.n_in = n_in
        dims = (n_in, *HIDDEN, 2)
        self.params: dict[str, np.ndarray] = {}
        for layer, (fan_in, fan_out) in enumerate(zip(dims, dims[1:]), start=1):
            scale = np.sqrt(6.0 / (fan_in + fan_out))
            self.params[f"W{layer}"] = rng.uniform(-scale, scale, size=(fan_in, fan_out))
            self.params[f"b{layer}"] = np.zeros(fan_out)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        p = self.params
        z1 = x @ p["W1"] + p["b1"]
        a1 = np.maximum(z1, 0.0)
        z2 = a1 @ p["W2"] + p["b2"]
        a2 = np.maximum(z2, 0.0)
        z3 = a2 @ p["W3"] + p["b3"]
        y = np.empty_like(z3)
        y[:, 0] = np.tanh(z3[:, 0])
        y[:, 1] = 1.0 / (1.0 + np.exp(-z3[:, 1]))
        cache = {"x": x, "z1": z1, "a1": a1, "z2": z2, "a2": a2, "y": y}
        return y, cache

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.forward(np.atleast_2d(x))[0]

    def backward(
        self, cache: dict[str, np.ndarray], dy: np.ndarray
    ) -> tuple[dict[str, np.ndarray], np.ndarray]:
        """Gradients of a scalar loss given dL/dy; also returns dL/dx."""
        p = self.params
        y = cache["y"]
        dz3 = np.empty_like(dy)
        dz3[:, 0] = dy[:, 0] * (1.0 - y[:, 0] * y[:, 0])
        dz3[:, 1] = dy[:, 1] * y[:, 1] * (1.0 - y[:, 1])
        grads = {
            "W3": cache["a2"].T @ dz3,
            "b3": dz3.sum(axis=0),
        }
        da2 = dz3 @ p["W3"].T
        dz2 = da2 * (cache["z2"] > 0.0)
        grads["W2"] = cache["a1"].T @ dz2
        grads["b2"] = dz2.sum(axis=0)
        da1 = dz2 @ p["W2"].T
        dz1 = da1 * (cache["z1"] > 0.0)
        grads["W1"] = cache["x"].T @ dz1
        grads["b1"] = dz1.sum(axis=0)
        dx = dz1 @ p["W1"].T
        return grads, dx

    def clone_params(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.params.items()}
