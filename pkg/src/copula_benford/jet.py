"""Truncated Taylor series ("jets") with numpy batch dimensions.

A jet of order ``n`` holds the normalized Taylor coefficients
``c[k] = f^(k)(x0) / k!`` for ``k = 0..n``.  Coefficient arrays have shape
``(n + 1, *batch)`` so one jet can carry many expansion points at once.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.ndim == 0:
            raise ValueError("a jet needs at least the zeroth coefficient")

    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        """Expansion of the identity map around ``x``."""
        x = np.asarray(x, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, x, order: int) -> "Jet":
        x = np.asarray(x, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = x
        return cls(c)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    def derivatives(self) -> np.ndarray:
        """Derivatives ``f^(k)(x0)`` for ``k = 0..order``, stacked on axis 0."""
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.coeffs * fact.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))

    def derivative(self, k: int) -> np.ndarray:
        return self.coeffs[k] * math.factorial(k)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError(f"jet order mismatch: {self.order} vs {other.order}")
            return other
        return Jet.constant(other, self.order)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, coeffs={self.coeffs!r})"

    # -- arithmetic -------------------------------------------------------

    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs)

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return Jet(self.coeffs + self._coerce(other).coeffs)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.coeffs.shape[1:], other.shape)
        c = np.broadcast_to(self.coeffs, (self.order + 1,) + shape).copy()
        c[0] += other
        return Jet(c)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.coeffs * np.asarray(other, dtype=float))
        a, b = self.coeffs, self._coerce(other).coeffs
        n = self.order
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((n + 1,) + shape)
        for k in range(n + 1):
            acc = out[k]
            for j in range(k + 1):
                acc = acc + a[j] * b[k - j]
            out[k] = acc
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.coeffs
        n = self.order
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, n + 1):
            acc = np.zeros_like(a[0])
            for j in range(1, k + 1):
                acc = acc + a[j] * out[k - j]
            out[k] = -acc / a[0]
        return Jet(out)

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.coeffs / np.asarray(other, dtype=float))
        a, b = self.coeffs, self._coerce(other).coeffs
        n = self.order
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((n + 1,) + shape)
        for k in range(n + 1):
            acc = a[k] + np.zeros(shape)
            for j in range(1, k + 1):
                acc = acc - b[j] * out[k - j]
            out[k] = acc / b[0]
        return Jet(out)

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, r) -> "Jet":
        if isinstance(r, Jet):
            return (self.log() * r).exp()
        r = float(r)
        a = self.coeffs
        n = self.order
        out = np.zeros_like(a)
        out[0] = a[0] ** r
        for k in range(1, n + 1):
            acc = np.zeros_like(a[0])
            for j in range(1, k + 1):
                acc = acc + ((r + 1.0) * j - k) * a[j] * out[k - j]
            out[k] = acc / (k * a[0])
        return Jet(out)

    def exp(self) -> "Jet":
        a = self.coeffs
        n = self.order
        out = np.zeros_like(a)
        out[0] = np.exp(a[0])
        for k in range(1, n + 1):
            acc = np.zeros_like(a[0])
            for j in range(1, k + 1):
                acc = acc + j * a[j] * out[k - j]
            out[k] = acc / k
        return Jet(out)

    def log(self) -> "Jet":
        a = self.coeffs
        n = self.order
        out = np.zeros_like(a)
        out[0] = np.log(a[0])
        for k in range(1, n + 1):
            acc = np.zeros_like(a[0])
            for j in range(1, k):
                acc = acc + j * out[j] * a[k - j]
            out[k] = (a[k] - acc / k) / a[0]
        return Jet(out)


def exp(j: Jet) -> Jet:
    return j.exp()


def log(j: Jet) -> Jet:
    return j.log()
