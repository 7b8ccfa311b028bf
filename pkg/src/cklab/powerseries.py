"""Truncated power series with float coefficients, just rich enough to push
the polynomial right-hand sides through."""
from __future__ import annotations

import numpy as np


class Series:
    __slots__ = ("c",)

    def __init__(self, coeffs, order: int | None = None):
        c = np.asarray(coeffs, dtype=float)
        if order is not None:
            out = np.zeros(order + 1)
            out[: min(len(c), order + 1)] = c[: order + 1]
            c = out
        self.c = c

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @classmethod
    def const(cls, value: float, order: int) -> "Series":
        out = np.zeros(order + 1)
        out[0] = value
        return cls(out)

    def _coerce(self, other):
        if isinstance(other, Series):
            return other.c
        out = np.zeros_like(self.c)
        out[0] = other
        return out

    def __add__(self, other):
        return Series(self.c + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Series(self.c - self._coerce(other))

    def __rsub__(self, other):
        return Series(self._coerce(other) - self.c)

    def __neg__(self):
        return Series(-self.c)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.c * other)
        n = len(self.c)
        return Series(np.convolve(self.c, other.c)[:n])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Series.const(1.0, self.order)
        for _ in range(int(k)):
            out = out * self
        return out

    def shift(self, k: int) -> "Series":
        """Multiply by ``x^k`` (``k`` may be negative if the low terms vanish)."""
        n = len(self.c)
        out = np.zeros(n)
        if k >= 0:
            out[k:] = self.c[: n - k]
        else:
            out[: n + k] = self.c[-k:]
        return Series(out)

    def derivative(self) -> "Series":
        n = len(self.c)
        out = np.zeros(n)
        out[: n - 1] = self.c[1:] * np.arange(1, n)
        return Series(out)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.c)

    def __repr__(self):
        return f"Series({self.c.tolist()})"
