"""Second-order forward-mode numbers.

A Dual2 carries a value and its first two derivatives with respect to one
seeded input. Components may be floats, numpy arrays, or autodiff Vars, so
the same propagation code serves plain evaluation and taped training.
"""

import numpy as np

from .autodiff import Var


def _sin(x):
    return x.sin() if isinstance(x, Var) else np.sin(x)


def _cos(x):
    return x.cos() if isinstance(x, Var) else np.cos(x)


def _tanh(x):
    return x.tanh() if isinstance(x, Var) else np.tanh(x)


def _exp(x):
    return x.exp() if isinstance(x, Var) else np.exp(x)


class Dual2:
    """value + d1·ε + d2·ε² truncated Taylor arithmetic."""

    __slots__ = ("value", "d1", "d2")

    # force numpy to defer to our reflected operators (ndarray op Dual2)
    __array_ufunc__ = None

    def __init__(self, value, d1=0.0, d2=0.0):
        self.value = value
        self.d1 = d1
        self.d2 = d2

    @classmethod
    def seed(cls, x):
        """Mark x as the differentiation input: d1 = 1, d2 = 0."""
        x = np.asarray(x, dtype=np.float64)
        return cls(x, np.ones_like(x), np.zeros_like(x))

    @classmethod
    def constant(cls, c):
        return cls(c, 0.0, 0.0)

    def __add__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)
        return Dual2(self.value + other, self.d1, self.d2)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)
        return Dual2(self.value - other, self.d1, self.d2)

    def __rsub__(self, other):
        return Dual2(other - self.value, -self.d1, -self.d2)

    def __mul__(self, other):
        if isinstance(other, Dual2):
            return Dual2(self.value * other.value,
                         self.d1 * other.value + self.value * other.d1,
                         self.d2 * other.value + 2.0 * self.d1 * other.d1
                         + self.value * other.d2)
        return Dual2(self.value * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Dual2):
            inv = 1.0 / other
            return Dual2(self.value * inv, self.d1 * inv, self.d2 * inv)
        q = self.value / other.value
        q1 = (self.d1 - q * other.d1) / other.value
        q2 = (self.d2 - 2.0 * q1 * other.d1 - q * other.d2) / other.value
        return Dual2(q, q1, q2)

    def __rtruediv__(self, other):
        return Dual2.constant(other).__truediv__(self)

    def __neg__(self):
        return Dual2(-self.value, -self.d1, -self.d2)

    def __pow__(self, n):
        if not isinstance(n, (int, float)):
            raise TypeError("only numeric exponents are supported")
        v = self.value
        return self._chain(v ** n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2))

    def _chain(self, h, h1, h2):
        # y = h(v): y' = h'(v) v', y'' = h''(v) v'^2 + h'(v) v''
        return Dual2(h, h1 * self.d1, h2 * self.d1 * self.d1 + h1 * self.d2)

    def sin(self):
        s, c = _sin(self.value), _cos(self.value)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = _sin(self.value), _cos(self.value)
        return self._chain(c, -s, -c)

    def tanh(self):
        t = _tanh(self.value)
        sech2 = 1.0 - t * t
        return self._chain(t, sech2, -2.0 * t * sech2)

    def exp(self):
        e = _exp(self.value)
        return self._chain(e, e, e)

    def relu(self):
        # d2 is zero almost everywhere; the kink at 0 is measure-zero
        v = self.value
        if isinstance(v, Var):
            raise TypeError("relu on taped Dual2 is not supported")
        mask = np.asarray(v) > 0.0
        return Dual2(np.where(mask, v, 0.0), self.d1 * mask, self.d2 * mask)

    def identity(self):
        return self

    def __repr__(self):
        return f"Dual2(value={self.value!r}, d1={self.d1!r}, d2={self.d2!r})"
