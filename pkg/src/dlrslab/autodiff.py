"""Reverse-mode automatic differentiation on a flat tape.

Nodes hold numpy float64 arrays so a whole mini-batch propagates through
one node; the tape itself stays small (tens of nodes per training step).
Creation order is topological order, so one reverse sweep suffices.
"""

import numpy as np


class NonFiniteError(FloatingPointError):
    """A forward value or gradient contains NaN/Inf."""


def check_finite(value, what):
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"non-finite values encountered in {what}")
    return value


class Tape:
    """Records Vars in creation (= topological) order."""

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes = []

    def leaf(self, value):
        """Wrap an array as a differentiable leaf (a parameter)."""
        return Var(self, value)

    def constant(self, value):
        """Wrap an array that participates but carries no gradient."""
        return Var(self, value)

    def __len__(self):
        return len(self.nodes)


def _unbroadcast(g, shape):
    """Sum a broadcasted gradient back down to the operand's shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, ss) in enumerate(zip(g.shape, shape)) if ss == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


class Var:
    """One tape node: a float64 array plus vector-Jacobian callbacks."""

    __slots__ = ("tape", "index", "value", "parents", "vjps")

    # force numpy to defer to our reflected operators (ndarray op Var)
    __array_ufunc__ = None

    def __init__(self, tape, value, parents=(), vjps=()):
        self.tape = tape
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.vjps = vjps
        self.index = len(tape.nodes)
        tape.nodes.append(self)

    def _lift(self, other):
        if isinstance(other, Var):
            return other
        return Var(self.tape, other)

    # --- elementwise binary ops (broadcasting) ---

    def __add__(self, other):
        other = self._lift(other)
        return Var(self.tape, self.value + other.value, (self, other),
                   (lambda g: _unbroadcast(g, self.value.shape),
                    lambda g: _unbroadcast(g, other.value.shape)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        return Var(self.tape, self.value - other.value, (self, other),
                   (lambda g: _unbroadcast(g, self.value.shape),
                    lambda g: _unbroadcast(-g, other.value.shape)))

    def __rsub__(self, other):
        return self._lift(other).__sub__(self)

    def __mul__(self, other):
        other = self._lift(other)
        return Var(self.tape, self.value * other.value, (self, other),
                   (lambda g: _unbroadcast(g * other.value, self.value.shape),
                    lambda g: _unbroadcast(g * self.value, other.value.shape)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        return Var(self.tape, self.value / other.value, (self, other),
                   (lambda g: _unbroadcast(g / other.value, self.value.shape),
                    lambda g: _unbroadcast(-g * self.value / other.value ** 2,
                                           other.value.shape)))

    def __rtruediv__(self, other):
        return self._lift(other).__truediv__(self)

    def __neg__(self):
        return Var(self.tape, -self.value, (self,), (lambda g: -g,))

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only numeric exponents are supported")
        return Var(self.tape, self.value ** exponent, (self,),
                   (lambda g: g * exponent * self.value ** (exponent - 1),))

    # --- elementwise unary ops ---

    def sin(self):
        return Var(self.tape, np.sin(self.value), (self,),
                   (lambda g: g * np.cos(self.value),))

    def cos(self):
        return Var(self.tape, np.cos(self.value), (self,),
                   (lambda g: -g * np.sin(self.value),))

    def tanh(self):
        t = np.tanh(self.value)
        return Var(self.tape, t, (self,), (lambda g: g * (1.0 - t * t),))

    def exp(self):
        e = np.exp(self.value)
        return Var(self.tape, e, (self,), (lambda g: g * e,))

    def log(self):
        return Var(self.tape, np.log(self.value), (self,),
                   (lambda g: g / self.value,))

    def relu(self):
        mask = self.value > 0.0
        return Var(self.tape, np.where(mask, self.value, 0.0), (self,),
                   (lambda g: g * mask,))

    def identity(self):
        return self

    # --- structural ops ---

    def __matmul__(self, other):
        other = self._lift(other)
        if self.value.ndim != 2 or other.value.ndim != 2:
            raise ValueError("matmul expects 2-D operands")
        return Var(self.tape, self.value @ other.value, (self, other),
                   (lambda g: g @ other.value.T,
                    lambda g: self.value.T @ g))

    def __rmatmul__(self, other):
        return self._lift(other).__matmul__(self)

    @property
    def T(self):
        return Var(self.tape, self.value.T, (self,), (lambda g: g.T,))

    def reshape(self, shape):
        orig = self.value.shape
        return Var(self.tape, self.value.reshape(shape), (self,),
                   (lambda g: g.reshape(orig),))

    def sum(self, axis=None):
        orig = self.value.shape

        def vjp(g):
            if axis is None:
                return np.broadcast_to(g, orig).copy()
            return np.broadcast_to(np.expand_dims(g, axis), orig).copy()

        return Var(self.tape, self.value.sum(axis=axis), (self,), (vjp,))

    def mean(self, axis=None):
        n = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis) * (1.0 / n)

    def __repr__(self):
        return f"Var(index={self.index}, shape={self.value.shape})"


class GradientMap:
    """Gradient lookup for every node of one backward sweep.

    Leaves that never influenced the loss report an exact zero gradient.
    """

    def __init__(self, grads, tape):
        self._grads = grads
        self._tape = tape

    def __getitem__(self, var):
        if var.tape is not self._tape:
            raise ValueError("variable does not belong to this tape")
        g = self._grads[var.index]
        if g is None:
            return np.zeros_like(var.value)
        return np.asarray(g, dtype=np.float64).reshape(var.value.shape)


def grad(loss, tape):
    """Backpropagate from a scalar loss node through the whole tape."""
    if loss.value.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")
    grads = [None] * len(tape.nodes)
    grads[loss.index] = np.ones_like(loss.value)
    for node in reversed(tape.nodes[: loss.index + 1]):
        g = grads[node.index]
        if g is None:
            continue
        for parent, vjp in zip(node.parents, node.vjps):
            contrib = vjp(g)
            if grads[parent.index] is None:
                grads[parent.index] = contrib
            else:
                grads[parent.index] = grads[parent.index] + contrib
    return GradientMap(grads, tape)
