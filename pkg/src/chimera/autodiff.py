"""Reverse-mode automatic differentiation over dense float64 matrices.

A Tape owns one forward computation: leaves are registered by name, every
operator records its output together with a local gradient rule, and a
single backward() pass returns the gradient of a scalar loss with respect
to every leaf. Tensors are immutable values; a tape can be consumed by
backward() exactly once.

Supported operators: matmul, add, sub, scale (scalar * matrix), hadamard,
concat_cols, transpose, relu, sigmoid, sum_of_squares, inner.
"""
from __future__ import annotations

from typing import Callable

import numpy as np


class ShapeError(ValueError):
    """Operand shapes incompatible for an operator."""

    def __init__(self, op: str, *shapes: tuple[int, int]):
        self.op = op
        self.shapes = shapes
        super().__init__(f"{op}: incompatible shapes {' and '.join(str(s) for s in shapes)}")


class TapeError(RuntimeError):
    """Backward called on a bad target or a spent tape."""


def _as_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ValueError(f"tensors are 2-D, got ndim={arr.ndim}")
    return arr


class Tensor:
    """Immutable 2-D float64 value bound to the tape that produced it."""

    __slots__ = ("data", "tape", "index")

    def __init__(self, data, tape: "Tape", index: int):
        arr = _as_matrix(data)
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError("non-finite value in tensor")
        arr.flags.writeable = False
        self.data = arr
        self.tape = tape
        self.index = index

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def item(self) -> float:
        if self.data.shape != (1, 1):
            raise ValueError(f"item() on non-scalar tensor of shape {self.data.shape}")
        return float(self.data[0, 0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape})"


class Tape:
    """Ordered record of operations; grants one backward pass."""

    def __init__(self):
        # each record: (output index, parent indices, backward fn)
        # backward fn maps the output gradient to per-parent gradients.
        self._records: list[tuple[int, tuple[int, ...], Callable]] = []
        self._leaves: dict[str, Tensor] = {}
        self._count = 0
        self._spent = False

    def _next(self) -> int:
        idx = self._count
        self._count += 1
        return idx

    def leaf(self, name: str, data) -> Tensor:
        """Register a named differentiable leaf (a trainable parameter)."""
        if name in self._leaves:
            raise ValueError(f"duplicate leaf name {name!r}")
        t = Tensor(data, self, self._next())
        self._leaves[name] = t
        return t

    def constant(self, data) -> Tensor:
        """A value that participates in the computation but gets no gradient."""
        return Tensor(data, self, self._next())

    def _record(self, out: Tensor, parents: tuple[Tensor, ...], backward_fn: Callable) -> Tensor:
        self._records.append((out.index, tuple(p.index for p in parents), backward_fn))
        return out

    def backward(self, loss: Tensor) -> dict[str, np.ndarray]:
        """Gradient of a scalar loss with respect to every leaf.

        The tape is consumed: a second call raises.
        """
        if self._spent:
            raise TapeError("tape already consumed by a backward pass")
        if loss.tape is not self:
            raise TapeError("loss was not produced on this tape")
        if loss.data.shape != (1, 1):
            raise TapeError(f"loss must be scalar, got shape {loss.data.shape}")
        self._spent = True

        grads: dict[int, np.ndarray] = {loss.index: np.ones((1, 1))}
        for out_idx, parent_idxs, backward_fn in reversed(self._records):
            g = grads.get(out_idx)
            if g is None:
                continue
            for p_idx, p_grad in zip(parent_idxs, backward_fn(g)):
                if p_grad is None:
                    continue
                acc = grads.get(p_idx)
                grads[p_idx] = p_grad if acc is None else acc + p_grad
        out = {}
        for name, t in self._leaves.items():
            g = grads.get(t.index)
            out[name] = np.zeros(t.data.shape) if g is None else g
        return out


def _same_tape(op: str, *tensors: Tensor) -> Tape:
    tape = tensors[0].tape
    for t in tensors[1:]:
        if t.tape is not tape:
            raise TapeError(f"{op}: operands belong to different tapes")
    return tape


def matmul(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape("matmul", a, b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    out = Tensor(a.data @ b.data, tape, tape._next())
    ad, bd = a.data, b.data
    return tape._record(out, (a, b), lambda g: (g @ bd.T, ad.T @ g))


def add(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape("add", a, b)
    if a.shape != b.shape:
        raise ShapeError("add", a.shape, b.shape)
    out = Tensor(a.data + b.data, tape, tape._next())
    return tape._record(out, (a, b), lambda g: (g, g))


def scale(a: Tensor, s: float) -> Tensor:
    s = float(s)
    tape = a.tape
    out = Tensor(a.data * s, tape, tape._next())
    return tape._record(out, (a,), lambda g: (g * s,))


def sub(a: Tensor, b: Tensor) -> Tensor:
    return add(a, scale(b, -1.0))


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape("hadamard", a, b)
    if a.shape != b.shape:
        raise ShapeError("hadamard", a.shape, b.shape)
    out = Tensor(a.data * b.data, tape, tape._next())
    ad, bd = a.data, b.data
    return tape._record(out, (a, b), lambda g: (g * bd, g * ad))


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape("concat_cols", a, b)
    if a.shape[0] != b.shape[0]:
        raise ShapeError("concat_cols", a.shape, b.shape)
    out = Tensor(np.hstack([a.data, b.data]), tape, tape._next())
    na = a.shape[1]
    return tape._record(out, (a, b), lambda g: (g[:, :na], g[:, na:]))


def transpose(a: Tensor) -> Tensor:
    tape = a.tape
    out = Tensor(a.data.T, tape, tape._next())
    return tape._record(out, (a,), lambda g: (g.T,))


def relu(a: Tensor) -> Tensor:
    tape = a.tape
    out = Tensor(np.maximum(a.data, 0.0), tape, tape._next())
    mask = a.data > 0.0
    return tape._record(out, (a,), lambda g: (g * mask,))


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    """Overflow-free logistic on a plain array; shared with untaped code."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a: Tensor) -> Tensor:
    tape = a.tape
    val = stable_sigmoid(a.data)
    out = Tensor(val, tape, tape._next())
    return tape._record(out, (a,), lambda g: (g * val * (1.0 - val),))


def sum_of_squares(a: Tensor) -> Tensor:
    tape = a.tape
    out = Tensor(np.sum(a.data * a.data), tape, tape._next())
    ad = a.data
    return tape._record(out, (a,), lambda g: (2.0 * float(g[0, 0]) * ad,))


def inner(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape("inner", a, b)
    if a.shape != b.shape:
        raise ShapeError("inner", a.shape, b.shape)
    out = Tensor(np.sum(a.data * b.data), tape, tape._next())
    ad, bd = a.data, b.data
    return tape._record(out, (a, b), lambda g: (float(g[0, 0]) * bd, float(g[0, 0]) * ad))


def tanh(a: Tensor) -> Tensor:
    tape = a.tape
    val = np.tanh(a.data)
    out = Tensor(val, tape, tape._next())
    return tape._record(out, (a,), lambda g: (g * (1.0 - val * val),))


# Identity activation is occasionally useful when wiring test fixtures.
def identity(a: Tensor) -> Tensor:
    tape = a.tape
    out = Tensor(a.data.copy(), tape, tape._next())
    return tape._record(out, (a,), lambda g: (g,))


ACTIVATIONS: dict[str, Callable[[Tensor], Tensor]] = {
    "relu": relu,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "identity": identity,
}
