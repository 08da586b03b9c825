"""Dense float64 tensors with eager, tape-based reverse-mode differentiation.

Every op computes its value immediately with numpy and, when any input
requires a gradient, records the inputs and a backward rule on the output.
``Tensor.backward`` walks the recorded graph in reverse topological order.
"""

from __future__ import annotations

import contextlib
import itertools
import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import erf

from .errors import NonFiniteError, ShapeError

_ids = itertools.count()
_grad_enabled = True

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (evaluation passes)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    """An n-dimensional float64 array that can take part in differentiation.

    Leaf tensors created with ``requires_grad=True`` receive ``.grad`` after
    :meth:`backward`. Non-leaf tensors keep their parents and a backward rule
    that maps the output gradient to one gradient per parent.
    """

    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name
        self.id = next(_ids)
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], Sequence[np.ndarray | None]] | None = None

    # -- basic properties -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item: expected a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag}, requires_grad={self.requires_grad})"

    def __len__(self) -> int:
        return self.shape[0]

    # -- operator sugar ---------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return slice_(self, index)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        return transpose(self, axes or None)

    # -- differentiation --------------------------------------------------
    def backward(self) -> None:
        backward(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _check_finite(op: str, *tensors: Tensor) -> None:
    for t in tensors:
        if not np.isfinite(t.data).all():
            raise NonFiniteError(f"{op}: input of shape {t.shape} contains NaN or Inf")


def _result(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = np.asarray(data, dtype=np.float64)
    out.grad = None
    out.name = None
    out.id = next(_ids)
    out.requires_grad = _grad_enabled and any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = parents
        out._backward = backward_fn
    else:
        out._parents = ()
        out._backward = None
    return out


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (the adjoint of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


# -- elementwise binary ----------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    _check_finite("add", a, b)

    def bw(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), bw)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("subtract", a, b)
    _check_finite("subtract", a, b)

    def bw(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return _result(a.data - b.data, (a, b), bw)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("multiply", a, b)
    _check_finite("multiply", a, b)

    def bw(g):
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), bw)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("divide", a, b)
    _check_finite("divide", a, b)
    out = a.data / b.data

    def bw(g):
        ga = g / b.data
        return unbroadcast(ga, a.shape), unbroadcast(-ga * out, b.shape)

    return _result(out, (a, b), bw)


def scale(x, c: float) -> Tensor:
    x = as_tensor(x)
    _check_finite("scale", x)
    c = float(c)
    return _result(x.data * c, (x,), lambda g: (g * c,))


# -- linear algebra / shape ------------------------------------------------

def matmul(a, b) -> Tensor:
    """Batched matrix product with numpy broadcasting over leading axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}") from None
    _check_finite("matmul", a, b)

    def bw(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return unbroadcast(ga, a.shape), unbroadcast(gb, b.shape)

    return _result(a.data @ b.data, (a, b), bw)


def transpose(x, axes: Sequence[int] | None = None) -> Tensor:
    x = as_tensor(x)
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(int(a) % x.ndim for a in axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError(f"transpose: axes {axes} invalid for shape {x.shape}")
    inverse = tuple(np.argsort(axes))
    return _result(np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),))


def reshape(x, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeError(f"reshape: cannot reshape {x.shape} into {tuple(shape)}") from None
    return _result(out, (x,), lambda g: (g.reshape(x.shape),))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise ShapeError("concat: no tensors given")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        shapes = [t.shape for t in tensors]
        raise ShapeError(f"concat: incompatible shapes {shapes} along axis {axis}") from None
    _check_finite("concat", *tensors)
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def bw(g):
        return tuple(np.split(g, splits, axis=axis))

    return _result(out, tensors, bw)


def slice_(x, index) -> Tensor:
    """Basic (non-fancy) indexing; the backward scatters into zeros."""
    x = as_tensor(x)
    out = x.data[index]

    def bw(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return _result(np.array(out, dtype=np.float64), (x,), bw)


def pad(x, axis: int, before: int, after: int, mode: str = "constant") -> Tensor:
    """Pad one axis with zeros (``constant``) or repeated edge values (``edge``)."""
    x = as_tensor(x)
    if before < 0 or after < 0:
        raise ShapeError(f"pad: negative pad widths ({before}, {after})")
    if mode not in ("constant", "edge"):
        raise ValueError(f"pad: unknown mode {mode!r}")
    axis = axis % x.ndim
    widths = [(0, 0)] * x.ndim
    widths[axis] = (before, after)
    out = np.pad(x.data, widths, mode=mode)
    n = x.shape[axis]

    def bw(g):
        core = np.take(g, range(before, before + n), axis=axis).copy()
        if mode == "edge":
            lo = [slice(None)] * x.ndim
            hi = [slice(None)] * x.ndim
            lo[axis] = slice(0, 1)
            hi[axis] = slice(n - 1, n)
            core[tuple(lo)] += np.take(g, range(0, before), axis=axis).sum(axis=axis, keepdims=True)
            core[tuple(hi)] += np.take(g, range(before + n, before + n + after), axis=axis).sum(
                axis=axis, keepdims=True
            )
        return (core,)

    return _result(out, (x,), bw)


# -- reductions ------------------------------------------------------------

def _expand(g: np.ndarray, shape: tuple[int, ...], axis, keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def sum_(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    _check_finite("sum", x)
    out = x.data.sum(axis=axis, keepdims=keepdims)
    return _result(out, (x,), lambda g: (_expand(g, x.shape, axis, keepdims).copy(),))


def mean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    _check_finite("mean", x)
    out = x.data.mean(axis=axis, keepdims=keepdims)
    count = x.size // max(out.size, 1)
    return _result(out, (x,), lambda g: (_expand(g, x.shape, axis, keepdims) / count,))


# -- elementwise unary -----------------------------------------------------

def exp(x) -> Tensor:
    x = as_tensor(x)
    _check_finite("exp", x)
    out = np.exp(x.data)
    return _result(out, (x,), lambda g: (g * out,))


def sqrt(x) -> Tensor:
    """Elementwise square root; the gradient at exactly 0 is taken as 0."""
    x = as_tensor(x)
    _check_finite("sqrt", x)
    out = np.sqrt(x.data)

    def grad(g):
        safe = np.where(out > 0, out, 1.0)
        return (np.where(out > 0, g * 0.5 / safe, 0.0),)

    return _result(out, (x,), grad)


def clamp_max(x, limit: float) -> Tensor:
    """min(x, limit); gradient 1 where x <= limit, 0 on the clamped region."""
    x = as_tensor(x)
    _check_finite("clamp_max", x)
    passthrough = x.data <= limit
    return _result(np.minimum(x.data, limit), (x,), lambda g: (g * passthrough,))


def relu(x) -> Tensor:
    x = as_tensor(x)
    _check_finite("relu", x)
    mask = x.data > 0
    return _result(x.data * mask, (x,), lambda g: (g * mask,))


def gelu(x) -> Tensor:
    """Exact GELU, x * Phi(x), using the error function."""
    x = as_tensor(x)
    _check_finite("gelu", x)
    cdf = 0.5 * (1.0 + erf(x.data * _INV_SQRT2))
    pdf = _INV_SQRT2PI * np.exp(-0.5 * x.data * x.data)
    return _result(x.data * cdf, (x,), lambda g: (g * (cdf + x.data * pdf),))


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    _check_finite("softmax", x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return _result(out, (x,), bw)


def square(x) -> Tensor:
    x = as_tensor(x)
    _check_finite("square", x)
    return _result(x.data * x.data, (x,), lambda g: (2.0 * g * x.data,))


# -- graph traversal -------------------------------------------------------

def _topological(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.id in seen:
            continue
        seen.add(node.id)
        stack.append((node, True))
        for parent in reversed(node._parents):
            if parent.id not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every reachable leaf."""
    if loss.size != 1:
        raise ShapeError(f"backward: loss must be a scalar, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    grads: dict[int, np.ndarray] = {loss.id: np.ones_like(loss.data)}
    for node in reversed(_topological(loss)):
        g = grads.pop(node.id, None)
        if g is None:
            continue
        if node.is_leaf:
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            if parent.id in grads:
                grads[parent.id] = grads[parent.id] + pg
            else:
                grads[parent.id] = np.asarray(pg, dtype=np.float64)


def gradient_check(
    f: Callable[..., Tensor], *points, step: float = 1e-5, return_grads: bool = False
):
    """Largest relative gap between autodiff and central differences.

    ``f`` maps tensors to a scalar tensor. The error per coordinate is
    ``|autodiff - fd| / max(1, |fd|)``; NaN anywhere counts as failure (inf),
    including a non-finite value raised from inside ``f``.
    """
    try:
        return _gradient_check(f, points, step, return_grads)
    except NonFiniteError:
        return (math.inf, None) if return_grads else math.inf


def _gradient_check(f, points, step, return_grads):
    arrays = [np.array(as_tensor(p).data, dtype=np.float64) for p in points]
    leaves = [Tensor(a, requires_grad=True) for a in arrays]
    out = f(*leaves)
    backward(out)
    analytic = [np.zeros_like(a) if t.grad is None else t.grad for a, t in zip(arrays, leaves)]

    worst = 0.0
    with no_grad():
        for i, base in enumerate(arrays):
            numeric = np.zeros_like(base)
            flat = base.reshape(-1)
            for j in range(flat.size):
                keep = flat[j]
                flat[j] = keep + step
                hi = f(*[Tensor(a) for a in arrays]).item()
                flat[j] = keep - step
                lo = f(*[Tensor(a) for a in arrays]).item()
                flat[j] = keep
                numeric.reshape(-1)[j] = (hi - lo) / (2.0 * step)
            err = np.abs(analytic[i] - numeric) / np.maximum(1.0, np.abs(numeric))
            if np.isnan(err).any():
                worst = math.inf
            elif err.size:
                worst = max(worst, float(err.max()))
    if return_grads:
        return worst, analytic
    return worst


def parameters_finite(params: Iterable[Tensor]) -> bool:
    return all(np.isfinite(p.data).all() for p in params)
