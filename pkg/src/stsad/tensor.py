"""Dense tensor primitives: unfolding, mode products, norms, support
projections, soft thresholding, and the plain-text tensor file format.

Tensors are plain numpy arrays of any order >= 2.  Mode indices are 1-based
throughout (mode 1 is the first axis).  The mode-n unfolding arranges the
remaining modes cyclically, n+1, ..., N, 1, ..., n-1, with the first of that
list varying fastest along the columns.  On disk a tensor is stored as a
header line ``dims: I1 I2 ... IN`` followed by one value per element with the
first index varying fastest.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "unfold",
    "fold",
    "mode_n_product",
    "tensor_norms",
    "project_support",
    "soft_threshold",
    "save_tensor",
    "load_tensor",
    "save_mask",
    "load_mask",
]


def _check_mode(ndim, mode):
    if not isinstance(mode, (int, np.integer)) or not 1 <= mode <= ndim:
        raise ValueError(f"mode must be an integer in [1, {ndim}], got {mode!r}")


def _cyclic_axes(ndim, mode):
    # axes n, n+1, ..., N, 1, ..., n-1 (0-based)
    return tuple((mode - 1 + i) % ndim for i in range(ndim))


def unfold(tensor, mode):
    """Mode-``mode`` unfolding of a tensor into an ``I_n x prod(I_rest)`` matrix.

    Columns enumerate the remaining modes in cyclic order starting at
    ``mode + 1``, first listed mode varying fastest.
    """
    tensor = np.asarray(tensor)
    _check_mode(tensor.ndim, mode)
    perm = _cyclic_axes(tensor.ndim, mode)
    return tensor.transpose(perm).reshape(tensor.shape[mode - 1], -1, order="F")


def fold(matrix, mode, dims):
    """Inverse of :func:`unfold`: rebuild the tensor of shape ``dims``."""
    matrix = np.asarray(matrix)
    dims = tuple(int(d) for d in dims)
    _check_mode(len(dims), mode)
    rest = math.prod(dims) // dims[mode - 1]
    if matrix.shape != (dims[mode - 1], rest):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match mode-{mode} "
            f"unfolding of dims {dims}"
        )
    ndim = len(dims)
    perm = _cyclic_axes(ndim, mode)
    inv = tuple((i - mode + 1) % ndim for i in range(ndim))
    cyc_dims = tuple(dims[p] for p in perm)
    return matrix.reshape(cyc_dims, order="F").transpose(inv)


def mode_n_product(tensor, matrix, mode):
    """Mode-``mode`` product ``tensor x_mode matrix``.

    ``matrix`` has shape ``(J, I_mode)``; the result replaces dimension
    ``I_mode`` with ``J``.  Equivalent to folding ``matrix @ unfold(tensor,
    mode)`` back to a tensor.
    """
    tensor = np.asarray(tensor)
    matrix = np.asarray(matrix)
    _check_mode(tensor.ndim, mode)
    if matrix.ndim != 2 or matrix.shape[1] != tensor.shape[mode - 1]:
        raise ValueError(
            f"matrix of shape {matrix.shape} cannot multiply mode {mode} "
            f"of tensor with dims {tensor.shape}"
        )
    k = mode - 1
    moved = tensor if k == 0 else np.moveaxis(tensor, k, 0)
    flat = moved.reshape(tensor.shape[k], -1)
    out = (matrix @ flat).reshape((matrix.shape[0],) + moved.shape[1:])
    return out if k == 0 else np.moveaxis(out, 0, k)


def tensor_norms(tensor):
    """Return ``(frobenius, l1)`` norms of a tensor."""
    flat = np.abs(np.asarray(tensor, dtype=float).ravel())
    return float(np.sqrt(np.dot(flat, flat))), float(flat.sum())


def project_support(tensor, observed, complement=False):
    """Keep entries on the support (or, with ``complement``, off it); zero the rest."""
    tensor = np.asarray(tensor)
    observed = np.asarray(observed, dtype=bool)
    if observed.shape != tensor.shape:
        raise ValueError(
            f"mask shape {observed.shape} does not match tensor shape {tensor.shape}"
        )
    keep = ~observed if complement else observed
    return np.where(keep, tensor, 0.0)


def soft_threshold(tensor, phi):
    """Elementwise shrinkage toward zero by ``phi`` (the l1 proximal operator)."""
    if phi < 0:
        raise ValueError(f"threshold must be nonnegative, got {phi}")
    tensor = np.asarray(tensor)
    out = np.abs(tensor)
    out -= phi
    np.maximum(out, 0.0, out=out)
    return np.copysign(out, tensor)


def save_tensor(path, tensor):
    """Write a tensor in the text format (17 significant digits, exact round trip)."""
    tensor = np.asarray(tensor, dtype=float)
    values = tensor.ravel(order="F")
    with open(path, "w") as fh:
        fh.write("dims: " + " ".join(str(d) for d in tensor.shape) + "\n")
        for v in values:
            fh.write(f"{v:.17g}\n")


def _read_header(fh, path):
    header = fh.readline()
    if not header.startswith("dims:"):
        raise ValueError(f"{path}: expected header starting with 'dims:', got {header!r}")
    try:
        dims = tuple(int(t) for t in header[len("dims:"):].split())
    except ValueError as exc:
        raise ValueError(f"{path}: malformed dims header {header!r}") from exc
    if not dims or any(d <= 0 for d in dims):
        raise ValueError(f"{path}: dims must be positive integers, got {dims}")
    return dims


def load_tensor(path):
    """Read a tensor written by :func:`save_tensor`."""
    with open(path) as fh:
        dims = _read_header(fh, path)
        try:
            values = np.array(fh.read().split(), dtype=float)
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric payload") from exc
    if values.size != math.prod(dims):
        raise ValueError(
            f"{path}: header dims {dims} require {math.prod(dims)} values, "
            f"found {values.size}"
        )
    if not np.isfinite(values).all():
        raise ValueError(f"{path}: payload contains non-finite values")
    return values.reshape(dims, order="F")


def save_mask(path, mask):
    """Write a boolean mask in the tensor text format with 0/1 values."""
    mask = np.asarray(mask, dtype=bool)
    with open(path, "w") as fh:
        fh.write("dims: " + " ".join(str(d) for d in mask.shape) + "\n")
        for v in mask.ravel(order="F"):
            fh.write("1\n" if v else "0\n")


def load_mask(path):
    """Read a 0/1 mask written by :func:`save_mask` as a boolean array."""
    arr = load_tensor(path)
    if not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError(f"{path}: mask values must be 0 or 1")
    return arr.astype(bool)
