"""Similarity kernels (linear, gaussian, polynomial): values and gradients.

All kernelized quantities in the scoring module are computed through these
functions; the implicit feature map is never materialized.
"""

from dataclasses import dataclass

import numpy as np

LINEAR = "linear"
GAUSSIAN = "gaussian"
POLYNOMIAL = "poly"


@dataclass(frozen=True)
class KernelSpec:
    """One of: linear a.b, gaussian exp(-|a-b|^2/sigma^2), poly (a.b + offset)^degree."""

    kind: str
    sigma: float | None = None
    degree: int | None = None
    offset: float | None = None

    def __post_init__(self):
        if self.kind == LINEAR:
            pass
        elif self.kind == GAUSSIAN:
            if self.sigma is None or self.sigma <= 0:
                raise ValueError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
        elif self.kind == POLYNOMIAL:
            if self.degree is None or self.degree < 1:
                raise ValueError(f"polynomial kernel needs degree >= 1, got {self.degree}")
            if self.offset is None:
                object.__setattr__(self, "offset", 0.0)
        else:
            raise ValueError(f"unknown kernel kind: {self.kind!r}")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(LINEAR)

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls(GAUSSIAN, sigma=float(sigma))

    @classmethod
    def polynomial(cls, degree: int, offset: float = 0.0) -> "KernelSpec":
        return cls(POLYNOMIAL, degree=int(degree), offset=float(offset))


def _check_dims(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"kernel arguments must be same-length vectors, got {a.shape} and {b.shape}")


def kernel_eval(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    """K(a, b); symmetric in its arguments."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    if spec.kind == LINEAR:
        return float(a @ b)
    if spec.kind == GAUSSIAN:
        diff = a - b
        return float(np.exp(-(diff @ diff) / spec.sigma**2))
    base = float(a @ b) + spec.offset
    return base**spec.degree


def kernel_grad(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """dK(a, b)/da.  The gradient w.r.t. b is kernel_grad(spec, b, a) by symmetry."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    if spec.kind == LINEAR:
        return b.copy()
    if spec.kind == GAUSSIAN:
        diff = a - b
        k = np.exp(-(diff @ diff) / spec.sigma**2)
        return (-2.0 / spec.sigma**2) * k * diff
    base = float(a @ b) + spec.offset
    return spec.degree * base ** (spec.degree - 1) * b


def kernel_eval_rows(spec: KernelSpec, rows: np.ndarray, v: np.ndarray) -> np.ndarray:
    """K(rows[i], v) for every row; vectorized counterpart of kernel_eval."""
    if spec.kind == LINEAR:
        return rows @ v
    if spec.kind == GAUSSIAN:
        sq = np.einsum("ij,ij->i", rows, rows) - 2.0 * (rows @ v) + v @ v
        return np.exp(-sq / spec.sigma**2)
    return (rows @ v + spec.offset) ** spec.degree


def kernel_self_rows(spec: KernelSpec, rows: np.ndarray) -> np.ndarray:
    """K(rows[i], rows[i]) for every row."""
    if spec.kind == LINEAR:
        return np.einsum("ij,ij->i", rows, rows)
    if spec.kind == GAUSSIAN:
        return np.ones(rows.shape[0])
    return (np.einsum("ij,ij->i", rows, rows) + spec.offset) ** spec.degree
