"""Dense linear algebra over small multipartite Hilbert spaces.

Matrices are plain ``numpy`` complex arrays.  A :class:`Layout` names the
tensor factors so that partial traces can address subsystems by label.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SUPPORT_CUTOFF = 1e-12
NEGATIVITY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
MAX_TOTAL_DIM = 64


class InputError(ValueError):
    """Raised for malformed arguments (bad labels, dimensions, parameters)."""



@dataclass(frozen=True)
class Layout:
    """Ordered tensor factors ``((label, dim), ...)``."""

    parts: tuple[tuple[str, int], ...]

    def __post_init__(self):
        parts = tuple((str(lbl), int(d)) for lbl, d in self.parts)
        object.__setattr__(self, "parts", parts)
        labels = [lbl for lbl, _ in parts]
        if len(set(labels)) != len(labels):
            raise InputError(f"duplicate labels in layout {labels}")
        for lbl, d in parts:
            if d < 1:
                raise InputError(f"factor {lbl!r} has dimension {d}")

    @classmethod
    def of(cls, *parts: tuple[str, int]) -> "Layout":
        return cls(tuple(parts))

    @classmethod
    def from_dims(cls, dims: Sequence[int], labels: str | Sequence[str] = "ABCDEFGH") -> "Layout":
        return cls(tuple(zip(labels, dims)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.parts)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.parts)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=int))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown label {label!r}; layout has {self.labels}") from None

    def group(self, labels) -> tuple[str, ...]:
        """Normalize a label or label collection to a tuple in layout order."""
        if isinstance(labels, str):
            labels = (labels,) if labels in self.labels else tuple(_split_group(labels))
        labels = tuple(labels)
        for lbl in labels:
            self.index(lbl)
        if len(set(labels)) != len(labels):
            raise InputError(f"repeated label in group {labels}")
        return tuple(lbl for lbl in self.labels if lbl in labels)

    def dim_of(self, labels) -> int:
        group = self.group(labels)
        return int(np.prod([self.dims[self.index(lbl)] for lbl in group], dtype=int))

    def restrict(self, labels) -> "Layout":
        group = set(self.group(labels))
        return Layout(tuple(p for p in self.parts if p[0] in group))

    def complement(self, labels) -> tuple[str, ...]:
        group = set(self.group(labels))
        return tuple(lbl for lbl in self.labels if lbl not in group)

    def to_json(self) -> list[dict]:
        return [{"label": lbl, "dim": d} for lbl, d in self.parts]

    @classmethod
    def from_json(cls, data: list[dict]) -> "Layout":
        return cls(tuple((p["label"], p["dim"]) for p in data))


def _split_group(text: str) -> list[str]:
    # "A,B" or "B1,E1"; a bare multi-letter string such as "BC" is split per char
    if "," in text:
        return [t.strip() for t in text.split(",") if t.strip()]
    return list(text)


def tensor_product(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product, first factor most significant."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m))
    return out


def partial_trace(m: np.ndarray, layout: Layout, keep) -> np.ndarray:
    """Reduce ``m`` onto the factors ``keep`` (result is in layout order).

    The traced indices are contracted with a single ``einsum`` so that
    non-contiguous groups need no explicit permutation.
    """
    keep = layout.group(keep)
    if not keep:
        raise InputError("keep must name at least one subsystem")
    m = np.asarray(m)
    n = layout.total_dim
    if m.shape != (n, n):
        raise InputError(f"matrix shape {m.shape} does not match layout dimension {n}")
    k = len(layout.parts)
    if 2 * k > len(string.ascii_letters):
        raise InputError("too many subsystems")
    rows = list(string.ascii_letters[:k])
    cols = list(string.ascii_letters[k:2 * k])
    for i, lbl in enumerate(layout.labels):
        if lbl not in keep:
            cols[i] = rows[i]
    out = "".join(r for r, lbl in zip(rows, layout.labels) if lbl in keep)
    out += "".join(c for c, lbl in zip(cols, layout.labels) if lbl in keep)
    t = m.reshape(layout.dims + layout.dims)
    d = layout.dim_of(keep)
    return np.einsum("".join(rows) + "".join(cols) + "->" + out, t).reshape(d, d)


def reorder(m: np.ndarray, layout: Layout, order: Sequence[str]) -> np.ndarray:
    """Permute tensor factors of ``m`` into ``order`` (a full permutation of labels)."""
    perm = [layout.index(lbl) for lbl in order]
    if sorted(perm) != list(range(len(layout.parts))):
        raise InputError(f"{order} is not a permutation of {layout.labels}")
    k = len(perm)
    t = np.asarray(m).reshape(layout.dims + layout.dims)
    t = t.transpose(perm + [p + k for p in perm])
    return t.reshape(m.shape)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and float(np.max(np.abs(m - m.conj().T), initial=0.0)) <= tol


def hermitian_eigen(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvector columns of a Hermitian matrix."""
    m = np.asarray(m)
    if m.ndim != 2 or not is_hermitian(m, tol):
        raise InputError("matrix is not Hermitian within tolerance")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def _psd_spectrum(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = hermitian_eigen(m)
    if w.size and w[-1] < -NEGATIVITY_TOL:
        raise InputError(f"matrix has negative eigenvalue {w[-1]:.3e}")
    return np.where(w > SUPPORT_CUTOFF, w, 0.0), v


def operator_function(m: np.ndarray, f: str) -> np.ndarray:
    """Apply ``f`` in {"log2", "sqrt", "pinv"} to the support of a PSD matrix.

    Eigenvalues at or below the support cutoff map to zero for every ``f``.
    """
    w, v = _psd_spectrum(m)
    on = w > SUPPORT_CUTOFF
    fw = np.zeros_like(w)
    if f == "log2":
        fw[on] = np.log2(w[on])
    elif f == "sqrt":
        fw[on] = np.sqrt(w[on])
    elif f == "pinv":
        fw[on] = 1.0 / w[on]
    elif f == "pinv_sqrt":
        fw[on] = 1.0 / np.sqrt(w[on])
    else:
        raise InputError(f"unknown operator function {f!r}")
    out = (v * fw) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def support_projector(m: np.ndarray) -> np.ndarray:
    w, v = _psd_spectrum(m)
    vs = v[:, w > SUPPORT_CUTOFF]
    return vs @ vs.conj().T


def purify(rho: np.ndarray) -> tuple[np.ndarray, int]:
    """Return ``(psi, r)``: a unit vector on system ⊗ ancilla with ancilla dim ``r = rank``.

    Tracing out the ancilla (the trailing factor) gives back ``rho``.
    """
    w, v = _psd_spectrum(rho)
    on = w > SUPPORT_CUTOFF
    w, v = w[on], v[:, on]
    # psi = sum_j sqrt(w_j) |v_j> ⊗ |j>
    psi = (v * np.sqrt(w)).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return psi, int(on.sum())


def trace_norm_hermitian(m: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch {a.shape} vs {b.shape}")
    return 0.5 * trace_norm_hermitian(a - b)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def ket(*bits: int, dims: Sequence[int] | None = None) -> np.ndarray:
    """Computational basis vector ``|b1 b2 ...>``."""
    dims = dims or [2] * len(bits)
    out = np.ones(1, dtype=complex)
    for b, d in zip(bits, dims):
        e = np.zeros(d, dtype=complex)
        e[b] = 1.0
        out = np.kron(out, e)
    return out


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
