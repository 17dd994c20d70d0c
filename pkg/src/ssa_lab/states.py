"""Density matrices and constructors for named, random and structured states."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .linalg import (
    MAX_TOTAL_DIM,
    InputError,
    Layout,
    is_hermitian,
    ket,
    partial_trace,
    proj,
    tensor_product,
)

STATE_TOL = 1e-10
FILE_TOL = 1e-8


def validate_density(m: np.ndarray, tol: float = STATE_TOL) -> None:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"density matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("density matrix has non-finite entries")
    if not is_hermitian(m, tol):
        raise InputError("density matrix is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol:
        raise InputError(f"density matrix trace is {tr!r}, expected 1")
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if w[0] < -tol:
        raise InputError(f"density matrix has negative eigenvalue {w[0]:.3e}")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated state together with the layout of its tensor factors."""

    matrix: np.ndarray
    layout: Layout
    tol: float = field(default=STATE_TOL, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if not isinstance(self.layout, Layout):
            object.__setattr__(self, "layout", Layout(tuple(self.layout)))
        if m.shape != (self.layout.total_dim, self.layout.total_dim):
            raise InputError(
                f"matrix shape {m.shape} does not match layout {self.layout.parts}"
            )
        validate_density(m, self.tol)
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    def reduce(self, keep) -> "DensityMatrix":
        keep = self.layout.group(keep)
        if keep == self.layout.labels:
            return self
        return DensityMatrix(partial_trace(self.matrix, self.layout, keep), self.layout.restrict(keep))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return self.purity() >= 1.0 - tol

    def rank(self, cutoff: float = 1e-10) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > cutoff))

    def relabel(self, labels: Sequence[str]) -> "DensityMatrix":
        return DensityMatrix(self.matrix, Layout(tuple(zip(labels, self.layout.dims))))

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(json.dumps(self.layout.to_json()).encode())
        h.update(np.round(self.matrix, 12).astype(complex).tobytes())
        return h.hexdigest()[:16]


def from_vector(psi: np.ndarray, layout: Layout) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(proj(psi), layout)


# --- named states -----------------------------------------------------------

def bell() -> DensityMatrix:
    return from_vector(ket(0, 0) + ket(1, 1), Layout.of(("A", 2), ("B", 2)))


def singlet() -> DensityMatrix:
    return from_vector(ket(0, 1) - ket(1, 0), Layout.of(("A", 2), ("B", 2)))


def ghz() -> DensityMatrix:
    return from_vector(ket(0, 0, 0) + ket(1, 1, 1), Layout.from_dims((2, 2, 2)))


def w_state() -> DensityMatrix:
    return from_vector(ket(0, 0, 1) + ket(0, 1, 0) + ket(1, 0, 0), Layout.from_dims((2, 2, 2)))


def werner(p: float) -> DensityMatrix:
    """``p |Ψ-><Ψ-| + (1 - p) I/4``."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"Werner parameter must be in [0, 1], got {p}")
    return DensityMatrix(p * singlet().matrix + (1 - p) * np.eye(4) / 4, Layout.of(("A", 2), ("B", 2)))


def cq_state(weights: Sequence[float], rho_a: Sequence[np.ndarray], psi_b: Sequence[np.ndarray]) -> DensityMatrix:
    """``sum_j p_j rho_j^A ⊗ |psi_j><psi_j|^B`` with orthonormal ``psi_j``."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(rho_a) or len(weights) != len(psi_b):
        raise InputError("cq spec lists must have equal length")
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise InputError("cq weights must be a probability vector")
    vecs = np.array([np.asarray(v, dtype=complex).reshape(-1) for v in psi_b])
    gram = vecs.conj() @ vecs.T
    if not np.allclose(gram, np.eye(len(vecs)), atol=1e-10):
        raise InputError("cq vectors on B must be orthonormal")
    da, db = np.asarray(rho_a[0]).shape[0], vecs.shape[1]
    for r in rho_a:
        validate_density(r)
    m = sum(p * np.kron(r, proj(v)) for p, r, v in zip(weights, rho_a, vecs))
    return DensityMatrix(m, Layout.of(("A", da), ("B", db)))


def product_state(*factors: np.ndarray, labels: Sequence[str] | None = None) -> DensityMatrix:
    for f in factors:
        validate_density(f)
    dims = [np.asarray(f).shape[0] for f in factors]
    layout = Layout.from_dims(dims) if labels is None else Layout(tuple(zip(labels, dims)))
    return DensityMatrix(tensor_product(*factors), layout)


_NAMED = {"bell": bell, "ghz": ghz, "w": w_state, "singlet": singlet}


def make_named_state(name: str, **params) -> DensityMatrix:
    """Build a state from a tag such as ``"bell"``, ``"werner:0.5"`` or ``"werner(0.5)"``.

    ``cq`` and ``product`` take their specification as keyword arguments
    (``weights``/``rho_a``/``psi_b`` and ``factors`` respectively).
    """
    m = re.fullmatch(r"\s*([a-zA-Z_]+)\s*(?:[:(]\s*([^)]*?)\s*\)?)?\s*", name)
    if not m:
        raise InputError(f"cannot parse state name {name!r}")
    tag, arg = m.group(1).lower(), m.group(2)
    if tag in _NAMED:
        return _NAMED[tag]()
    if tag == "werner":
        p = float(arg) if arg else float(params.get("p", 1.0))
        return werner(p)
    if tag == "cq":
        if not params:
            return cq_state([0.5, 0.5], [proj(ket(0)), np.eye(2) / 2], [ket(0), ket(1)])
        return cq_state(params["weights"], params["rho_a"], params["psi_b"])
    if tag == "product":
        factors = params.get("factors") or [proj(ket(0)), proj(ket(0))]
        return product_state(*factors, labels=params.get("labels"))
    raise InputError(f"unknown state {name!r}")


# --- random states ----------------------------------------------------------

def _as_layout(layout_or_dim) -> Layout:
    if isinstance(layout_or_dim, Layout):
        return layout_or_dim
    if isinstance(layout_or_dim, (int, np.integer)):
        d = int(layout_or_dim)
        n = int(round(np.log2(d))) if d > 0 else 0
        if d >= 2 and 2 ** n == d and n > 1:
            return Layout.from_dims([2] * n)
        return Layout.of(("A", d))
    return Layout.from_dims(tuple(layout_or_dim))


def random_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_pure_state(layout, seed) -> DensityMatrix:
    """Haar-random pure state; ``layout`` may be a :class:`Layout`, a dim list or a total dim."""
    layout = _as_layout(layout)
    if layout.total_dim < 2:
        raise InputError("dimension must be at least 2")
    if layout.total_dim > MAX_TOTAL_DIM:
        raise InputError(f"total dimension {layout.total_dim} exceeds {MAX_TOTAL_DIM}")
    rng = np.random.default_rng(seed)
    return from_vector(random_vector(layout.total_dim, rng), layout)


def random_mixed_state(layout, rank: int, seed) -> DensityMatrix:
    """Induced-measure state: trace of a Haar pure state on system ⊗ C^rank."""
    layout = _as_layout(layout)
    d = layout.total_dim
    if not 1 <= rank <= d:
        raise InputError(f"rank must be in [1, {d}], got {rank}")
    if d > MAX_TOTAL_DIM:
        raise InputError(f"total dimension {d} exceeds {MAX_TOTAL_DIM}")
    rng = np.random.default_rng(seed)
    g = random_vector(d * rank, rng).reshape(d, rank)
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, layout)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_cq_state(dims: tuple[int, int], terms: int, seed) -> DensityMatrix:
    """Random zero-discord state ``sum_j p_j rho_j ⊗ |psi_j><psi_j|`` (B basis Haar-random)."""
    rng = np.random.default_rng(seed)
    da, db = dims
    terms = min(terms, db)
    p = rng.dirichlet(np.ones(terms))
    basis = random_unitary(db, rng)
    rhos = [random_density(da, rng) for _ in range(terms)]
    return cq_state(p, rhos, [basis[:, j] for j in range(terms)])


# --- structured states ------------------------------------------------------

@dataclass
class MarkovBlock:
    """One direct-sum block ``q * rho_{A bL} ⊗ rho_{bR C}``."""

    q: float
    left: np.ndarray
    right: np.ndarray
    left_dim: int
    right_dim: int


@dataclass
class MarkovStateSpec:
    blocks: list[MarkovBlock]
    a_dim: int
    c_dim: int

    @property
    def b_dim(self) -> int:
        return sum(b.left_dim * b.right_dim for b in self.blocks)


def make_markov_state(spec: MarkovStateSpec) -> DensityMatrix:
    """Assemble ``⊕_j q_j rho_{A bL_j} ⊗ rho_{bR_j C}``.

    Block ``j`` occupies the consecutive range of B indices following the
    blocks before it, with ``bL`` the more significant factor of the range.
    """
    qs = np.array([b.q for b in spec.blocks], dtype=float)
    if not spec.blocks or np.any(qs < 0) or abs(qs.sum() - 1) > 1e-12:
        raise InputError("block weights must be a probability vector")
    da, dc, db = spec.a_dim, spec.c_dim, spec.b_dim
    if da * db * dc > MAX_TOTAL_DIM:
        raise InputError(f"total dimension {da * db * dc} exceeds {MAX_TOTAL_DIM}")
    out = np.zeros((da * db * dc,) * 2, dtype=complex)
    offset = 0
    for blk in spec.blocks:
        dl, dr = blk.left_dim, blk.right_dim
        left, right = np.asarray(blk.left, dtype=complex), np.asarray(blk.right, dtype=complex)
        if left.shape != (da * dl,) * 2 or right.shape != (dr * dc,) * 2:
            raise InputError("block state shapes do not match the declared dimensions")
        validate_density(left)
        validate_density(right)
        embed = np.zeros((db, dl * dr))
        embed[offset:offset + dl * dr, :] = np.eye(dl * dr)
        iso = np.kron(np.kron(np.eye(da), embed), np.eye(dc))
        out += blk.q * iso @ np.kron(left, right) @ iso.T
        offset += dl * dr
    return DensityMatrix(out, Layout.of(("A", da), ("B", db), ("C", dc)))


@dataclass
class BssaSaturatingSpec:
    """Measured-form state ``sum_j q_j sum_i p_{j|i} rho_A^i ⊗ |psi_j><psi_j|_{bL_i} ⊗ omega_{bR_i C}``.

    Sector ``i`` carries ``rho_a[i]`` and ``omega[i]`` and owns the B
    subspace ``H_{bL_i} ⊗ H_{bR_i}``; every ``psi[j]`` lives in a ``bL``
    factor of common dimension ``len(psi[j])``.  ``p[j][i]`` is normalized
    over ``i`` for each ``j``.
    """

    q: Sequence[float]
    p: Sequence[Sequence[float]]
    rho_a: Sequence[np.ndarray]
    psi: Sequence[np.ndarray]
    omega: Sequence[np.ndarray]
    c_dim: int


def bssa_markov_spec(spec: BssaSaturatingSpec) -> MarkovStateSpec:
    q = np.asarray(spec.q, dtype=float)
    p = np.asarray(spec.p, dtype=float)
    n_j, n_i = len(spec.psi), len(spec.rho_a)
    if p.shape != (n_j, n_i) or len(q) != n_j or len(spec.omega) != n_i:
        raise InputError("b-SSA spec lists have inconsistent lengths")
    if np.any(q < 0) or abs(q.sum() - 1) > 1e-12:
        raise InputError("q must be a probability vector")
    if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1) > 1e-12):
        raise InputError("each row p[j] must be a probability vector over sectors")
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in spec.psi]
    dl = len(vecs[0])
    for v in vecs:
        if len(v) != dl or abs(np.linalg.norm(v) - 1) > 1e-10:
            raise InputError("psi vectors must be unit vectors of a common dimension")
    da = np.asarray(spec.rho_a[0]).shape[0]
    blocks = []
    for i in range(n_i):
        w = float(q @ p[:, i])
        tau = sum(q[j] * p[j, i] * proj(vecs[j]) for j in range(n_j))
        tau = tau / w if w > 0 else proj(vecs[0])
        omega = np.asarray(spec.omega[i], dtype=complex)
        dr, rem = divmod(omega.shape[0], spec.c_dim)
        if rem:
            raise InputError("omega dimension is not a multiple of dim C")
        blocks.append(MarkovBlock(w, np.kron(spec.rho_a[i], tau), omega, dl, dr))
    return MarkovStateSpec(blocks, da, spec.c_dim)


def make_bssa_saturating_state(spec: BssaSaturatingSpec) -> DensityMatrix:
    return make_markov_state(bssa_markov_spec(spec))


def random_markov_spec(rng: np.random.Generator, a_dim=2, c_dim=2, shapes=((1, 1), (1, 1))) -> MarkovStateSpec:
    q = rng.dirichlet(np.ones(len(shapes)))
    blocks = [
        MarkovBlock(q[j], random_density(a_dim * dl, rng), random_density(dr * c_dim, rng), dl, dr)
        for j, (dl, dr) in enumerate(shapes)
    ]
    return MarkovStateSpec(blocks, a_dim, c_dim)


def random_bssa_spec(rng: np.random.Generator, n_sectors=2, n_vectors=2, bl_dim=1, br_dim=1,
                     a_dim=2, c_dim=2, orthogonal_a=False) -> BssaSaturatingSpec:
    q = rng.dirichlet(np.ones(n_vectors))
    p = rng.dirichlet(np.ones(n_sectors), size=n_vectors)
    if orthogonal_a:
        basis = random_unitary(a_dim, rng)
        rho_a = [proj(basis[:, i % a_dim]) for i in range(n_sectors)]
    else:
        rho_a = [random_density(a_dim, rng) for _ in range(n_sectors)]
    psi = [random_vector(bl_dim, rng) for _ in range(n_vectors)]
    omega = [random_density(br_dim * c_dim, rng) for _ in range(n_sectors)]
    return BssaSaturatingSpec(q, p, rho_a, psi, omega, c_dim)


# --- state file format ------------------------------------------------------

def state_to_json(rho: DensityMatrix, meta: dict | None = None) -> dict:
    m = rho.matrix
    return {
        "layout": rho.layout.to_json(),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
        "meta": meta or {},
    }


def state_from_json(doc: dict) -> DensityMatrix:
    try:
        layout = Layout.from_json(doc["layout"])
        m = np.array([[complex(re_, im) for re_, im in row] for row in doc["matrix"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed state document: {exc}") from exc
    return DensityMatrix(m, layout, tol=FILE_TOL)


def save_state(rho: DensityMatrix, path, meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(state_to_json(rho, meta), indent=1))


def load_state(path) -> DensityMatrix:
    return state_from_json(json.loads(Path(path).read_text()))
