"""Kraus channels, Stinespring dilations and the two-stage processing pipeline."""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
import numpy as np

from . import measures as ms
from .linalg import PAULI_X, PAULI_Y, PAULI_Z, InputError, Layout, reorder
from .optimize import OptimizerConfig
from .states import DensityMatrix

KRAUS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus: tuple[np.ndarray, ...]
    name: str = ""

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise InputError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise InputError("Kraus operators must share one shape")
        gram = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(gram - np.eye(shape[1]))) > KRAUS_TOL:
            raise InputError("Kraus operators violate completeness")
        object.__setattr__(self, "kraus", ops)

    @property
    def input_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def env_dim(self) -> int:
        return len(self.kraus)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)


def _pruned(ops, name):
    return KrausChannel(tuple(k for k in ops if np.linalg.norm(k) > 1e-15), name)


def _unit_param(x: float, what: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise InputError(f"{what} parameter must be in [0, 1], got {x}")
    return x


def amplitude_damping(gamma: float) -> KrausChannel:
    g = _unit_param(gamma, "amplitude damping")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=complex)
    return _pruned([k0, k1], f"amp:{gamma}")


def phase_damping(lam: float) -> KrausChannel:
    lam = _unit_param(lam, "phase damping")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - lam)]], dtype=complex)
    k1 = np.array([[0, 0], [0, np.sqrt(lam)]], dtype=complex)
    return _pruned([k0, k1], f"phase:{lam}")


def depolarizing(p: float) -> KrausChannel:
    """``rho -> (1 - p) rho + p I/2``."""
    p = _unit_param(p, "depolarizing")
    ops = [np.sqrt(1 - 3 * p / 4) * np.eye(2)] + [np.sqrt(p / 4) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    return _pruned(ops, f"depol:{p}")


def unitary_channel(u: np.ndarray) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or not np.allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-10):
        raise InputError("matrix is not unitary")
    return KrausChannel((u,), "unitary")


def make_named_channel(spec: str) -> KrausChannel:
    """Parse ``amp:<g>``, ``phase:<l>``, ``depol:<p>`` or ``unitary:<file>``.

    The unitary file is JSON: a list of rows of ``[re, im]`` pairs.
    """
    m = re.fullmatch(r"\s*(\w+)\s*[:(]\s*([^)]*?)\s*\)?\s*", spec)
    if not m:
        raise InputError(f"cannot parse channel spec {spec!r}")
    tag, arg = m.group(1).lower(), m.group(2)
    try:
        if tag in ("amp", "amplitudedamping", "amplitude_damping"):
            return amplitude_damping(float(arg))
        if tag in ("phase", "phasedamping", "phase_damping"):
            return phase_damping(float(arg))
        if tag in ("depol", "depolarizing"):
            return depolarizing(float(arg))
    except ValueError as exc:
        raise InputError(f"bad channel parameter in {spec!r}") from exc
    if tag == "unitary":
        rows = json.loads(Path(arg).read_text())
        return unitary_channel(np.array([[complex(a, b) for a, b in row] for row in rows]))
    raise InputError(f"unknown channel {spec!r}")


def stinespring(ch: KrausChannel) -> np.ndarray:
    """Isometry ``V = sum_k K_k ⊗ |k>_E`` (environment is the trailing factor)."""
    dout, din, de = ch.output_dim, ch.input_dim, ch.env_dim
    v = np.zeros((dout * de, din), dtype=complex)
    for k, op in enumerate(ch.kraus):
        v[k::de, :] = op
    return v


def dilate(rho: DensityMatrix, target: str, ch: KrausChannel, out_label: str, env_label: str) -> DensityMatrix:
    """Apply the Stinespring isometry of ``ch`` to factor ``target``.

    The output and environment factors replace ``target`` in place, in that order.
    """
    lay = rho.layout
    i = lay.index(target)
    if ch.input_dim != lay.dims[i]:
        raise InputError(f"channel expects input dim {ch.input_dim}, factor {target} has {lay.dims[i]}")
    pre = int(np.prod(lay.dims[:i], dtype=int))
    post = int(np.prod(lay.dims[i + 1:], dtype=int))
    op = np.kron(np.kron(np.eye(pre), stinespring(ch)), np.eye(post))
    parts = lay.parts[:i] + ((out_label, ch.output_dim), (env_label, ch.env_dim)) + lay.parts[i + 1:]
    return DensityMatrix(op @ rho.matrix @ op.conj().T, Layout(parts))


@dataclass
class StagePipeline:
    initial: DensityMatrix
    stage1: KrausChannel
    stage2: KrausChannel
    state1: DensityMatrix  # A, B1, E1
    state2: DensityMatrix  # A, B2, E1, E2


def run_two_stage(initial_ab: DensityMatrix, stage1: KrausChannel, stage2: KrausChannel) -> StagePipeline:
    """Evolve ``B -> B1 -> B2`` through fresh pure environments ``E1`` and ``E2``."""
    if len(initial_ab.labels) != 2:
        raise InputError("initial state must be bipartite (A, B)")
    db = initial_ab.layout.dims[1]
    for ch in (stage1, stage2):
        if ch.input_dim != db or ch.output_dim != db:
            raise InputError(f"channel {ch.name or ''} does not act on B's dimension {db}")
    s0 = initial_ab.relabel(("A", "B"))
    s1 = dilate(s0, "B", stage1, "B1", "E1")
    s2 = dilate(s1, "B1", stage2, "B2", "E2")
    order = ("A", "B2", "E1", "E2")
    s2 = DensityMatrix(reorder(s2.matrix, s2.layout, order),
                       Layout(tuple((lbl, s2.layout.dims[s2.layout.index(lbl)]) for lbl in order)))
    return StagePipeline(initial_ab, stage1, stage2, s1, s2)


@dataclass
class DataProcessingReport:
    stage1: str
    stage2: str
    coherent_info_1: float
    coherent_info_2: float
    coherent_info_drop: float
    cmi: float
    identity_residual: float
    qdp_margin: float
    delta_via_b: float
    delta_via_e: float
    cross_residual: float
    bounded_margin: float
    lii_e1e2: float
    lii_e1: float
    lii_margin: float
    route: str
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _lii(state, groups, direct_value) -> ms.MeasureResult:
    # reuse the B-side value unless the independent Koashi-Winter route is available
    if state.layout.dim_of(groups[2]) == 2:
        return ms.lii_net_flow(state, groups, route="oracle")
    return ms.MeasureResult(direct_value, extra={"route": "b_side"})


def data_processing_report(pipe: StagePipeline, config: OptimizerConfig | None = None,
                           route: str = "oracle") -> DataProcessingReport:
    """Coherent-information bookkeeping for a two-stage pipeline.

    ``route="oracle"`` derives every environment-side term from the pure
    global state via Koashi-Winter; ``"direct"`` optimizes them (qubit
    environments only).
    """
    config = config or OptimizerConfig()
    if not pipe.initial.is_pure(ms.PURE_TOL):
        raise InputError("data processing report needs a pure initial state")
    if pipe.initial.layout.dims != (2, 2):
        raise InputError("data processing report needs qubit A and B")
    s1, s2 = pipe.state1, pipe.state2
    ic1 = ms.coherent_information(s1, "A", "B1")
    ic2 = ms.coherent_information(s2, "A", "B2")
    cmi = ms.conditional_mutual_information(s2, "A", "E1", "E2")
    drop = ic1 - ic2

    e_ab1 = ms.eof_two_qubit(s1.reduce(("A", "B1")))
    e_ab2 = ms.eof_two_qubit(s2.reduce(("A", "B2")))
    d_ab1 = ms._discord_direct(s1, ("A",), ("B1",), config)
    d_ab2 = ms._discord_direct(s2, ("A",), ("B2",), config)
    delta_b = (e_ab2 - d_ab2) - (e_ab1 - d_ab1)

    if route == "oracle":
        e_ae1 = d_ab1 + ms.conditional_entropy(s1, "A", "B1")
        d_ae1 = e_ab1 - ms.conditional_entropy(s1, "A", "E1")
        e_ae12 = d_ab2 + ms.conditional_entropy(s2, "A", "B2")
        d_ae12 = e_ab2 - ms.conditional_entropy(s2, "A", ("E1", "E2"))
    elif route == "direct":
        if s2.layout.dim_of(("E1", "E2")) > ms.MAX_MEASURED_DIM:
            raise InputError("direct route needs dim(E1 E2) <= 4")
        e_ae1 = ms.entanglement_of_formation(s1, "A", "E1", config)
        d_ae1 = ms._discord_direct(s1, ("A",), ("E1",), config)
        e_ae12 = ms.entanglement_of_formation(s2, "A", ("E1", "E2"), config)
        d_ae12 = ms._discord_direct(s2, ("A",), ("E1", "E2"), config)
    else:
        raise InputError(f"unknown route {route!r}")
    delta_e = e_ae1 - e_ae12 + d_ae12 - d_ae1

    lii1 = _lii(s1, ("B1", "A", "E1"), e_ab1 - d_ab1)
    lii2 = _lii(s2, ("B2", "A", ("E1", "E2")), e_ab2 - d_ab2)
    terms = {
        "E_AB1": e_ab1, "E_AB2": e_ab2, "delta_AB1": d_ab1, "delta_AB2": d_ab2,
        "E_AE1": e_ae1, "delta_AE1": d_ae1, "E_A_E1E2": e_ae12, "delta_A_E1E2": d_ae12,
        "lii_e1e2_route": lii2.extra["route"], "lii_e1_route": lii1.extra["route"],
    }
    return DataProcessingReport(
        stage1=pipe.stage1.name, stage2=pipe.stage2.name,
        coherent_info_1=ic1, coherent_info_2=ic2, coherent_info_drop=drop,
        cmi=cmi, identity_residual=abs(drop - cmi), qdp_margin=drop,
        delta_via_b=delta_b, delta_via_e=delta_e, cross_residual=abs(delta_b - delta_e),
        bounded_margin=drop - delta_b,
        lii_e1e2=lii2.value, lii_e1=lii1.value, lii_margin=drop - (lii2.value - lii1.value),
        route=route, terms=terms,
    )
