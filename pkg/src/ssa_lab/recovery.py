"""Petz recovery map, Markov-chain detection and b-SSA saturation checks."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import measures as ms
from .linalg import InputError, Layout, operator_function, partial_trace, reorder, trace_distance
from .optimize import OptimizerConfig
from .states import DensityMatrix

TRACE_LOSS_TOL = 1e-8
MARKOV_TOL = 1e-9
SATURATION_SLACK = 2e-3


@dataclass(frozen=True, eq=False)
class RecoveryMap:
    """``sigma_B -> rho_BC^{1/2} (rho_B^{-1/2} sigma_B rho_B^{-1/2} ⊗ I_C) rho_BC^{1/2}``."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    b_dim: int
    c_dim: int
    sqrt_bc: np.ndarray
    pinv_sqrt_b: np.ndarray

    def apply(self, sigma_b: np.ndarray) -> np.ndarray:
        return self.apply_extended(sigma_b, 1)

    def apply_extended(self, sigma_xb: np.ndarray, x_dim: int) -> np.ndarray:
        """``(id_X ⊗ R)(sigma_XB)`` with X the leading factor; output ordered X ⊗ B ⊗ C."""
        sigma_xb = np.asarray(sigma_xb)
        if sigma_xb.shape != (x_dim * self.b_dim,) * 2:
            raise InputError("input does not match the recovery source dimension")
        ix = np.eye(x_dim)
        left = np.kron(ix, self.pinv_sqrt_b)
        inner = np.kron(left @ sigma_xb @ left, np.eye(self.c_dim))
        outer = np.kron(ix, self.sqrt_bc)
        out = outer @ inner @ outer
        return 0.5 * (out + out.conj().T)

    def trace_loss(self, sigma_b: np.ndarray) -> float:
        tr = np.trace(sigma_b).real
        return float(abs(tr - np.trace(self.apply(sigma_b)).real) / tr) if tr else 0.0


def build_petz_map(rho_bc: DensityMatrix, source=None) -> RecoveryMap:
    """Transpose channel ``B -> BC`` of ``rho_bc``; ``source`` defaults to the first factor."""
    lay = rho_bc.layout
    source = lay.group(source if source is not None else lay.labels[0])
    c = lay.complement(source)
    m = reorder(rho_bc.matrix, lay, source + c)
    rho_b = partial_trace(rho_bc.matrix, lay, source)
    return RecoveryMap(
        source=source,
        target=source + c,
        b_dim=lay.dim_of(source),
        c_dim=lay.dim_of(c) if c else 1,
        sqrt_bc=operator_function(m, "sqrt"),
        pinv_sqrt_b=operator_function(rho_b, "pinv_sqrt"),
    )


@dataclass
class MarkovCheck:
    cmi: float
    recovery_distance: float
    is_markov: bool
    trace_loss: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def petz_reconstruction(rho: DensityMatrix, a, b, c) -> np.ndarray:
    """``(id_A ⊗ R_{B->BC})(rho_AB)`` ordered A ⊗ B ⊗ C."""
    a, b, c = (rho.layout.group(g) for g in (a, b, c))
    rmap = build_petz_map(rho.reduce(b + c), b)
    ab = reorder(partial_trace(rho.matrix, rho.layout, a + b), rho.layout.restrict(a + b), a + b)
    return rmap.apply_extended(ab, rho.layout.dim_of(a))


def check_markov(rho: DensityMatrix, partition=None) -> MarkovCheck:
    a, b, c = partition or rho.labels
    a, b, c = (rho.layout.group(g) for g in (a, b, c))
    cmi = ms.conditional_mutual_information(rho, a, b, c)
    rec = petz_reconstruction(rho, a, b, c)
    sub = rho.layout.group(a + b + c)
    target = reorder(partial_trace(rho.matrix, rho.layout, sub), rho.layout.restrict(sub), a + b + c)
    loss = abs(1.0 - np.trace(rec).real)
    return MarkovCheck(cmi, trace_distance(target, rec), bool(cmi <= MARKOV_TOL), float(loss))


@dataclass
class SaturationReport:
    j_equality: float
    eof_monogamy: float
    max_bound_saturated: bool
    cmi: float
    delta_tilde: float
    slack: float
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def check_bssa_saturation(rho: DensityMatrix, partition=None, config: OptimizerConfig | None = None,
                          slack: float = SATURATION_SLACK) -> SaturationReport:
    """Equality conditions for a saturated b-SSA: ``J_A(BC) = J_AB`` and ``E_A(BC) = E_AB``."""
    config = config or OptimizerConfig()
    a, b, c = partition or rho.labels
    a, b, c = (rho.layout.group(g) for g in (a, b, c))
    bc = rho.layout.group(b + c)
    j_abc = ms.classical_correlation(rho.reduce(a + bc), bc, config, other=a).value
    j_ab = ms.classical_correlation(rho.reduce(a + b), b, config, other=a).value
    e_abc = ms.entanglement_of_formation(rho, a, bc, config)
    e_ab = ms.entanglement_of_formation(rho, a, b, config)
    d_abc = ms.mutual_information(rho, a, bc) - j_abc
    d_ab = ms.mutual_information(rho, a, b) - j_ab
    dt = e_ab - e_abc + d_abc - d_ab
    cmi = ms.conditional_mutual_information(rho, a, b, c)
    return SaturationReport(
        j_equality=abs(j_abc - j_ab),
        eof_monogamy=abs(e_abc - e_ab),
        max_bound_saturated=abs(cmi - max(0.0, dt)) <= slack,
        cmi=cmi,
        delta_tilde=dt,
        slack=slack,
        terms={"J_A_BC": j_abc, "J_AB": j_ab, "E_A_BC": e_abc, "E_AB": e_ab,
               "delta_A_BC": d_abc, "delta_AB": d_ab},
    )
