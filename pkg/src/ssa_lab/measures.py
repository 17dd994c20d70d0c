"""Entropic correlation measures in bits.

Discord and classical correlation are optimized over rank-1 projective
measurements on the measured party, so a reported discord is an upper
bound on the POVM value.  Ensemble entanglement of formation is a best
found decomposition, hence an upper bound on the true value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import optimize as opt
from .linalg import (
    SUPPORT_CUTOFF,
    InputError,
    Layout,
    PAULI_Y,
    operator_function,
    partial_trace,
    proj,
    reorder,
    support_projector,
)
from .optimize import OptimizerConfig
from .states import DensityMatrix

LN2 = np.log(2.0)
PURE_TOL = 1e-9
MAX_MEASURED_DIM = 4
MAX_EOF_DIM = 16
MAX_ENSEMBLE = 16


@dataclass
class ProjectiveMeasurement:
    """Rank-1 projective measurement on ``target``; ``basis`` columns are the vectors."""

    target: tuple[str, ...]
    basis: np.ndarray
    parameters: np.ndarray

    @property
    def projectors(self) -> list[np.ndarray]:
        return [proj(self.basis[:, k]) for k in range(self.basis.shape[1])]


@dataclass
class MeasureResult:
    value: float
    argument: Any = None
    converged: bool = True
    spread_over_restarts: float = 0.0
    extra: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _entropy_of_spectrum(w: np.ndarray) -> float:
    w = w[w > SUPPORT_CUTOFF]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho) -> float:
    m = _matrix(rho)
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return max(_entropy_of_spectrum(w), 0.0)


def entropy(rho: DensityMatrix, group=None) -> float:
    """Entropy of the marginal on ``group`` (whole state if omitted)."""
    if group is None:
        return von_neumann_entropy(rho)
    group = rho.layout.group(group)
    if not group:
        return 0.0
    return von_neumann_entropy(partial_trace(rho.matrix, rho.layout, group))


def relative_entropy(rho, sigma) -> float:
    """``S(rho || sigma)`` in bits; ``inf`` when supp(rho) is not inside supp(sigma)."""
    r, s = _matrix(rho), _matrix(sigma)
    if r.shape != s.shape:
        raise InputError("relative entropy needs equal dimensions")
    p_sigma = support_projector(s)
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    on = w > SUPPORT_CUTOFF
    vs = v[:, on]
    leak = np.real(np.trace(vs.conj().T @ (np.eye(len(r)) - p_sigma) @ vs * w[on]))
    if leak > 1e-10:
        return float("inf")
    val = -_entropy_of_spectrum(w) - np.real(np.trace(r @ operator_function(s, "log2")))
    return max(float(val), 0.0)


def _parts(rho: DensityMatrix, *groups) -> list[tuple[str, ...]]:
    out = [rho.layout.group(g) for g in groups]
    seen: set[str] = set()
    for g in out:
        if seen & set(g):
            raise InputError(f"groups overlap: {groups}")
        seen |= set(g)
    return out


def mutual_information(rho: DensityMatrix, part_a, part_b) -> float:
    a, b = _parts(rho, part_a, part_b)
    return entropy(rho, a) + entropy(rho, b) - entropy(rho, a + b)


def conditional_entropy(rho: DensityMatrix, part_a, part_b) -> float:
    """``S(A|B) = S(AB) - S(B)``."""
    a, b = _parts(rho, part_a, part_b)
    return entropy(rho, a + b) - entropy(rho, b)


def conditional_mutual_information(rho: DensityMatrix, a, b, c) -> float:
    """``I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)``."""
    a, b, c = _parts(rho, a, b, c)
    return entropy(rho, a + b) + entropy(rho, b + c) - entropy(rho, b) - entropy(rho, a + b + c)


def coherent_information(rho: DensityMatrix, a, b) -> float:
    """``I_c(A>B) = S(B) - S(AB)``."""
    a, b = _parts(rho, a, b)
    return entropy(rho, b) - entropy(rho, a + b)


# --- classical correlation and discord -------------------------------------

def _bipartite(rho: DensityMatrix, left, right) -> tuple[np.ndarray, int, int]:
    """Marginal on ``left ∪ right`` as a matrix ordered left ⊗ right."""
    left, right = _parts(rho, left, right)
    sub = rho.layout.group(left + right)
    m = partial_trace(rho.matrix, rho.layout, sub)
    lay = rho.layout.restrict(sub)
    m = reorder(m, lay, left + right)
    return m, rho.layout.dim_of(left), rho.layout.dim_of(right)


def _batched_entropy_terms(tau: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """For unnormalized blocks ``tau_k`` return ``sum_k p_k S(tau_k/p_k)`` and their spectra."""
    w, v = np.linalg.eigh(tau)
    w = np.clip(w, 0.0, None)
    p = w.sum(axis=1)
    wl = np.where(w > 1e-300, w * np.log2(np.where(w > 1e-300, w, 1.0)), 0.0)
    pl = np.where(p > 1e-300, p * np.log2(np.where(p > 1e-300, p, 1.0)), 0.0)
    return float(-wl.sum() + pl.sum()), w, v


def _xlogx_sum(w: np.ndarray) -> float:
    w = w[w > 1e-300]
    return float(np.dot(w, np.log2(w)))


def _conditional_sum_2x2(tau: np.ndarray) -> float:
    # closed-form spectra of 2x2 Hermitian blocks
    a, d = tau[:, 0, 0].real, tau[:, 1, 1].real
    half = 0.5 * (a + d)
    rad = np.sqrt(0.25 * (a - d) ** 2 + np.abs(tau[:, 0, 1]) ** 2)
    w = np.concatenate([half + rad, np.maximum(half - rad, 0.0)])
    return -_xlogx_sum(w) + _xlogx_sum(a + d)


def _qubit_pair_objective(r4: np.ndarray):
    """Scalar evaluation of the conditional-entropy sum for a qubit measured against a qubit."""
    r = [[[[complex(r4[x, m, y, n]) for n in range(2)] for y in range(2)] for m in range(2)] for x in range(2)]
    log2 = math.log2

    def xlx(t):
        return t * log2(t) if t > 1e-300 else 0.0

    def fun(angles):
        th, ph = float(angles[0]), float(angles[1])
        c, s = math.cos(th), math.sin(th)
        e = complex(math.cos(ph), math.sin(ph))
        total = 0.0
        for u0, u1 in ((c, e * s), (-e.conjugate() * s, c)):
            cu0, cu1 = u0.conjugate(), u1.conjugate()
            t = []
            for x, y in ((0, 0), (1, 1), (0, 1)):
                rx = r[x]
                t.append(cu0 * (rx[0][y][0] * u0 + rx[0][y][1] * u1)
                         + cu1 * (rx[1][y][0] * u0 + rx[1][y][1] * u1))
            a, d, b = t[0].real, t[1].real, t[2]
            half = 0.5 * (a + d)
            rad = math.sqrt(0.25 * (a - d) ** 2 + b.real ** 2 + b.imag ** 2)
            total += -xlx(half + rad) - xlx(max(half - rad, 0.0)) + xlx(a + d)
        return total

    return fun


def _measured_blocks(r4: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # tau_k[x, y] = <u_k| rho_{XM} |u_k> with r4 indexed (x, m, y, n)
    return np.einsum("mk,xmyn,nk->kxy", basis.conj(), r4, basis, optimize=False)


def _conditional_sum(r4, basis) -> float:
    tau = _measured_blocks(r4, basis)
    if tau.shape[1] == 2:
        return _conditional_sum_2x2(tau)
    return _batched_entropy_terms(tau)[0]


def _measurement_objective(r4: np.ndarray):
    def fun_grad(u):
        tau = _measured_blocks(r4, u)
        val, w, v = _batched_entropy_terms(tau)
        p = w.sum(axis=1)
        lw = np.log2(np.maximum(w, 1e-30))
        lp = np.log2(np.maximum(p, 1e-30))
        g = np.einsum("kij,kj,klj->kil", v, -(lw - lp[:, None]), v.conj())
        g[p < 1e-300] = 0.0
        wk = np.einsum("kyx,xmyn->kmn", g, r4)
        return val, 2.0 * np.einsum("kmn,nk->mk", wk, u)

    return fun_grad


def classical_correlation(rho: DensityMatrix, measured, config: OptimizerConfig | None = None,
                          other=None) -> MeasureResult:
    """``J(X|M) = max S(X) - sum_k p_k S(X|k)`` over projective measurements on ``measured``.

    ``other`` defaults to every label not in ``measured``.
    """
    config = config or OptimizerConfig()
    measured = rho.layout.group(measured)
    other = rho.layout.complement(measured) if other is None else rho.layout.group(other)
    d = rho.layout.dim_of(measured)
    if d not in (2, 3, 4):
        raise InputError(f"measured party dimension {d} not supported (2, 3 or 4)")
    m, dx, dm = _bipartite(rho, other, measured)
    r4 = m.reshape(dx, dm, dx, dm)
    rho_x = np.einsum("xmym->xy", r4)
    s_x = von_neumann_entropy(rho_x)

    if d == 2:
        if dx == 2:
            objective = _qubit_pair_objective(r4)
        else:
            def objective(angles):
                return _conditional_sum(r4, opt.givens_unitary(angles, d))

        starts = [np.zeros(opt.n_basis_angles(d))]
        starts += [opt.random_angles(d, opt.restart_rng(config, i, salt=d)) for i in range(1, config.restarts)]
        res = opt.multistart_simplex(objective, starts, config)
        basis, params = opt.givens_unitary(res.x, d), res.x
    else:
        # simplex search in d(d-1) angles is slow and unreliable here; use the
        # analytic gradient over the unitary group instead
        starts = [np.linalg.eigh(np.einsum("xmxn->mn", r4))[1]]
        starts += [opt.random_isometry(d, d, opt.restart_rng(config, i, salt=d)) for i in range(1, config.restarts)]
        res = opt.minimize_over_isometry(_measurement_objective(r4), d, d, config, starts)
        basis = res.x
        params = opt.unitary_generator(basis)
    meas = ProjectiveMeasurement(measured, basis, params)
    value = min(max(s_x - res.value, 0.0), s_x)
    return MeasureResult(value, meas, res.converged, res.spread, {"S_other": s_x, "other": other})


def quantum_discord(rho: DensityMatrix, measured, config: OptimizerConfig | None = None,
                    other=None) -> MeasureResult:
    """``I(X:M) - J(X|M)``, measured on ``measured``.  Slightly negative values are kept."""
    j = classical_correlation(rho, measured, config, other)
    other = j.extra["other"]
    mi = mutual_information(rho, other, measured)
    return MeasureResult(mi - j.value, j.argument, j.converged, j.spread_over_restarts,
                         {"mutual_information": mi, "classical_correlation": j.value, "other": other})


def measured_state(rho: DensityMatrix, meas: ProjectiveMeasurement, other=None) -> tuple[np.ndarray, np.ndarray]:
    """``Phi_M`` applied to the X⊗M marginal and to the M marginal (ordered X ⊗ M)."""
    other = rho.layout.complement(meas.target) if other is None else rho.layout.group(other)
    m, dx, dm = _bipartite(rho, other, meas.target)
    r4 = m.reshape(dx, dm, dx, dm)
    tau = _measured_blocks(r4, meas.basis)
    phi_xm = sum(np.kron(tau[k], proj(meas.basis[:, k])) for k in range(dm))
    phi_m = sum(np.trace(tau[k]).real * proj(meas.basis[:, k]) for k in range(dm))
    return phi_xm, phi_m


def discord_relative_entropy_form(rho: DensityMatrix, meas: ProjectiveMeasurement, other=None) -> float:
    """``S(rho_XM || rho_X ⊗ rho_M) - S(Phi(rho_XM) || rho_X ⊗ Phi(rho_M))`` for a fixed measurement."""
    other = rho.layout.complement(meas.target) if other is None else rho.layout.group(other)
    m, dx, dm = _bipartite(rho, other, meas.target)
    r4 = m.reshape(dx, dm, dx, dm)
    rho_x, rho_m = np.einsum("xmym->xy", r4), np.einsum("xmxn->mn", r4)
    phi_xm, phi_m = measured_state(rho, meas, other)
    return relative_entropy(m, np.kron(rho_x, rho_m)) - relative_entropy(phi_xm, np.kron(rho_x, phi_m))


def discord_koashi_winter(pure_global: DensityMatrix, a, measured, complement) -> float:
    """Discord of ``a`` measured on ``measured`` from the pure-state Koashi-Winter equality.

    ``delta(a|measured) = E(a, complement) - S(a|measured)`` with the EoF of
    the two-qubit pair ``(a, complement)`` in closed form.
    """
    if not pure_global.is_pure(PURE_TOL):
        raise InputError("Koashi-Winter oracle needs a pure global state")
    a, measured, complement = _parts(pure_global, a, measured, complement)
    if set(a + measured + complement) != set(pure_global.labels):
        raise InputError("groups must partition the layout")
    lay = pure_global.layout
    if lay.dim_of(a) != 2 or lay.dim_of(complement) != 2:
        raise InputError("Koashi-Winter oracle needs (a, complement) to be a qubit pair")
    e = eof_two_qubit(pure_global.reduce(a + complement), order=(a, complement))
    return e - conditional_entropy(pure_global, a, measured) + 0.0


# --- entanglement of formation ---------------------------------------------

_YY = np.kron(PAULI_Y, PAULI_Y)


def binary_entropy(x: float) -> float:
    x = min(max(float(x), 0.0), 1.0)
    return float(-sum(t * np.log2(t) for t in (x, 1 - x) if t > 0)) + 0.0


def concurrence(rho) -> float:
    m = _matrix(rho)
    if m.shape != (4, 4):
        raise InputError("concurrence needs a two-qubit state")
    s = operator_function(m, "sqrt")
    lam = np.linalg.svd(s @ _YY @ s.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof_two_qubit(rho, order=None) -> float:
    """Closed-form two-qubit entanglement of formation (Wootters)."""
    if isinstance(rho, DensityMatrix):
        if rho.layout.total_dim != 4 or (len(rho.labels) == 2 and rho.layout.dims != (2, 2)):
            raise InputError("two-qubit EoF needs a 2x2 layout")
        m = rho.matrix
        if order is not None:
            m, _, _ = _bipartite(rho, *order)
    else:
        m = np.asarray(rho)
        if m.shape != (4, 4):
            raise InputError("two-qubit EoF needs a 4x4 matrix")
    c = concurrence(m)
    return binary_entropy(0.5 * (1 + np.sqrt(max(0.0, 1 - c * c))))


def _eof_objective(vmat: np.ndarray, da: int, db: int):
    vconj = vmat.conj()

    def fun_grad(u):
        psi = (u @ vmat.T).reshape(-1, da, db)
        tau = np.einsum("kab,kcb->kac", psi, psi.conj())
        val, w, v = _batched_entropy_terms(tau)
        p = w.sum(axis=1)
        lw = np.log2(np.maximum(w, 1e-30))
        lp = np.log2(np.maximum(p, 1e-30))
        g = np.einsum("kij,kj,klj->kil", v, -(lw - lp[:, None]), v.conj())
        g[p < 1e-300] = 0.0
        phi = np.einsum("kac,kcb->kab", g, psi).reshape(len(u), -1)
        return val, 2.0 * (phi @ vconj)

    return fun_grad


def eof_ensemble_min(rho: DensityMatrix, part_a, part_b, config: OptimizerConfig | None = None,
                     ensemble_size: int | None = None) -> MeasureResult:
    """Minimum average marginal entropy over pure-state decompositions of ``rho``.

    Decompositions of size ``K`` (default ``rank**2``, capped at 16) are
    parameterized by ``K x rank`` isometries acting on the eigen-ensemble.
    """
    config = config or OptimizerConfig()
    a, b = _parts(rho, part_a, part_b)
    m, da, db = _bipartite(rho, a, b)
    if da * db > MAX_EOF_DIM:
        raise InputError(f"ensemble EoF limited to total dimension {MAX_EOF_DIM}")
    w, v = np.linalg.eigh(m)
    on = w > SUPPORT_CUTOFF
    w, v = w[on], v[:, on]
    r = len(w)
    if da == 1 or db == 1:
        return MeasureResult(0.0, None)
    if r == 1:
        psi = v[:, 0].reshape(da, db)
        return MeasureResult(von_neumann_entropy(psi @ psi.conj().T), {"weights": [1.0]})
    k = ensemble_size or min(max(r * r, r), MAX_ENSEMBLE)
    k = max(k, r)
    vmat = v * np.sqrt(w)
    fun_grad = _eof_objective(vmat, da, db)
    starts = [np.eye(k, r, dtype=complex)]
    starts += [opt.random_isometry(k, r, opt.restart_rng(config, i, salt=100 + k)) for i in range(1, config.restarts)]
    res = opt.minimize_over_isometry(fun_grad, k, r, config, starts)
    psi = res.x @ vmat.T
    weights = np.sum(np.abs(psi) ** 2, axis=1)
    return MeasureResult(max(res.value, 0.0), {"weights": weights, "vectors": psi},
                         bool(res.converged), res.spread)


def entanglement_of_formation(rho: DensityMatrix, part_a, part_b, config: OptimizerConfig | None = None) -> float:
    """Closed form for qubit pairs, ensemble minimization otherwise; pure states exact."""
    a, b = _parts(rho, part_a, part_b)
    lay = rho.layout
    if lay.dim_of(a) == 1 or lay.dim_of(b) == 1:
        return 0.0
    sub = rho.reduce(a + b)
    if sub.is_pure(1e-12):
        return entropy(sub, a)
    if lay.dim_of(a) == 2 and lay.dim_of(b) == 2:
        return eof_two_qubit(sub, order=(a, b))
    return eof_ensemble_min(sub, a, b, config).value


def _discord_direct(rho, other, measured, config) -> float:
    if rho.layout.dim_of(measured) == 1 or rho.layout.dim_of(other) == 1:
        return 0.0
    sub = rho.reduce(rho.layout.group(other) + rho.layout.group(measured))
    return quantum_discord(sub, measured, config, other=other).value


# --- correlation balances ---------------------------------------------------

def _kw_available(rho: DensityMatrix, a, complement) -> bool:
    lay = rho.layout
    return rho.is_pure(PURE_TOL) and lay.dim_of(a) == 2 and lay.dim_of(complement) == 2


def delta_terms(rho: DensityMatrix, a, b, c, config: OptimizerConfig | None = None,
                route: str = "auto") -> dict:
    """Terms of ``Delta = E_ab + E_ac - delta_ab - delta_ac`` (discords measured on b, c)."""
    config = config or OptimizerConfig()
    a, b, c = _parts(rho, a, b, c)
    e_ab = entanglement_of_formation(rho, a, b, config)
    e_ac = entanglement_of_formation(rho, a, c, config)
    if route == "oracle" or (route == "auto" and _kw_available(rho, a, c) and _kw_available(rho, a, b)):
        d_ab = discord_koashi_winter(rho, a, b, c)
        d_ac = discord_koashi_winter(rho, a, c, b)
        used = "oracle"
    elif route in ("auto", "direct"):
        d_ab = _discord_direct(rho, a, b, config)
        d_ac = _discord_direct(rho, a, c, config)
        used = "direct"
    else:
        raise InputError(f"unknown route {route!r}")
    return {"E_ab": e_ab, "E_ac": e_ac, "delta_ab": d_ab, "delta_ac": d_ac,
            "value": e_ab + e_ac - d_ab - d_ac, "route": used}


def balance_delta(rho: DensityMatrix, a, b, c, config: OptimizerConfig | None = None, route: str = "auto") -> float:
    return delta_terms(rho, a, b, c, config, route)["value"]


def delta_tilde_terms(rho: DensityMatrix, a, b, c, config: OptimizerConfig | None = None,
                      route: str = "auto") -> dict:
    """Terms of ``E_ab - E_a(bc) + delta_a(bc) - delta_ab``.

    Routes: ``oracle`` (pure input; Koashi-Winter for ``delta_ab`` and the
    pure-state values ``E_a(bc) = delta_a(bc) = S(a)``), ``direct`` (every
    term optimized), ``purified`` (the equivalent form
    ``E_ab - delta_ab + E_aR - delta_aR`` over a purifying ancilla R).
    ``auto`` picks ``oracle`` when available, else ``direct``.
    """
    config = config or OptimizerConfig()
    a, b, c = _parts(rho, a, b, c)
    bc = rho.layout.group(b + c)
    if route == "auto":
        route = "oracle" if _kw_available(rho, a, c) else "direct"
    e_ab = entanglement_of_formation(rho, a, b, config)
    terms: dict = {"E_ab": e_ab, "route": route}
    if route == "oracle":
        if not _kw_available(rho, a, c):
            raise InputError("oracle route needs a pure state with (a, c) a qubit pair")
        s_a = entropy(rho, a)
        terms.update(E_a_bc=s_a, delta_a_bc=s_a, delta_ab=discord_koashi_winter(rho, a, b, c))
    elif route == "direct":
        terms.update(
            E_a_bc=entanglement_of_formation(rho, a, bc, config),
            delta_a_bc=_discord_direct(rho, a, bc, config),
            delta_ab=_discord_direct(rho, a, b, config),
        )
    elif route == "purified":
        pure = purified(rho, a + bc)
        e_ar = entanglement_of_formation(pure, a, ("R",), config)
        d_ar = _discord_direct(pure, a, ("R",), config)
        d_ab = _discord_direct(rho, a, b, config)
        terms.update(E_aR=e_ar, delta_aR=d_ar, delta_ab=d_ab,
                     value=e_ab - d_ab + e_ar - d_ar)
        return terms
    else:
        raise InputError(f"unknown route {route!r}")
    terms["value"] = terms["E_ab"] - terms["E_a_bc"] + terms["delta_a_bc"] - terms["delta_ab"]
    return terms


def balance_delta_tilde(rho: DensityMatrix, a, b, c, config: OptimizerConfig | None = None,
                        route: str = "auto") -> float:
    return delta_tilde_terms(rho, a, b, c, config, route)["value"]


def purified(rho: DensityMatrix, keep=None, ancilla: str = "R") -> DensityMatrix:
    """Purification of the marginal on ``keep`` with an ancilla factor ``ancilla`` of dim rank."""
    from .linalg import purify

    sub = rho if keep is None else rho.reduce(keep)
    psi, r = purify(sub.matrix)
    lay = Layout(sub.layout.parts + ((ancilla, r),))
    return DensityMatrix(np.outer(psi, psi.conj()), lay)


def lii_net_flow(pure_global: DensityMatrix, groups, config: OptimizerConfig | None = None,
                 route: str = "auto") -> MeasureResult:
    """Net locally-inaccessible-information flow, evaluated as ``E_AB - delta(A|B)``.

    ``groups`` is ``(B, A, E)``.  The discord uses the Koashi-Winter oracle
    with complement ``E`` when ``(A, E)`` is a qubit pair, else direct
    optimization.
    """
    if not pure_global.is_pure(PURE_TOL):
        raise InputError("LII flow needs a pure global state")
    b, a, e = _parts(pure_global, *groups)
    e_ab = entanglement_of_formation(pure_global, a, b, config)
    use_oracle = route == "oracle" or (route == "auto" and _kw_available(pure_global, a, e))
    if use_oracle:
        d_ab = discord_koashi_winter(pure_global, a, b, e)
    else:
        d_ab = _discord_direct(pure_global, a, b, config or OptimizerConfig())
    return MeasureResult(e_ab - d_ab, None, extra={"E_AB": e_ab, "delta_AB": d_ab,
                                                   "route": "oracle" if use_oracle else "direct"})
