"""Multi-start optimizers over measurement bases and state decompositions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, logm
from scipy.optimize import minimize

from .linalg import InputError


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    max_iterations: int = 4000
    tolerance: float = 1e-12
    seed: int = 0
    # stop once this many consecutive restarts fail to improve the incumbent
    patience: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise InputError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise InputError("tolerance must be positive")
        if self.patience is not None and self.patience < 1:
            raise InputError("patience must be >= 1")

    def replace(self, **kw) -> "OptimizerConfig":
        return OptimizerConfig(**{**self.__dict__, **kw})


@dataclass
class MultiStartResult:
    x: np.ndarray
    value: float
    values: list[float] = field(default_factory=list)
    converged: bool = True

    @property
    def spread(self) -> float:
        return float(max(self.values) - min(self.values)) if self.values else 0.0


class _Stall:
    def __init__(self, patience: int | None, eps: float = 1e-9):
        self.patience, self.eps = patience, eps
        self.best, self.count = np.inf, 0

    def done(self, value: float) -> bool:
        if value < self.best - self.eps:
            self.best, self.count = value, 0
        else:
            self.count += 1
        return self.patience is not None and self.count >= self.patience


def restart_rng(config: OptimizerConfig, restart: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng([config.seed, salt, restart])


def multistart_simplex(fun, starts: list[np.ndarray], config: OptimizerConfig,
                       coarse_xatol: float = 1e-5) -> MultiStartResult:
    """Coarse Nelder-Mead from every start, then a tight polish of the best one.

    The lowest value wins; ties go to the lower start index.
    """
    def run(x0, xatol, fatol):
        opts = {
            "xatol": xatol,
            "fatol": fatol,
            "maxiter": config.max_iterations,
            "maxfev": 2 * config.max_iterations,
            "adaptive": x0.size > 2,
        }
        return minimize(fun, x0, method="Nelder-Mead", options=opts)

    values, results = [], []
    stall = _Stall(config.patience)
    for x0 in starts:
        res = run(np.asarray(x0, dtype=float), coarse_xatol, 1e-9)
        values.append(float(res.fun))
        results.append(res)
        if stall.done(float(res.fun)):
            break
    i = int(np.argmin(values))
    fine = run(np.asarray(results[i].x), 1e-10, config.tolerance)
    if fine.fun <= values[i]:
        x, val, ok = fine.x, float(fine.fun), bool(fine.success)
    else:
        x, val, ok = results[i].x, values[i], bool(results[i].success)
    return MultiStartResult(np.array(x), val, values, ok)


# --- Givens-angle parametrization of orthonormal bases -------------------------

def n_basis_angles(d: int) -> int:
    return d * (d - 1)


def givens_unitary(angles: np.ndarray, d: int) -> np.ndarray:
    """Unitary built from one (theta, phi) pair per index pair ``i < j``.

    Columns are the basis vectors.  ``d(d-1)`` real parameters reach every
    orthonormal basis of ``C^d`` up to per-vector phases.
    """
    if d == 2:
        c, s = np.cos(angles[0]), np.sin(angles[0])
        e = np.exp(1j * angles[1])
        return np.array([[c, -np.conj(e) * s], [e * s, c]])
    u = np.eye(d, dtype=complex)
    k = 0
    for i in range(d - 1):
        for j in range(i + 1, d):
            th, ph = angles[k], angles[k + 1]
            k += 2
            c, s = np.cos(th), np.sin(th)
            e = np.exp(1j * ph)
            ui, uj = u[i].copy(), u[j].copy()
            u[i] = c * ui - np.conj(e) * s * uj
            u[j] = e * s * ui + c * uj
    return u


def random_angles(d: int, rng: np.random.Generator) -> np.ndarray:
    n = n_basis_angles(d)
    out = np.empty(n)
    out[0::2] = rng.uniform(0, np.pi / 2, n // 2)
    out[1::2] = rng.uniform(0, 2 * np.pi, n // 2)
    return out


# --- optimization over isometries ---------------------------------------------

def _antihermitian(x: np.ndarray, k: int) -> np.ndarray:
    iu = np.triu_indices(k, 1)
    m = len(iu[0])
    a = np.zeros((k, k), dtype=complex)
    a[iu] = x[:m] + 1j * x[m:2 * m]
    a = a - a.conj().T
    a[np.diag_indices(k)] = 1j * x[2 * m:]
    return a


def _antihermitian_grad(g: np.ndarray, k: int) -> np.ndarray:
    # gradient of Re tr(g^† A(x)) with respect to x
    iu = np.triu_indices(k, 1)
    gu, gl = g[iu], g.T[iu]
    return np.concatenate([(gu - gl).real, (gu + gl).imag, np.diag(g).imag])


def _expm_with_adjoint(a: np.ndarray):
    """``expm(a)`` for anti-Hermitian ``a`` and the adjoint of its Frechet derivative.

    With ``a = i W diag(mu) W^†`` the derivative acts as a Hadamard product
    with the divided differences of ``exp`` in the eigenbasis.
    """
    mu, w = np.linalg.eigh(-1j * a)
    ph = np.exp(1j * mu)
    e = (w * ph) @ w.conj().T
    kernel = np.exp(0.5j * (mu[:, None] + mu[None, :])) * np.sinc((mu[:, None] - mu[None, :]) / (2 * np.pi))
    wd = w.conj().T

    def adjoint(g):
        return w @ ((wd @ g @ w) * kernel.conj()) @ wd

    return e, adjoint


def minimize_over_isometry(fun_grad, k: int, r: int, config: OptimizerConfig,
                           u_starts: list[np.ndarray], rounds: int = 4) -> MultiStartResult:
    """Minimize ``f(U)`` over ``k x r`` isometries, ``U^† U = I``.

    ``fun_grad(U)`` returns ``(f, G)`` with ``df = Re tr(G^† dU)``.  Each
    restart runs L-BFGS in the exponential chart ``U0 expm(A)[:, :r]``,
    re-centering the chart a few times.
    """
    values, best = [], None
    n = k * k
    stall = _Stall(config.patience)
    for u0 in u_starts:
        w0 = _complete_unitary(np.asarray(u0, dtype=complex), k)
        val = np.inf
        for _ in range(rounds):
            def f(x, w0=w0):
                e, adjoint = _expm_with_adjoint(_antihermitian(x, k))
                val, g = fun_grad(w0 @ e[:, :r])
                ge = np.zeros((k, k), dtype=complex)
                ge[:, :r] = w0.conj().T @ g
                return val, _antihermitian_grad(adjoint(ge), k)

            res = minimize(f, np.zeros(n), jac=True, method="L-BFGS-B",
                           options={"maxiter": config.max_iterations // 4, "ftol": 1e-15, "gtol": 1e-11})
            w0 = w0 @ expm(_antihermitian(res.x, k))
            improved = val - res.fun
            val = float(res.fun)
            if improved < config.tolerance:
                break
        values.append(val)
        if best is None or val < best.value:
            best = MultiStartResult(w0[:, :r].copy(), val)
        if stall.done(val):
            break
    best.values = values
    return best


def unitary_generator(u: np.ndarray) -> np.ndarray:
    """Real parameter vector ``x`` with ``expm(A(x)) = u`` (principal logarithm)."""
    k = u.shape[0]
    a = logm(u)
    a = 0.5 * (a - a.conj().T)
    iu = np.triu_indices(k, 1)
    return np.concatenate([a[iu].real, a[iu].imag, np.diag(a).imag])


def _complete_unitary(u: np.ndarray, k: int) -> np.ndarray:
    if u.shape == (k, k):
        return u
    q, _ = np.linalg.qr(np.hstack([u, np.eye(k, dtype=complex)]))
    q[:, : u.shape[1]] = u
    return q


def random_isometry(k: int, r: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((k, r)) + 1j * rng.standard_normal((k, r))
    q, rr = np.linalg.qr(z)
    return q * (np.diag(rr) / np.abs(np.diag(rr)))
