"""Slack-aware verdicts for entropy inequalities and seeded Monte-Carlo sweeps."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import measures as ms
from .linalg import InputError, Layout
from .optimize import OptimizerConfig
from .states import DensityMatrix, random_mixed_state, save_state

log = logging.getLogger(__name__)

KINDS = ("wsa", "ssa", "bssa", "koashiWinter", "boundedWeakMonotonicity", "conservation", "maxBound")
DEFAULT_SLACK = {
    "wsa": 1e-9,
    "ssa": 1e-9,
    "conservation": 3e-3,
    "bssa": 2e-3,
    "maxBound": 2e-3,
    "koashiWinter": 2e-3,
    "boundedWeakMonotonicity": 2e-3,
}
SATISFIED, WITHIN_SLACK, VIOLATED = "satisfied", "withinSlack", "violatedBeyondSlack"


@dataclass
class InequalityReport:
    """One inequality instance normalized to ``lhs - rhs >= 0``."""

    kind: str
    lhs: float
    rhs: float
    margin: float
    slack: float
    verdict: str
    input_digest: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def verdict_for(margin: float, slack: float) -> str:
    if margin < -slack:
        return VIOLATED
    return SATISFIED if margin >= 0 else WITHIN_SLACK


def _default_partition(rho: DensityMatrix, kind: str):
    labels = rho.labels
    want = 2 if kind == "wsa" else 3
    if len(labels) != want:
        raise InputError(f"{kind} needs a {want}-part partition; layout has {labels}")
    return [(lbl,) for lbl in labels]


def evaluate_inequality(kind: str, rho: DensityMatrix, partition=None, config: OptimizerConfig | None = None,
                        slack: float | None = None, route: str = "auto") -> InequalityReport:
    if kind not in KINDS:
        raise InputError(f"unknown inequality kind {kind!r}; choose from {KINDS}")
    config = config or OptimizerConfig()
    slack = DEFAULT_SLACK[kind] if slack is None else slack
    parts = partition or _default_partition(rho, kind)
    if len(parts) != (2 if kind == "wsa" else 3):
        raise InputError(f"{kind} needs {'2' if kind == 'wsa' else '3'} groups")
    groups = [rho.layout.group(g) for g in parts]
    diag: dict = {}
    S = lambda *gs: ms.entropy(rho, sum(gs, ()))  # noqa: E731

    if kind == "wsa":
        a, b = groups
        lhs, rhs = S(a) + S(b) - S(a, b), 0.0
    else:
        a, b, c = groups
        if kind == "ssa":
            lhs, rhs = ms.conditional_mutual_information(rho, a, b, c), 0.0
        elif kind == "boundedWeakMonotonicity":
            t = ms.delta_terms(rho, a, b, c, config, route)
            diag.update(t)
            lhs, rhs = S(a, b) + S(a, c) - S(b) - S(c), t["value"]
        elif kind == "conservation":
            if not rho.is_pure(ms.PURE_TOL):
                raise InputError("conservation relation needs a pure state")
            # the oracle route makes Delta vanish identically, so optimize by default
            t = ms.delta_terms(rho, a, b, c, config, "direct" if route == "auto" else route)
            diag.update(t)
            diag["delta"] = t["value"]
            # equality relation: scored by -|Delta| so only |Delta| > slack fails
            lhs, rhs = -abs(t["value"]), 0.0
        elif kind in ("bssa", "maxBound"):
            t = ms.delta_tilde_terms(rho, a, b, c, config, route)
            diag.update(t)
            diag["delta_tilde"] = t["value"]
            lhs = ms.conditional_mutual_information(rho, a, b, c)
            rhs = t["value"] if kind == "bssa" else max(0.0, t["value"])
        elif kind == "koashiWinter":
            e_ab = ms.entanglement_of_formation(rho, a, b, config)
            d_ac = ms._discord_direct(rho, a, c, config)
            s_ac = ms.conditional_entropy(rho, a, c)
            diag.update(E_ab=e_ab, delta_ac=d_ac, S_a_given_c=s_ac)
            lhs, rhs = d_ac + s_ac, e_ab
    margin = lhs - rhs
    verdict = verdict_for(margin, slack)
    if kind == "conservation" and verdict == WITHIN_SLACK:
        verdict = SATISFIED
    return InequalityReport(kind, float(lhs), float(rhs), float(margin), slack, verdict, rho.digest(), diag)


@dataclass
class SweepSummary:
    kind: str
    trials: int
    violations: int
    min_margin: float | None
    max_delta_tilde: float | None
    seeds: list[int]
    histogram: list[dict]
    delta_tilde_histogram: list[dict] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    master_seed: int = 0
    aborted: bool = False
    dump_path: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def trial_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1)[0])


def histogram(values, bins: int = 20) -> list[dict]:
    values = np.asarray([v for v in values if v is not None], dtype=float)
    if values.size == 0:
        return []
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        lo, hi = lo - 0.5e-12, hi + 0.5e-12
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return [{"bucketLow": float(edges[i]), "bucketHigh": float(edges[i + 1]), "count": int(counts[i])}
            for i in range(bins)]


def _parse_rank_range(rank_range, dim: int) -> tuple[int, int]:
    if rank_range is None:
        return 1, dim
    if isinstance(rank_range, int):
        return rank_range, rank_range
    lo, hi = rank_range
    return int(lo), int(hi)


def sweep_random(kind: str, trials: int, layout: Layout, rank_range=None, master_seed: int = 0,
                 config: OptimizerConfig | None = None, slack: float | None = None,
                 dump_dir=None, abort_on_violation: bool = True) -> SweepSummary:
    """Evaluate ``kind`` on ``trials`` random states; trial ``i`` uses ``trial_seed(master_seed, i)``.

    The rank of each trial state is drawn uniformly from ``rank_range``
    (inclusive).  A violation beyond slack stops the sweep and, when
    ``dump_dir`` is given, writes the offending state there.
    """
    lo, hi = _parse_rank_range(rank_range, layout.total_dim)
    if not 1 <= lo <= hi <= layout.total_dim:
        raise InputError(f"invalid rank range {rank_range}")
    seeds, records, violations = [], [], 0
    aborted, dump_path = False, None
    for t in range(trials):
        seed = trial_seed(master_seed, t)
        rank = int(np.random.default_rng(seed).integers(lo, hi + 1))
        rho = random_mixed_state(layout, rank, seed)
        rep = evaluate_inequality(kind, rho, config=config, slack=slack)
        seeds.append(seed)
        rec = {"trial": t, "seed": seed, "rank": rank, "lhs": rep.lhs, "rhs": rep.rhs,
               "margin": rep.margin, "verdict": rep.verdict,
               "delta_tilde": rep.diagnostics.get("delta_tilde"), "delta": rep.diagnostics.get("delta")}
        records.append(rec)
        if rep.verdict == VIOLATED:
            violations += 1
            log.error("%s violated beyond slack at trial %d (margin %.3e)", kind, t, rep.margin)
            if dump_dir is not None:
                Path(dump_dir).mkdir(parents=True, exist_ok=True)
                dump_path = str(Path(dump_dir) / f"violation_{kind}_{master_seed}_{t}.json")
                save_state(rho, dump_path, {"kind": kind, "trial": t, "seed": seed, "report": rep.to_dict()})
            if abort_on_violation:
                aborted = True
                break
    margins = [r["margin"] for r in records]
    dts = [r["delta_tilde"] for r in records if r["delta_tilde"] is not None]
    return SweepSummary(
        kind=kind, trials=len(records), violations=violations,
        min_margin=min(margins) if margins else None,
        max_delta_tilde=max(dts) if dts else None,
        seeds=seeds, histogram=histogram(margins), delta_tilde_histogram=histogram(dts),
        records=records, master_seed=master_seed, aborted=aborted, dump_path=dump_path,
    )


def search_positive_delta_tilde(layout: Layout, budget: int, master_seed: int = 0,
                                config: OptimizerConfig | None = None, rank_range=(2, 2),
                                slack: float = DEFAULT_SLACK["maxBound"], candidates=None,
                                out_dir=None) -> list[dict]:
    """Collect states whose ``Delta~`` exceeds ``slack``.

    ``candidates`` overrides the random sampler with explicit states.  Every
    returned entry also satisfies ``I(A:C|B) >= Delta~ - slack``; candidates
    that would break that bound are logged as violations and left out.
    """
    found: list[dict] = []
    if candidates is None:
        lo, hi = _parse_rank_range(rank_range, layout.total_dim)
        def gen():
            for t in range(budget):
                seed = trial_seed(master_seed, t)
                rank = int(np.random.default_rng(seed).integers(lo, hi + 1))
                yield t, random_mixed_state(layout, rank, seed)
        candidates_iter = gen()
    else:
        candidates_iter = enumerate(list(candidates)[:budget])
    for t, rho in candidates_iter:
        a, b, c = ((lbl,) for lbl in rho.labels)
        dt = ms.balance_delta_tilde(rho, a, b, c, config)
        if dt <= slack:
            continue
        cmi = ms.conditional_mutual_information(rho, a, b, c)
        if cmi < dt - slack:
            log.error("max bound violated by candidate %d: cmi %.6f < delta~ %.6f", t, cmi, dt)
            continue
        entry = {"digest": rho.digest(), "delta_tilde": dt, "cmi": cmi, "trial": t, "path": None}
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            path = Path(out_dir) / f"dtilde_{rho.digest()}.json"
            save_state(rho, path, {"delta_tilde": dt, "cmi": cmi, "trial": t})
            entry["path"] = str(path)
        found.append(entry)
    return found
