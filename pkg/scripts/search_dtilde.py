#!/usr/bin/env python3
"""Look for random states with positive Delta~ and check the max bound on them."""
from __future__ import annotations

import argparse
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

from ssa_lab import inequalities as iq
from ssa_lab import reports
from ssa_lab.linalg import Layout
from ssa_lab.optimize import OptimizerConfig


@dataclass(frozen=True)
class SearchConfig:
    dims: tuple[int, ...] = (2, 2, 2)
    budget: int = 2000
    ranks: tuple[int, int] = (2, 2)
    seed: int = 0
    patience: int = 4
    out_dir: Path = Path("results/dtilde")


def main(cfg: SearchConfig) -> dict:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    found = iq.search_positive_delta_tilde(Layout.from_dims(cfg.dims), cfg.budget, cfg.seed,
                                           OptimizerConfig(patience=cfg.patience), rank_range=cfg.ranks,
                                           out_dir=cfg.out_dir / "states")
    doc = {"config": {k: str(v) if isinstance(v, Path) else v for k, v in asdict(cfg).items()},
           "found": len(found), "entries": found}
    reports.emit(doc, cfg.out_dir / "search.json")
    logging.info("positive delta~ states: %d of %d candidates", len(found), cfg.budget)
    return doc


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--budget", type=int, default=SearchConfig.budget)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=SearchConfig.out_dir)
    a = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = main(SearchConfig(budget=a.budget, seed=a.seed, out_dir=a.out_dir))
    print(json.dumps({"found": out["found"]}))
