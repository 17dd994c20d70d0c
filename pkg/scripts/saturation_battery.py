#!/usr/bin/env python3
"""Markov-chain recovery and b-SSA saturation checks on constructed states."""
from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ssa_lab import recovery as rc
from ssa_lab import reports
from ssa_lab import states as st
from ssa_lab.optimize import OptimizerConfig


@dataclass(frozen=True)
class BatteryConfig:
    markov_specs: int = 50
    bssa_states: int = 10
    seed: int = 5
    patience: int = 4
    out: Path = Path("results/saturation.json")


def main(cfg: BatteryConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    markov = [rc.check_markov(st.make_markov_state(st.random_markov_spec(rng))).to_dict()
              for _ in range(cfg.markov_specs)]
    oc = OptimizerConfig(patience=cfg.patience)
    bssa = []
    for i in range(cfg.bssa_states):
        spec = st.random_bssa_spec(rng, orthogonal_a=bool(i % 2))
        bssa.append(rc.check_bssa_saturation(st.make_bssa_saturating_state(spec), None, oc).to_dict())
    bssa.append({"state": "ghz", **rc.check_bssa_saturation(st.ghz(), None, oc).to_dict()})
    doc = {"markov": markov, "bssa": bssa}
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    reports.emit(doc, cfg.out)
    logging.info("markov max cmi=%.3e max distance=%.3e", max(m["cmi"] for m in markov),
                 max(m["recovery_distance"] for m in markov))
    logging.info("b-SSA max jEquality=%.3e max eofMonogamy=%.3e (constructed states only)",
                 max(b["j_equality"] for b in bssa[:-1]), max(b["eof_monogamy"] for b in bssa[:-1]))
    return doc


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=BatteryConfig.out)
    a = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    main(BatteryConfig(out=a.out))
