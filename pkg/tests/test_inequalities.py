import json

import numpy as np
import pytest

from ssa_lab import inequalities as iq
from ssa_lab import states as st
from ssa_lab.linalg import InputError, Layout
from ssa_lab.optimize import OptimizerConfig

LAY3 = Layout.from_dims((2, 2, 2))
CFG = OptimizerConfig(patience=4)


def test_verdict_rule():
    assert iq.verdict_for(0.0, 1e-3) == iq.SATISFIED
    assert iq.verdict_for(-5e-4, 1e-3) == iq.WITHIN_SLACK
    assert iq.verdict_for(-2e-3, 1e-3) == iq.VIOLATED


@pytest.mark.parametrize("kind", ["wsa", "ssa", "bssa", "maxBound", "koashiWinter",
                                  "boundedWeakMonotonicity", "conservation"])
def test_report_invariants(kind):
    rho = st.random_pure_state(LAY3, 3)
    if kind == "wsa":
        rho = rho.reduce("AB")
    rep = iq.evaluate_inequality(kind, rho, config=CFG)
    assert np.isfinite(rep.lhs) and np.isfinite(rep.rhs)
    assert rep.margin == rep.lhs - rep.rhs
    assert rep.slack == iq.DEFAULT_SLACK[kind]
    assert (rep.verdict == iq.VIOLATED) == (rep.margin < -rep.slack)
    assert rep.verdict != iq.VIOLATED
    assert rep.input_digest == rho.digest()


def test_koashi_winter_equality_on_pure_states():
    for s in range(5):
        rep = iq.evaluate_inequality("koashiWinter", st.random_pure_state(LAY3, s), config=CFG)
        assert abs(rep.margin) <= 2e-3


def test_conservation_requires_pure():
    with pytest.raises(InputError):
        iq.evaluate_inequality("conservation", st.random_mixed_state(LAY3, 2, 0))


def test_unknown_kind_and_partition():
    with pytest.raises(InputError):
        iq.evaluate_inequality("bogus", st.ghz())
    with pytest.raises(InputError):
        iq.evaluate_inequality("ssa", st.bell())


def test_sweep_zero_trials():
    s = iq.sweep_random("ssa", 0, LAY3, (1, 8), 0)
    assert s.trials == 0 and s.violations == 0 and s.min_margin is None and s.histogram == []


def test_sweep_reproducible():
    a = iq.sweep_random("maxBound", 4, LAY3, (1, 4), 9, CFG)
    b = iq.sweep_random("maxBound", 4, LAY3, (1, 4), 9, CFG)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    assert sum(h["count"] for h in a.histogram) == 4
    assert a.seeds == [iq.trial_seed(9, t) for t in range(4)]


def test_ssa_sweep_example():
    s = iq.sweep_random("ssa", 1000, LAY3, (1, 8), 42)
    assert s.violations == 0 and s.trials == 1000


def test_conservation_sweep_example():
    s = iq.sweep_random("conservation", 100, LAY3, (1, 1), 1, CFG)
    assert s.violations == 0


def test_violation_dump(tmp_path):
    # a negative slack turns a satisfied equality into a reported violation
    s = iq.sweep_random("ssa", 3, LAY3, (8, 8), 0, slack=-10.0, dump_dir=tmp_path)
    assert s.aborted and s.violations == 1 and s.trials == 1
    back = st.load_state(s.dump_path)
    assert back.digest() == st.random_mixed_state(LAY3, 8, s.seeds[0]).digest()


def test_search_positive_delta_tilde(tmp_path):
    assert iq.search_positive_delta_tilde(LAY3, 0, 0, CFG) == []
    rng = np.random.default_rng(0)
    markov = [st.make_markov_state(st.random_markov_spec(rng)) for _ in range(5)]
    assert iq.search_positive_delta_tilde(LAY3, 5, 0, CFG, candidates=markov) == []
    found = iq.search_positive_delta_tilde(LAY3, 40, 3, CFG, out_dir=tmp_path)
    for e in found:
        assert e["delta_tilde"] > 2e-3 and e["cmi"] >= e["delta_tilde"] - 2e-3
        assert st.load_state(e["path"]).digest() == e["digest"]
