import numpy as np
import pytest

from ssa_lab import recovery as rc
from ssa_lab import states as st
from ssa_lab.linalg import Layout, ket, proj, tensor_product


def test_petz_product_case():
    rng = np.random.default_rng(0)
    rb, rcm = st.random_density(2, rng), st.random_density(3, rng)
    pm = rc.build_petz_map(st.DensityMatrix(np.kron(rb, rcm), Layout.from_dims((2, 3))))
    for _ in range(5):
        s = st.random_density(2, rng)
        assert np.max(np.abs(pm.apply(s) - np.kron(s, rcm))) <= 1e-10


def test_petz_self_recovery_pure():
    p = st.random_pure_state(Layout.from_dims((2, 2)), 4)
    pm = rc.build_petz_map(p)
    assert np.max(np.abs(pm.apply(p.reduce("A").matrix) - p.matrix)) <= 1e-9


def test_petz_self_recovery_mixed():
    for s in range(10):
        rho = st.random_mixed_state(Layout.from_dims((2, 2)), 1 + s % 4, s)
        pm = rc.build_petz_map(rho)
        assert np.max(np.abs(pm.apply(rho.reduce("A").matrix) - rho.matrix)) <= 1e-9


def test_petz_trace_preservation_audit():
    full = st.random_mixed_state(Layout.from_dims((2, 3)), 6, 3)
    pm = rc.build_petz_map(full)
    rng = np.random.default_rng(2)
    assert max(pm.trace_loss(st.random_density(2, rng)) for _ in range(20)) <= 1e-8


def test_petz_off_support_annihilated():
    # rho_B = |0><0|: inputs on |1> are outside the support and lost
    rho = st.DensityMatrix(np.kron(proj(ket(0)), np.eye(2) / 2), Layout.from_dims((2, 2)))
    pm = rc.build_petz_map(rho)
    assert pm.trace_loss(proj(ket(1))) == pytest.approx(1)
    assert pm.trace_loss(proj(ket(0))) <= 1e-12


def test_check_markov_examples():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = rc.check_markov(st.make_markov_state(st.random_markov_spec(rng)))
        assert m.is_markov and m.cmi <= 1e-9 and m.recovery_distance <= 1e-6
    g = rc.check_markov(st.ghz())
    assert g.cmi == pytest.approx(1) and not g.is_markov and g.recovery_distance > 0.1
    prod = st.product_state(*(st.random_density(2, rng) for _ in range(3)), labels="ABC")
    p = rc.check_markov(prod)
    assert p.cmi == pytest.approx(0, abs=1e-12) and p.recovery_distance <= 1e-9


def test_markov_implies_recovery_on_larger_blocks():
    rng = np.random.default_rng(3)
    for _ in range(5):
        spec = st.random_markov_spec(rng, shapes=((2, 1), (1, 2)))
        m = rc.check_markov(st.make_markov_state(spec))
        assert m.is_markov and m.recovery_distance <= 1e-6


def test_bssa_saturation_battery(fast_config):
    rng = np.random.default_rng(5)
    for orth in (True, False):
        rho = st.make_bssa_saturating_state(st.random_bssa_spec(rng, orthogonal_a=orth))
        rep = rc.check_bssa_saturation(rho, None, fast_config)
        assert rep.j_equality <= 2e-3 and rep.eof_monogamy <= 2e-3
        assert rep.j_equality >= 0 and rep.eof_monogamy >= 0


def test_bell_product_extension(fast_config):
    rho = st.DensityMatrix(tensor_product(st.bell().matrix, proj(ket(0))), Layout.from_dims((2, 2, 2)))
    rep = rc.check_bssa_saturation(rho, None, fast_config)
    assert rep.terms["E_A_BC"] == pytest.approx(1, abs=1e-9)
    assert rep.terms["E_AB"] == pytest.approx(1, abs=1e-9)
    assert rep.j_equality <= 1e-6 and rep.max_bound_saturated


def test_ghz_not_saturating(fast_config):
    rep = rc.check_bssa_saturation(st.ghz(), None, fast_config)
    assert rep.eof_monogamy == pytest.approx(1, abs=1e-9)
