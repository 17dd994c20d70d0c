import numpy as np
import pytest
from hypothesis import given, strategies as hst

from ssa_lab import measures as ms
from ssa_lab import states as st
from ssa_lab.linalg import InputError, Layout, ket, proj, tensor_product
from ssa_lab.optimize import OptimizerConfig

LAY3 = Layout.from_dims((2, 2, 2))


def _grid_discord_oracle(rho4, n=100):
    """Discord measured on B from a dense (theta, phi) grid of qubit bases."""
    def h(m):
        w = np.linalg.eigvalsh(m)
        w = w[w > 1e-14]
        return float(-np.sum(w * np.log2(w)))

    r = rho4.reshape(2, 2, 2, 2)
    ra = np.einsum("ajbj->ab", r)
    rb = np.einsum("iaib->ab", r)
    mi = h(ra) + h(rb) - h(rho4)
    best = np.inf
    for th in np.linspace(0, np.pi, n):
        for ph in np.linspace(0, 2 * np.pi, n):
            v0 = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
            v1 = np.array([-np.exp(-1j * ph) * np.sin(th / 2), np.cos(th / 2)])
            tot = 0.0
            for v in (v0, v1):
                blk = np.einsum("m,xmyn,n->xy", v.conj(), r, v)
                p = np.trace(blk).real
                if p > 1e-14:
                    tot += p * h(blk / p)
            best = min(best, tot)
    return mi - (h(ra) - best)


def test_entropy_examples():
    assert ms.von_neumann_entropy(proj(ket(0))) == pytest.approx(0, abs=1e-10)
    assert ms.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1)
    assert ms.von_neumann_entropy(np.diag([0.5, 0.25, 0.25])) == pytest.approx(1.5)


def test_relative_entropy_examples():
    rho = st.random_density(3, np.random.default_rng(0))
    assert ms.relative_entropy(rho, rho) == pytest.approx(0, abs=1e-10)
    assert ms.relative_entropy(proj(ket(0)), np.eye(2) / 2) == pytest.approx(1)
    assert ms.relative_entropy(proj(ket(0)), proj(ket(1))) == np.inf


def test_mutual_information_examples():
    prod = st.product_state(st.random_density(2, np.random.default_rng(1)), np.eye(2) / 2)
    assert ms.mutual_information(prod, "A", "B") == pytest.approx(0, abs=1e-10)
    assert ms.mutual_information(st.bell(), "A", "B") == pytest.approx(2)
    assert ms.mutual_information(st.ghz(), "A", "BC") == pytest.approx(2)
    with pytest.raises(InputError):
        ms.mutual_information(st.ghz(), "AB", "BC")


@given(hst.integers(0, 2**31), hst.integers(1, 4))
def test_mi_relative_entropy_identity(seed, rank):
    rho = st.random_mixed_state(Layout.from_dims((2, 2)), rank, seed)
    prod = np.kron(rho.reduce("A").matrix, rho.reduce("B").matrix)
    assert ms.relative_entropy(rho.matrix, prod) == pytest.approx(ms.mutual_information(rho, "A", "B"), abs=1e-9)


def test_cmi_examples_and_ssa_sweep():
    assert ms.conditional_mutual_information(st.ghz(), "A", "B", "C") == pytest.approx(1)
    vals = [ms.conditional_mutual_information(st.random_mixed_state(LAY3, 1 + s % 8, s), "A", "B", "C")
            for s in range(1000)]
    assert min(vals) >= -1e-9


def test_weak_subadditivity_sweep():
    lay = Layout.from_dims((2, 4))
    vals = [ms.mutual_information(st.random_mixed_state(lay, 1 + s % 8, s), "A", "B") for s in range(1000)]
    assert min(vals) >= -1e-9


def test_classical_correlation_examples(fast_config):
    prod = st.product_state(st.random_density(2, np.random.default_rng(2)), st.random_density(2, np.random.default_rng(3)))
    assert ms.classical_correlation(prod, "B", fast_config).value == pytest.approx(0, abs=1e-6)
    assert ms.classical_correlation(st.bell(), "B", fast_config).value == pytest.approx(1, abs=1e-4)
    cq = st.make_named_state("cq")
    j = ms.classical_correlation(cq, "B", fast_config).value
    assert j == pytest.approx(ms.mutual_information(cq, "A", "B"), abs=1e-4)
    with pytest.raises(InputError):
        ms.classical_correlation(st.random_mixed_state(Layout.from_dims((2, 8)), 2, 0), "B")


def test_discord_examples(fast_config):
    assert ms.quantum_discord(st.make_named_state("cq"), "B", fast_config).value == pytest.approx(0, abs=1e-6)
    assert ms.quantum_discord(st.bell(), "B", fast_config).value == pytest.approx(1, abs=1e-4)


def test_werner_discord_grid_oracle():
    rho = st.werner(0.5)
    d = ms.quantum_discord(rho, "B").value
    assert d == pytest.approx(_grid_discord_oracle(rho.matrix), abs=1e-4)


def test_discord_relative_entropy_form(fast_config):
    rho = st.random_mixed_state(Layout.from_dims((2, 2)), 2, 8)
    res = ms.quantum_discord(rho, "B", fast_config)
    assert ms.discord_relative_entropy_form(rho, res.argument, ("A",)) == pytest.approx(res.value, abs=1e-6)
    pm = res.argument.projectors
    assert np.allclose(sum(pm), np.eye(2), atol=1e-10)
    assert np.allclose(pm[0] @ pm[1], 0, atol=1e-10)


def test_qutrit_and_ququart_measured_parties(fast_config):
    rho = st.random_mixed_state(Layout.from_dims((2, 3)), 3, 4)
    res = ms.quantum_discord(rho, "B", fast_config)
    assert -1e-6 <= res.value <= ms.mutual_information(rho, "A", "B") + 1e-9
    cq = st.random_cq_state((2, 4), 4, 2)
    assert ms.quantum_discord(cq, "B", fast_config).value <= 1e-6


def test_koashi_winter_examples(fast_config):
    assert ms.discord_koashi_winter(st.ghz(), "A", "C", "B") == pytest.approx(0, abs=1e-12)
    w = st.w_state()
    direct = ms.quantum_discord(w.reduce("AC"), "C", fast_config).value
    assert ms.discord_koashi_winter(w, "A", "C", "B") == pytest.approx(direct, abs=2e-4)
    with pytest.raises(InputError):
        ms.discord_koashi_winter(st.random_mixed_state(LAY3, 2, 0), "A", "C", "B")


def test_eof_two_qubit():
    assert ms.eof_two_qubit(st.bell().matrix) == pytest.approx(1)
    rng = np.random.default_rng(5)
    sep = sum(p * np.kron(st.random_density(2, rng), st.random_density(2, rng)) for p in (0.2, 0.3, 0.5))
    assert ms.eof_two_qubit(sep) == pytest.approx(0, abs=1e-10)
    for p in (0, 0.2, 1 / 3):
        assert ms.eof_two_qubit(st.werner(p).matrix) == pytest.approx(0, abs=1e-10)
    for p in (0.34, 0.5, 0.9):
        assert ms.eof_two_qubit(st.werner(p).matrix) > 0
    with pytest.raises(InputError):
        ms.eof_two_qubit(np.eye(3) / 3)


def test_eof_ensemble(fast_config):
    pure = st.random_pure_state(Layout.from_dims((2, 2)), 3)
    assert ms.eof_ensemble_min(pure, "A", "B").value == pytest.approx(ms.entropy(pure, "A"), abs=1e-12)
    assert ms.eof_ensemble_min(st.bell(), "A", "B", fast_config).value == pytest.approx(1, abs=1e-4)
    rho = st.random_mixed_state(Layout.from_dims((2, 2)), 2, 21)
    e = ms.eof_ensemble_min(rho, "A", "B", fast_config).value
    oracle = ms.eof_two_qubit(rho.matrix)
    assert oracle - 1e-6 <= e <= oracle + 5e-3
    with pytest.raises(InputError):
        ms.eof_ensemble_min(st.random_mixed_state(Layout.from_dims((4, 8)), 2, 0), "A", "B")


def test_coherent_information():
    assert ms.coherent_information(st.bell(), "A", "B") == pytest.approx(1)
    assert ms.coherent_information(st.product_state(np.eye(2) / 2, np.eye(2) / 2), "A", "B") == pytest.approx(-1)
    cc = st.DensityMatrix(np.diag([0.5, 0, 0, 0.5]).astype(complex), Layout.from_dims((2, 2)))
    assert ms.coherent_information(cc, "A", "B") == pytest.approx(0, abs=1e-12)


def test_balance_delta_examples(fast_config):
    assert ms.balance_delta(st.ghz(), "A", "B", "C", fast_config) == pytest.approx(0, abs=1e-4)
    assert abs(ms.balance_delta(st.w_state(), "A", "B", "C", fast_config, route="direct")) <= 3e-3


def test_balance_delta_tilde_examples(fast_config):
    for route in ("oracle", "direct"):
        t = ms.delta_tilde_terms(st.ghz(), "A", "B", "C", fast_config, route=route)
        assert t["E_ab"] == pytest.approx(0, abs=1e-9)
        assert t["E_a_bc"] == pytest.approx(1, abs=1e-9)
        assert t["delta_a_bc"] == pytest.approx(1, abs=1e-6)
        assert t["delta_ab"] == pytest.approx(0, abs=1e-6)
        assert t["value"] == pytest.approx(0, abs=1e-6)
    prod = st.product_state(*(st.random_density(2, np.random.default_rng(i)) for i in range(3)), labels="ABC")
    assert ms.balance_delta_tilde(prod, "A", "B", "C", fast_config) == pytest.approx(0, abs=1e-6)


def test_delta_tilde_routes_agree(fast_config):
    rho = st.random_pure_state(LAY3, 12)
    oracle = ms.balance_delta_tilde(rho, "A", "B", "C", fast_config, route="oracle")
    direct = ms.balance_delta_tilde(rho, "A", "B", "C", fast_config, route="direct")
    assert oracle == pytest.approx(direct, abs=2e-3)


def test_bssa_small_sweep(fast_config):
    for s in range(200):
        rho = st.random_mixed_state(LAY3, 1 + s % 2, 5000 + s)
        dt = ms.balance_delta_tilde(rho, "A", "B", "C", fast_config)
        assert ms.conditional_mutual_information(rho, "A", "B", "C") >= dt - 2e-3


def test_koashi_winter_inequality_mixed(fast_config):
    for s in range(200):
        rho = st.random_mixed_state(LAY3, 2 + s % 7, 900 + s)
        e_ab = ms.eof_two_qubit(rho.reduce("AB").matrix)
        d_ac = ms.quantum_discord(rho.reduce("AC"), "C", fast_config).value
        assert d_ac + ms.conditional_entropy(rho, "A", "C") - e_ab >= -2e-3


def test_lii_examples(fast_config):
    prod = st.product_state(proj(ket(0)), proj(ket(0)), proj(ket(1)), labels="BAE")
    assert ms.lii_net_flow(prod, ("B", "A", "E"), fast_config).value == pytest.approx(0, abs=1e-9)
    be = st.DensityMatrix(tensor_product(st.bell().matrix, proj(ket(0))), Layout.of(("A", 2), ("B", 2), ("E", 2)))
    assert ms.lii_net_flow(be, ("B", "A", "E"), fast_config).value == pytest.approx(0, abs=1e-4)


def test_lii_amplitude_damped_cross_path(fast_config):
    from ssa_lab.channels import amplitude_damping, dilate

    s = dilate(st.bell(), "B", amplitude_damping(0.5), "B1", "E1")
    oracle = ms.lii_net_flow(s, ("B1", "A", "E1"), fast_config, route="oracle").value
    ab = s.reduce(("A", "B1"))
    direct = ms.eof_two_qubit(ab.matrix) - ms.quantum_discord(ab, "B1", fast_config).value
    assert oracle == pytest.approx(direct, abs=2e-4)


def test_delta_tilde_purified_route_matches_direct(fast_config):
    for s in range(3):
        rho = st.random_mixed_state(LAY3, 2, 70 + s)
        direct = ms.balance_delta_tilde(rho, "A", "B", "C", fast_config, route="direct")
        pur = ms.balance_delta_tilde(rho, "A", "B", "C", fast_config, route="purified")
        assert pur == pytest.approx(direct, abs=2e-3)
