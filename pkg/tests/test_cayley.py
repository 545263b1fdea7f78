import math

import numpy as np
import pytest

from reslab import cayley as cy
from reslab import schottky as sk
from reslab.abelian import AbelianQuotient


def test_graph_validation():
    with pytest.raises(ValueError):
        # not symmetric
        cy.CayleyGraph(AbelianQuotient((5,)), ((1,),))
    with pytest.raises(ValueError):
        # loop
        cy.CayleyGraph(AbelianQuotient((4,)), ((0,), (1,), (3,)))
    with pytest.raises(ValueError):
        # disconnected: <2> inside Z/4
        cy.CayleyGraph(AbelianQuotient((4,)), ((2,),))
    with pytest.raises(ValueError):
        cy.CayleyGraph(AbelianQuotient((6,)), ((2,), (4,), (2,)))


def test_z4_cycle_spectrum():
    lam = cy.laplacian_eigenvalues(cy.cycle_graph(4))
    assert np.allclose(lam, [0.0, 1.0, 1.0, 2.0], atol=1e-12)


def test_character_formula_matches_dense_oracle():
    graphs = [
        cy.cycle_graph(4),
        cy.cycle_graph(12),
        cy.CayleyGraph(AbelianQuotient((4,)), ((1,), (3,), (2,))),
        cy.CayleyGraph(AbelianQuotient((3, 4)), ((1, 0), (2, 0), (0, 1), (0, 3))),
        cy.CayleyGraph(AbelianQuotient((2, 5, 5)),
                       ((1, 1, 0), (1, 4, 0), (0, 0, 1), (0, 0, 4))),
    ]
    for g in graphs:
        assert g.order <= 200
        lam = cy.laplacian_eigenvalues(g)
        oracle = np.sort(np.linalg.eigvalsh(cy.dense_laplacian(g)))
        assert np.abs(lam - oracle).max() < 1e-10


def test_spectrum_in_range_and_trace():
    g = cy.CayleyGraph(AbelianQuotient((3, 4)), ((1, 0), (2, 0), (0, 1), (0, 3)))
    lam = cy.laplacian_eigenvalues(g)
    assert lam[0] >= -1e-12 and lam[-1] <= 2.0 + 1e-12
    assert abs(lam.sum() - g.order) < 1e-9


def test_zero_eigenvalue_simple_iff_connected():
    for g in (cy.cycle_graph(7), cy.cycle_graph(16)):
        lam = cy.laplacian_eigenvalues(g)
        assert abs(lam[0]) < 1e-12
        assert lam[1] > 1e-9


def test_eigenvalues_invariant_under_generator_relabeling():
    a = cy.CayleyGraph(AbelianQuotient((3, 4)), ((1, 0), (2, 0), (0, 1), (0, 3)))
    b = cy.CayleyGraph(AbelianQuotient((3, 4)), ((0, 3), (2, 0), (0, 1), (1, 0)))
    assert np.allclose(cy.laplacian_eigenvalues(a), cy.laplacian_eigenvalues(b))


def test_cheeger_z4_cycle():
    res = cy.cheeger_constant(cy.cycle_graph(4))
    assert res.exact
    assert abs(res.value - 1.0) < 1e-12


def test_cheeger_complete_k4():
    g = cy.CayleyGraph(AbelianQuotient((4,)), ((1,), (3,), (2,)))
    res = cy.cheeger_constant(g)
    assert res.exact
    assert abs(res.value - 2.0) < 1e-12


def test_cheeger_singleton_bound():
    for g in (cy.cycle_graph(9), cy.CayleyGraph(AbelianQuotient((4,)), ((1,), (3,), (2,)))):
        assert cy.cheeger_constant(g).value <= g.degree + 1e-12


def test_cheeger_sampling_mode_flagged():
    res = cy.cheeger_constant(cy.cycle_graph(40), samples=200)
    assert not res.exact
    # sampled value is an upper bound on the true h = 2/20
    assert res.value >= 2.0 / 20.0 - 1e-12


def test_sandwich_z6():
    rep = cy.sandwich_check(cy.cycle_graph(6))
    assert abs(rep["lambda1"] - 0.5) < 1e-12
    assert abs(rep["cheeger"] - 2.0 / 3.0) < 1e-12
    assert not rep["lambda1_flagged"]
    assert rep["lower"] <= rep["cheeger"] <= rep["upper"]


def test_sandwich_z8():
    rep = cy.sandwich_check(cy.cycle_graph(8))
    assert abs(rep["lambda1"] - (1 - math.cos(math.pi / 4))) < 1e-12
    assert abs(rep["cheeger"] - 0.5) < 1e-12
    assert abs(rep["upper"] - 0.9101797211244534) < 1e-10


def test_sandwich_flagged_regime():
    # Z/4: lambda1 = 1, printed upper degenerates; Z/5: lambda1 = 0.69,
    # printed upper is below the exhaustive h - both flagged, not asserted
    r4 = cy.sandwich_check(cy.cycle_graph(4))
    assert r4["lambda1_flagged"]
    r5 = cy.sandwich_check(cy.cycle_graph(5))
    assert r5["lambda1_flagged"]
    assert r5["cheeger"] > r5["upper"]


def test_sandwich_all_small_cycles():
    for N in range(5, 25):
        rep = cy.sandwich_check(cy.cycle_graph(N))
        assert rep["cheeger"] >= rep["lower"] - 1e-9
        if not rep["lambda1_flagged"]:
            assert rep["cheeger"] <= rep["upper"] + 1e-9


def test_lambda1_monotone_on_doubling():
    vals = [cy.laplacian_eigenvalues(cy.cycle_graph(N))[1]
            for N in (8, 16, 32, 64, 128)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_gap_decay_cycles():
    exp = cy.gap_decay_experiment([64, 128, 256, 512, 1024])
    assert exp["relative_spread"] < 0.05
    assert abs(exp["fitted_constant"] - 2 * math.pi ** 2) < 0.05
    assert exp["h_bound_infimum"] < 0.1


def test_gap_decay_from_group():
    pair = sk.preset("sl2z-pair")
    exp = cy.gap_decay_experiment([16, 32, 64, 128], data=pair)
    lams = [r["lambda1"] for r in exp["rows"]]
    assert all(b < a for a, b in zip(lams, lams[1:]))
    assert exp["relative_spread"] < 0.05


def test_graph_from_group_drops_zero_images():
    pair = sk.preset("sl2z-pair")
    g = cy.graph_from_group(pair, (8, 1))
    assert g.gens == ((1, 0), (7, 0))
    with pytest.raises(ValueError):
        cy.graph_from_group(pair, (8,))
