import math

import numpy as np
import pytest

from twistlab import centralizer as cz
from twistlab import params
from twistlab.coeff import CoeffVector
from twistlab.twisted import TwistedVector

SMALL = params.DnBudget(placements=4, restarts=1, sweeps=2, max_evals=400)


def test_block_sequence_validation():
    e = lambda j: CoeffVector.unit(j, "float")
    seq = params.BlockSequence((e(1), e(2), e(5)))
    assert seq.n == 3 and seq.length == 5
    assert np.allclose(seq.total(), [1, 1, 0, 0, 1])
    with pytest.raises(ValueError):
        params.BlockSequence((e(2), e(2)))
    with pytest.raises(ValueError):
        params.BlockSequence((e(1), e(2)), params.GAP)
    with pytest.raises(ValueError):
        params.BlockSequence((e(1), TwistedVector.basis(3)))
    with pytest.raises(ValueError):
        params.BlockSequence(())
    back = params.BlockSequence.from_json(seq.to_json())
    assert back == seq
    assert back.witness_id() == seq.witness_id()


def test_Dn_l2_is_sqrt_n():
    for n in range(1, 5):
        r = params.estimate_Dn(params.l2_space(), n, SMALL)
        assert r.lower == pytest.approx(math.sqrt(n), abs=1e-9)
        assert r.status == "lower bound only"


def test_Dn_witness_is_feasible():
    sp = params.tp_space(2)
    r = params.estimate_Dn(sp, 3, SMALL, seed=1)
    for b in r.witness.block_arrays():
        assert sp(b) <= 1 + 1e-9
    assert sp(r.witness.total()) == pytest.approx(r.lower)
    assert r.to_json()["witnessId"] == r.witness.witness_id()


def test_Dn_seeded_runs_do_not_decrease():
    sp = params.tp_space(2)
    r3 = params.estimate_Dn(sp, 3, SMALL)
    r4 = params.estimate_Dn(sp, 4, SMALL, seeds=[r3.witness])
    assert r4.lower >= r3.lower - 1e-12
    with pytest.raises(ValueError):
        params.estimate_Dn(sp, 0)


def test_Dn_twisted_space():
    sp = params.twisted_space(cz.kalton_peck())
    r = params.estimate_Dn(sp, 2, SMALL)
    assert r.witness.twisted
    assert r.lower >= math.sqrt(2) - 1e-9


def test_Dn_budget_saturation():
    r = params.estimate_Dn(params.tp_space(2), 3, params.DnBudget(max_evals=20))
    assert r.saturated
    assert r.evaluations <= 20


def test_separation_lemma_random_pairs():
    rng = np.random.default_rng(0)
    for om in (cz.ZERO, cz.kalton_peck(), cz.CentralizerSpec("tp-couple", p=3.0)):
        for _ in range(200):
            u1, u2 = params.random_separated_pair(rng)
            assert params.check_separation_lemma(u1, u2, om)


def test_separation_lemma_refusals():
    # v_1 and v_2 share e_1, so they are only strictly separated
    with pytest.raises(ValueError):
        params.check_separation_lemma(TwistedVector.basis(1), TwistedVector.basis(2), cz.ZERO)
    shifty = cz.custom(lambda v: np.roll(v, 1), support_preserving=False)
    with pytest.raises(ValueError):
        params.check_separation_lemma(TwistedVector.basis(1), TwistedVector.basis(4), shifty)


def test_separation_fails_for_hidden_support_leak():
    # a map declared support preserving but leaking mass is caught by the check
    leak = cz.custom(lambda v: v + np.roll(v, 2), support_preserving=True)
    u1 = TwistedVector.basis(2)     # y = e_1, Omega(y) reaches e_3
    u2 = TwistedVector.basis(5)     # x = e_3
    assert not params.check_separation_lemma(u1, u2, leak)


def test_growth_probe():
    rows = params.omega_growth_probe(cz.kalton_peck(), [1, 4, 9])
    assert [r["value"] for r in rows] == pytest.approx([0, math.log(2), math.log(3)])
    assert all(r["rho"] == 1 for r in rows)
    assert params.omega_growth_probe(cz.ZERO, [3])[0]["value"] == 0
    with pytest.raises(ValueError):
        params.omega_growth_probe(cz.ZERO, [4, 2])


def test_basis_equivalence_zero():
    r = params.basis_equivalence_constants(8, cz.ZERO, samples=100)
    # ||x|| + ||y|| against ||(x, y)||_2 lies in [1, sqrt 2]
    assert r.c_low == pytest.approx(1.0)
    assert r.c_high == pytest.approx(math.sqrt(2))
    assert r.L == 0


def test_basis_equivalence_kalton_peck():
    om = cz.kalton_peck()
    r = params.basis_equivalence_constants(8, om, samples=100, seed=3)
    assert r.L >= math.log(2) - 1e-12
    assert r.c_high == pytest.approx(math.sqrt(1 + (r.L + 1) ** 2), rel=1e-9)
    assert r.c_low == pytest.approx(1 / math.sqrt(1 + r.L ** 2), rel=1e-9)
    # the stored extremes are genuine
    norm = params._twisted_norm(om)
    assert norm(r.a_high) / np.linalg.norm(r.a_high) == pytest.approx(r.c_high)
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = rng.normal(size=8)
        q = norm(a) / np.linalg.norm(a)
        assert r.c_low - 1e-9 <= q <= r.c_high + 1e-9


def test_commutator_gap():
    e = lambda j: CoeffVector.unit(j, "float")
    single = params.commutator_gap(params.BlockSequence((e(2),)), cz.kalton_peck(), SMALL)
    assert single.gap == 0
    three = params.commutator_gap(params.BlockSequence((e(1), e(3), e(5))), cz.kalton_peck(), SMALL)
    # Omega(1_3) - 0 = sqrt 3 log sqrt 3
    assert three.gap == pytest.approx(math.sqrt(3) * math.log(math.sqrt(3)))
    assert three.within()
    with pytest.raises(ValueError):
        params.commutator_gap(params.BlockSequence((TwistedVector.basis(1),)), cz.ZERO)


def test_report_row():
    seq = params.BlockSequence((CoeffVector.unit(1, "float"),))
    row = params.report_row("D_n[l2]", 1, 1.0, seq, SMALL, 0)
    assert set(row) == {"parameter", "n", "estimate", "witnessId", "budget", "seed"}
    assert row["budget"]["maxEvals"] == 400
