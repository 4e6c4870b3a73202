import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twistlab import centralizer as cz
from twistlab.coeff import CoeffVector
from twistlab.tsirelson import dual_norm_Tp, norm_Tp

vectors = arrays(float, st.integers(1, 10), elements=st.floats(-10, 10)).filter(
    lambda a: np.linalg.norm(a) > 1e-3)


def test_phi_kinds():
    t = np.array([0.0, 0.5, 2.0])
    assert np.allclose(cz.PhiSpec()(t), t)
    assert np.allclose(cz.PhiSpec("min", 1.0)(t), [0, 0.5, 1])
    assert np.allclose(cz.PhiSpec("power", 0.5)(t), np.sqrt(t))
    table = cz.PhiSpec("table", knots=((0, 0), (1, 2), (2, 3)))
    assert np.allclose(table([0.5, 1.5, 3.0]), [1, 2.5, 4])
    assert table.lipschitz == 2
    assert cz.PhiSpec("power", 0.5).lipschitz == math.inf
    with pytest.raises(ValueError):
        cz.PhiSpec("power", 1.5)
    with pytest.raises(ValueError):
        cz.PhiSpec("table", knots=((0, 0), (0, 1)))
    assert cz.PhiSpec.from_json(table.to_json()) == table


def test_kalton_peck_on_flat_vector():
    for n in (1, 3, 16):
        y = np.ones(n)
        assert np.allclose(cz.kalton_peck_omega(y), np.log(np.sqrt(n)) * y)


def test_kalton_peck_keeps_zeros_and_coeff_vectors():
    y = CoeffVector({2: 3.0, 5: -4.0}, "float")
    out = cz.kalton_peck_omega(y)
    assert isinstance(out, CoeffVector)
    assert out.support == [2, 5]
    assert out.entries[2] == pytest.approx(3 * math.log(5 / 3))


@settings(max_examples=50, deadline=None)
@given(vectors)
def test_explicit_p1_is_kalton_peck_2t(x):
    a = cz.omega_tp_explicit(x, 1)
    b = cz.kalton_peck_omega(x, cz.PhiSpec(scale=2.0))
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1, np.max(np.abs(a)))
    assert not np.any(cz.omega_tp_explicit(x, 2))


@settings(max_examples=50, deadline=None)
@given(vectors, st.floats(0.01, 100), st.sampled_from([1.0, 1.5, 3.0]))
def test_homogeneity(x, c, p):
    for om in (cz.kalton_peck(), cz.CentralizerSpec("tp-couple", p=p)):
        assert np.allclose(om(c * x), c * om(x), rtol=1e-9, atol=1e-9)
        assert np.allclose(om(-x), -om(x))


def test_generic_factorization_of_lp_couple_matches_formula():
    # for (l_p, l_q) the balanced optimum is w0 = r u^{2/p}, w1 = r u^{2/q}
    rng = np.random.default_rng(0)
    for p in (1.5, 3.0):
        q = p / (p - 1)
        x = rng.normal(size=5)
        fr = cz.lozanovskii_factorize(x, cz.lp_oracle(p), cz.lp_oracle(q), tol=1e-13)
        assert fr.kkt_residual <= 1e-8
        om = cz.omega_from_factorization(x, fr)
        assert np.allclose(om, cz.omega_tp_explicit(x, p), atol=1e-4)


def test_l2_couple_gives_zero():
    x = np.array([3.0, -1.0, 0.0, 2.0])
    fr = cz.lozanovskii_factorize(x, cz.lp_oracle(2), cz.lp_oracle(2))
    assert np.allclose(cz.omega_from_factorization(x, fr), 0, atol=1e-6)


def test_tp_couple_factorization_is_certified():
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.normal(size=6) * (rng.random(6) < 0.8)
        if not x.any():
            continue
        fr = cz.factorize_tp_couple(x, 2)
        r = np.linalg.norm(x)
        nz = x != 0
        assert np.allclose(fr.w0[nz] * fr.w1[nz], x[nz] ** 2)
        assert norm_Tp(fr.w0, 2) == pytest.approx(r, rel=1e-9)
        assert dual_norm_Tp(fr.w1, 2) <= fr.objective * (1 + 1e-8)
        assert fr.lower == pytest.approx(r)
        assert 0 <= fr.kkt_residual <= 1e-5 * r


def test_tp_couple_beats_explicit_candidate():
    x = np.array([0.1, 0.5, 1.0, 0.2, 0.7])
    opt = cz.factorize_tp_couple(x)
    cand = cz.explicit_tp_candidate(x)
    assert opt.objective <= cand.objective * (1 + 1e-9)


def test_factorization_spec():
    om = cz.tp_factorization(2)
    x = np.array([0.0, 1.0, -2.0, 0.5])
    out, rho = om.evaluate(x)
    assert out[0] == 0
    assert 1 <= rho <= 1 + 1e-5
    assert np.allclose(om(3 * x), 3 * out)
    assert np.allclose(om.negated()(x), -out)


def test_custom_kind():
    om = cz.custom(lambda v: v * np.tanh(v), label="tanh")
    assert om.support_preserving
    assert np.allclose(om(np.array([0.0, 1.0])), [0, math.tanh(1)])
    assert om.to_json()["label"] == "tanh"
    with pytest.raises(ValueError):
        cz.CentralizerSpec.from_json(om.to_json())
    bad = cz.custom(lambda v: np.ones(v.size + 1))
    with pytest.raises(ValueError):
        bad(np.ones(2))
    assert not cz.custom(np.roll, support_preserving=False).support_preserving
    with pytest.raises(ValueError):
        cz.CentralizerSpec("custom")


def test_spec_json_roundtrip():
    for om in (cz.ZERO, cz.kalton_peck(cz.PhiSpec("power", 0.5)), cz.tp_factorization(2),
               cz.CentralizerSpec("tp-couple", p=3.0).negated()):
        assert cz.CentralizerSpec.from_json(om.to_json()) == om
    with pytest.raises(ValueError):
        cz.CentralizerSpec("unknown")


def test_delta_estimates():
    assert cz.estimate_delta(cz.ZERO, 5, 100) == 0
    kp = cz.estimate_delta(cz.kalton_peck(), 6, 500, seed=2)
    assert 0 < kp < 10
    # deterministic, and a longer run only adds samples
    assert cz.estimate_delta(cz.kalton_peck(), 6, 500, seed=2) == kp
    assert cz.estimate_delta(cz.kalton_peck(), 6, 800, seed=2) >= kp
    with pytest.raises(ValueError):
        cz.estimate_delta(cz.ZERO, 3, 0)


def test_delta_witness_reproduces_value():
    om = cz.kalton_peck()
    r = cz.estimate_delta_report(om, 5, 300, seed=4)
    val = np.linalg.norm(om(r.a * r.x) - r.a * om(r.x)) / (np.max(np.abs(r.a)) * np.linalg.norm(r.x))
    assert val == pytest.approx(r.value)
