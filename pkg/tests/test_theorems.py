import math
import random
from fractions import Fraction

import numpy as np
import pytest

from dioph import theorems as th
from dioph.algebraic import ONE, AlgebraicNumber, an, sign, to_float
from dioph.polyroots import NotSquareFree, Polynomial

F = Fraction


def test_f_function_examples():
    assert th.f_function("F1", (1, 1)) == 2
    assert th.f_function("F0", (0, 0)) == 0.25
    assert th.f_function("F3", (0, 0, 0, 0)) == 0
    assert th.f_function("F1", (1, 1), exact=True) == an(2)
    assert th.f_function("F3", (0, 2, 2, 0), exact=True) == an(3584, -1600)
    with pytest.raises(th.ArityMismatch):
        th.f_function("F2", (1, 2))
    with pytest.raises(th.ArityMismatch):
        th.f_function("F0", (1, 2, 3), exact=True)
    with pytest.raises(ValueError):
        th.f_function("F9", (1, 2))


def test_exact_and_float_agree():
    rng = np.random.default_rng(0)
    for which in th.F_NAMES:
        for _ in range(20):
            pt = [F(int(v), 64) for v in rng.integers(-64, 64, size=th.F_ARITY[which])]
            ex = to_float(th.f_function(which, pt, exact=True))
            assert th.f_function(which, [float(v) for v in pt]) == pytest.approx(ex, rel=1e-13)


@pytest.mark.parametrize("which", th.F_NAMES)
def test_sign_symmetries(which):
    rng = np.random.default_rng(1)
    k = th.F_ARITY[which]
    p = rng.uniform(-1, 1, size=(1000, k))
    base = th.f_function(which, p)
    for flips in np.array(np.meshgrid(*[[-1.0, 1.0]] * k)).T.reshape(-1, k):
        assert np.allclose(th.f_function(which, p * flips), base, rtol=1e-14, atol=0)


def test_closed_form_values():
    assert th.CLOSED_FORMS["F0"][0] == an(F(9, 4))
    assert th.CLOSED_FORMS["F2"][0] == F(64, 27) * an(-9, 5)
    assert th.CLOSED_FORMS["F3"][0] == 64 * an(56, -25)
    assert to_float(th.CLOSED_FORMS["F2"][0]) == pytest.approx(5.1682, abs=1e-4)
    assert to_float(th.CLOSED_FORMS["F3"][0]) == pytest.approx(6.2913, abs=1e-4)


@pytest.mark.parametrize("which", th.F_NAMES)
def test_closed_form_max_verified(which):
    res = th.closed_form_max(which)
    assert res.verified, res.certificates
    assert res.oracle_gap <= 1e-5
    assert res.oracle_value <= res.float_value + 1e-9


def test_oracle_examples():
    assert th.oracle_max("F1", 0.01)[0] == pytest.approx(2.0, abs=1e-6)
    assert th.oracle_max("F0", 0.01)[0] == pytest.approx(2.25, abs=1e-6)
    assert th.oracle_max("F3", 0.02)[0] == pytest.approx(6.29126, abs=1e-4)
    v, x = th.oracle_max("F2", 0.05, polish_starts=4)
    assert th.in_domain(x) and v <= to_float(th.CLOSED_FORMS["F2"][0]) + 1e-9
    with pytest.raises(ValueError):
        th.oracle_max("F0", 0.0)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_verify_theorem_V(n):
    res = th.verify_theorem_V(n)
    assert res.verified, res.certificates
    assert res.certificates["det_exact"]
    assert res.certificates["prefactor_times_max_is_one"]
    assert 1 - 1e-4 <= res.certificates["max_f"] <= 1 + 1e-6
    assert res.oracle_gap < 1e-6


def test_theorem_values():
    assert th.verify_theorem_V(3).exact_value == an(2)
    assert th.verify_theorem_V(4).exact_value == an(F(16, 9))
    v5 = th.verify_theorem_V(5)
    assert isinstance(v5.exact_value, th.SqrtOf)
    assert v5.exact_value.square == F(27, 88) * an(9, 5)
    assert v5.float_value == pytest.approx(2.48831, abs=1e-5)
    assert th.verify_theorem_V(6).exact_value == F(1, 11) * an(9, 5)
    m4 = th.theorem_matrix(4)
    assert m4.diag == pytest.approx(math.sqrt(2 / 3), rel=1e-15)


def test_v5_constants_identification():
    # the F2 coefficients are 1/beta^2 and 1/gamma^2 of the n = 5 matrix
    data = th._theorem_data(5)
    beta_sq, bg_sq = data.ratio_sq
    assert beta_sq.inv() == th.T1
    gamma_sq = bg_sq / beta_sq
    assert gamma_sq.inv() * 27 == an(26, 10)
    assert gamma_sq.inv() == th.T2


def test_f2_facts():
    steps = []
    assert th.verify_f2_interval_facts(steps=steps)
    assert steps == list(th.F2_STEPS)


def test_f3_facts():
    steps = []
    assert th.verify_f3_interval_facts(steps=steps)
    assert steps == list(th.F3_STEPS)


def test_f2_mutation_t2():
    with pytest.raises(th.StepFailed) as exc:
        th.verify_f2_interval_facts(t2=th.T2 + F(1, 1000))
    assert exc.value.step.startswith("f2.")


def test_f2_mutation_t1():
    with pytest.raises(th.StepFailed):
        th.verify_f2_interval_facts(t1=th.T1 + F(1, 1000))


def test_f2_mutation_quartic_constant():
    q = th.quintic_from_constants().derivative()
    broken = Polynomial([0] + list(q.coeffs[1:]))
    with pytest.raises((th.StepFailed, NotSquareFree)):
        th.verify_f2_interval_facts(quartic=broken)


def test_f3_mutation():
    with pytest.raises(th.StepFailed) as exc:
        th.verify_f3_interval_facts(t=th.T_SMALL + F(1, 1000))
    assert exc.value.step == "f3.boundary"


def test_quintic_and_octic():
    assert th.quintic_from_constants() == th.QUINTIC_DISPLAYED
    assert th.quintic_from_elimination() == th.QUINTIC_DISPLAYED
    assert th.octic_from_constants() == th.octic_from_elimination()
    assert th.sextic_from_constants() == th.SEXTIC_DISPLAYED


def test_interval_arithmetic():
    a = th.Interval.of(-1, 2)
    b = th.Interval.of(3, 4)
    assert (a * b) == th.Interval(an(-4), an(8))
    assert a.sq() == th.Interval(an(0), an(4))
    assert (a - b) == th.Interval(an(-5), an(-1))
    assert (2 - a) == th.Interval(an(0), an(3))
    assert th.Interval.of(-3, -2).sq() == th.Interval(an(4), an(9))
    assert a.mag() == an(2)
    with pytest.raises(ValueError):
        th.Interval.of(2, 1)


def test_ledger_all_hold():
    entries = th.sign_ledger()
    assert len(entries) >= 30
    assert len({e.key for e in entries}) == len(entries)
    assert all(th.replay_ledger(entries).values())


def test_ledger_quoted_examples():
    byname = {e.key: e for e in th.sign_ledger()}
    e = byname["f3.F0(0)"]
    assert (e.value("a"), e.value("b")) == (103, 45) and e.rel == ">"
    e = byname["f3.case2.436"]
    assert (e.value("a"), e.value("b")) == (436, 195) and e.rel == "<"
    e = byname["f2.final.715"]
    assert (e.value("a"), e.value("b")) == (715, 320) and e.rel == "<"
    assert sign(an(-715, 320)) == 1


def test_ledger_every_mutation_detected():
    entries = th.sign_ledger()
    byname = {e.key: e for e in entries}
    for key, name in th.mutation_candidates(entries):
        for delta in (1, -1):
            assert not th.check_entry(byname[key].mutated(name, delta)), (key, name, delta)


@pytest.mark.parametrize("n,expected", [(3, [1.0, 1.0]), (4, [0.81649, 1.15469]), (5, [0.67958, 1.13157, 0.84550]), (6, [0.62510, 1.04085])])
def test_inverse_systems(n, expected):
    sol = th.solve_inverse_system(n, noise=1e-3, seed=n)
    # tabulated values are truncated, not rounded, to five decimals
    assert sol.params == pytest.approx(expected, abs=2e-5)
    assert max(abs(r) for r in sol.constraint_residuals) < 1e-10
    assert sol.objective == pytest.approx(th.exact_float(th.BASE_VOLUMES[n]), abs=1e-10)


def test_inverse_system_exact_n3():
    sol = th.solve_inverse_system(3, noise=0.05, seed=11)
    assert sol.params == pytest.approx([1.0, 1.0], abs=1e-12)
    assert sol.objective == pytest.approx(2.0, abs=1e-12)


def test_inverse_system_failure():
    with pytest.raises(th.NoConvergence):
        th.solve_inverse_system(4, start=(0.0, 0.0), noise=0.0, max_iter=5)
    with pytest.raises(ValueError):
        th.solve_inverse_system(7)


def test_compose_examples():
    v3 = th.verify_theorem_V(3)
    v4 = th.verify_theorem_V(4)
    assert th.compose_volume_bound(v3, v4).exact_value == an(F(32, 9))
    assert th.compose_volume_bound(v4, v4).exact_value == an(F(256, 81))
    assert th.compose_volume_bound(v4, ONE).exact_value == v4.exact_value
    v5 = th.compose_volume_bound(th.BASE_VOLUMES[5], th.BASE_VOLUMES[4])
    assert isinstance(v5.exact_value, th.SqrtOf)
    assert v5.float_value == pytest.approx(2.488311715351467 * 16 / 9, rel=1e-14)


def test_general_bound_examples():
    assert th.general_V_bound(7).exact_value == an(F(32, 9))
    assert th.general_V_bound(3).exact_value == an(2)
    assert th.general_V_bound(10).exact_value == F(1, 11) * an(9, 5) * F(16, 9)
    for n in range(3, 7):
        assert th.exact_square(th.general_V_bound(n).exact_value) == th.exact_square(th.verify_theorem_V(n).exact_value)
    with pytest.raises(ValueError):
        th.general_V_bound(2)


@pytest.mark.parametrize("n", range(3, 13))
def test_general_bound_dominates_decompositions(n):
    g = th.general_V_bound(n).float_value
    decomps = th.valid_decompositions(n)
    assert decomps
    for d in decomps:
        assert sum(d) == n and sum(p % 2 for p in d) <= 1
        assert g >= th.exact_float(th.decomposition_volume(d)) - 1e-12


def test_result_json():
    d = th.verify_theorem_V(5).to_json()
    assert d["name"] == "V5" and d["exact_value"].startswith("sqrt(")
