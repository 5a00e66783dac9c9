import numpy as np
import pytest

from perron_tree.spectral import Kind, classify, lambda1
from perron_tree.tree import random_tree
from perron_tree.verify import (
    check_block_signs,
    check_corollary,
    check_monotonicity,
    check_valuation,
    check_valuation_g,
    ensemble_crosscheck,
    run_checks,
    run_trial,
    sign_pattern,
    trial_plan,
)

from .conftest import path, star


def site(verdict, v):
    return next(s for s in verdict.sites if s["vertex"] == v)


def test_sign_pattern():
    sp = sign_pattern([1.0, 1e-12, -0.5, 0.0])
    assert list(sp.signs) == [1, 0, -1, 0]


class TestValuation:
    def test_p3(self):
        t, f = path(3), np.array([1.0, 0.0, -1.0])
        for v in (check_valuation(t, f, 1.0), check_valuation_g(t, f)):
            assert v.passed
            assert site(v, 1)["case"] == "3"

    def test_p4(self):
        t = path(4)
        r = lambda1(t)
        f = r.f if r.f[1] < 0 else -r.f
        v = check_valuation(t, f, r.lambda1)
        assert v.passed
        # f(2) < 0: the negated first case, {3, 4} the opposite component
        assert site(v, 1)["case"] == "1 (negated)"
        assert f[0] < f[1] < 0 < f[2] < f[3]
        assert check_valuation_g(t, r.g).passed

    def test_star_characterization(self):
        t = star(3)
        g = np.array([0.0, 1.0, -1.0, 0.0])
        assert site(check_valuation(t, g), 0)["case"] == "3"
        assert check_valuation_g(t, g).passed

    def test_detects_bad_vector(self):
        # positive on both sides of a negative cut vertex
        v = check_valuation(path(3), np.array([1.0, -1.0, 1.0]))
        assert not v.passed and v.counterexample["vertex"] == 1

    def test_strict_clause(self):
        # right sign pattern, but f does not grow away from the sign change
        v = check_valuation(path(4), np.array([-1.0, -2.0, 1.0, 2.0]))
        assert not v.passed
        assert check_valuation_g(path(4), np.array([-1.0, -2.0, 1.0, 2.0])).passed


class TestMonotonicity:
    def test_p3(self):
        v = check_monotonicity(path(3), np.array([1.0, 0.0, -1.0]))
        assert v.passed and v.case == "1" and v.details["z"] == 1

    def test_p4(self):
        r = lambda1(path(4))
        v = check_monotonicity(path(4), r.f)
        assert v.passed and v.case == "2" and v.details["mixed_block"] == (1, 2)
        assert np.all(np.diff(r.f) > 0) or np.all(np.diff(r.f) < 0)

    def test_p5(self):
        r = lambda1(path(5))
        v = check_monotonicity(path(5), r.f)
        assert v.passed and v.case == "1" and v.details["z"] == 2
        f = r.f if r.f[3] > 0 else -r.f
        assert 0 < f[3] < f[4] and f[0] < f[1] < 0

    def test_detects_non_monotone(self):
        # only articulation values count: a leaf may break the pattern
        assert check_monotonicity(path(5), np.array([-1.0, -2.0, 0.0, 2.0, 1.0])).passed
        v = check_monotonicity(path(7), np.array([-3.0, -2.0, -1.0, 0.0, 2.0, 1.0, 3.0]))
        assert not v.passed and v.case == "1"

    def test_two_mixed_edges(self):
        v = check_monotonicity(path(4), np.array([1.0, -1.0, 1.0, 2.0]))
        assert not v.passed


class TestBlockSigns:
    def test_p4(self):
        v = check_block_signs(path(4), lambda1(path(4)).g)
        assert v.passed and v.case == "2"
        assert v.details["counts"] == {"mixed": 1, "negative": 1, "positive": 1}

    def test_p3(self):
        v = check_block_signs(path(3), np.array([1.0, 0.0, -1.0]))
        assert v.passed and v.case == "1" and v.details["z"] == 1
        assert "mixed" not in v.details["counts"]

    def test_star(self):
        v = check_block_signs(star(3), np.array([0.0, 1.0, -1.0, 0.0]))
        assert v.passed and v.details["counts"] == {"negative": 1, "positive": 1, "zero": 1}

    def test_two_mixed_blocks(self):
        assert not check_block_signs(path(4), np.array([1.0, -1.0, 1.0, 2.0])).passed


class TestRunChecks:
    @pytest.mark.parametrize("t", [path(2), path(3), path(4), path(5), star(3), star(7)])
    def test_fixtures(self, t):
        verdicts = run_checks(t, lambda1(t))
        assert all(v.passed for v in verdicts.values()), {
            k: v.to_dict() for k, v in verdicts.items() if not v.passed}

    def test_random(self):
        for seed in range(30):
            t = random_tree(4 + seed, seed)
            assert all(v.passed for v in run_checks(t, lambda1(t)).values())

    def test_corollary_fails_on_wrong_site(self):
        from perron_tree.spectral import Classification
        # at vertex 2 the Perron branch points away from vertex 1
        fake = Classification(Kind.TYPE1, (0,), ())
        assert not check_corollary(path(4), fake).passed
        assert check_corollary(path(4), classify(path(4))).passed

    def test_verdict_dict(self):
        d = check_valuation(path(3), np.array([1.0, 0.0, -1.0])).to_dict()
        assert d["theorem"] == "valuation_f" and d["passed"] is True


class TestEnsemble:
    def test_p2_only(self):
        s = ensemble_crosscheck(2, 2, 10, 5)
        assert s.passed == 10 and s.type_counts == {"Type2": 10}
        assert s.max_lambda_dev <= 1e-10

    def test_p3_only(self):
        s = ensemble_crosscheck(3, 3, 10, 5)
        assert s.passed == 10 and s.type_counts == {"Type1": 10}

    def test_plan_is_deterministic(self):
        assert trial_plan(2, 60, 20, 7) == trial_plan(2, 60, 20, 7)
        sizes = [n for n, _ in trial_plan(2, 60, 200, 7)]
        assert min(sizes) >= 2 and max(sizes) <= 60

    def test_trial(self):
        r = run_trial(12, 3)
        assert r.passed and r.classification_agrees and r.spectrum_ok

    def test_workers_agree(self):
        a = ensemble_crosscheck(2, 15, 12, 3, workers=1).to_dict()
        b = ensemble_crosscheck(2, 15, 12, 3, workers=2).to_dict()
        assert a == b
