"""Closed-form tails, the fuzz root, and the recurrence oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balloc.analysis import (
    EffectiveLoad,
    InstabilityError,
    baseline_tail,
    effective_loads,
    fuzz_beta,
    fuzz_tail,
    fuzz_tail_recurrence,
    max_depth_estimate,
    priority_tail,
)

EQUAL_RATES = [0.95 / 3] * 3

# Expected per-priority depths at equal class rates 0.95/3 (reference grid).
PRIORITY_EXPECTED = {
    (1, 0): 0.46341, (1, 1): 0.86364, (1, 2): 6.33333,
    (2, 0): 0.34874, (2, 1): 0.56753, (2, 2): 1.98778,
    (3, 0): 0.32672, (3, 1): 0.50958, (3, 2): 1.57149,
    (4, 0): 0.31985, (4, 1): 0.48479, (4, 2): 1.39012,
}

FUZZ_ROOTS = {
    (1, 2): 1.618, (2, 2): 1.466, (10, 2): 1.184,
    (1, 3): 2.000, (2, 3): 1.696, (10, 3): 1.237,
    (1, 4): 2.302, (2, 4): 1.863, (10, 4): 1.2715,
}


def series_sum(lam: float, d: int, eps: float = 1e-12) -> float:
    """Independent oracle: directly sum lam^((d^i-1)/(d-1)) until negligible."""
    total, i = 0.0, 1
    while True:
        exponent = i if d == 1 else (d**i - 1) / (d - 1)
        term = lam**exponent
        if term < eps:
            return total
        total += term
        i += 1


class TestBaselineTail:
    def test_first_terms_for_d2(self):
        tail = baseline_tail(0.95, 2)
        assert tail.s[0] == 1.0
        assert tail.s[1] == pytest.approx(0.95, abs=1e-12)
        assert tail.s[2] == pytest.approx(0.857375, abs=1e-12)
        assert tail.s[3] == pytest.approx(0.95**7, abs=1e-12)

    def test_d1_is_geometric_with_exact_mean(self):
        tail = baseline_tail(0.95, 1)
        i = np.arange(len(tail.s))
        assert np.allclose(tail.s, 0.95**i)
        assert abs(tail.expected_depth - 0.95 / 0.05) < 1e-10

    def test_d2_expected_depth(self):
        tail = baseline_tail(0.95, 2)
        assert tail.expected_depth == pytest.approx(series_sum(0.95, 2), abs=1e-12)
        # published analytic value for this operating point
        assert abs(tail.expected_depth - 3.2136) < 1e-3

    def test_empty_fraction(self):
        assert baseline_tail(0.95, 2).empty_fraction == pytest.approx(0.05)

    def test_invalid_lambda_rejected(self):
        with pytest.raises(ValueError):
            baseline_tail(1.0, 2)

    @given(
        lam=st.floats(min_value=0.01, max_value=0.97),
        d=st.integers(min_value=1, max_value=6),
    )
    @settings(max_examples=100)
    def test_tail_shape_invariants(self, lam, d):
        tail = baseline_tail(lam, d)
        s = tail.s
        assert s[0] == 1.0
        assert (s >= 0).all() and (s <= 1).all()
        assert (np.diff(s) <= 1e-15).all()
        assert math.isfinite(tail.expected_depth)


class TestPriorityTail:
    def test_effective_loads(self):
        rhos = effective_loads(EQUAL_RATES)
        assert rhos[0] == pytest.approx(0.95 / 3)
        assert rhos[1] == pytest.approx((0.95 / 3) / (1 - 0.95 / 3))
        assert rhos[2] == pytest.approx(0.95 / 1.1)

    def test_effective_load_type(self):
        load = EffectiveLoad.from_rates([0.3, 0.3])
        assert load.rhos[0] == pytest.approx(0.3)

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_reference_grid(self, d, k):
        tail = priority_tail(EQUAL_RATES, [d] * 3, k)
        assert abs(tail.expected_depth - PRIORITY_EXPECTED[(d, k)]) < 1e-5

    def test_top_class_ignores_lower_rates(self):
        a = priority_tail([0.3, 0.3, 0.3], [2, 2, 2], 0)
        b = priority_tail([0.3, 0.05, 0.64], [2, 2, 2], 0)
        assert a.s.tolist() == b.s.tolist()

    def test_unstable_class_rejected(self):
        with pytest.raises(InstabilityError, match="class 2"):
            priority_tail([0.5, 0.3, 0.3], [2, 2, 2], 2)

    def test_overall_saturation_rejected(self):
        with pytest.raises(InstabilityError):
            effective_loads([0.6, 0.5])


class TestFuzzBeta:
    def test_golden_ratio(self):
        assert abs(fuzz_beta(1, 2) - (1 + math.sqrt(5)) / 2) < 1e-10

    def test_integer_root_case(self):
        assert abs(fuzz_beta(1, 3) - 2.0) < 1e-10

    @pytest.mark.parametrize("b,d", list(FUZZ_ROOTS))
    def test_reference_roots_to_three_decimals(self, b, d):
        beta = fuzz_beta(b, d)
        assert abs(beta - FUZZ_ROOTS[(b, d)]) < 1e-3
        residual = beta ** (b + 1) - beta**b - (d - 1)
        assert abs(residual) < 1e-10

    def test_monotone_in_b_and_d(self):
        for d in (2, 3, 4):
            betas = [fuzz_beta(b, d) for b in (1, 2, 10)]
            assert betas[0] > betas[1] > betas[2] > 1
        for b in (1, 2, 10):
            betas = [fuzz_beta(b, d) for d in (2, 3, 4)]
            assert betas[0] < betas[1] < betas[2]

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            fuzz_beta(0, 2)
        with pytest.raises(ValueError):
            fuzz_beta(1, 1)


class TestFuzzTail:
    def test_geometric_branch(self):
        tail = fuzz_tail(0.95, 2, 1)
        assert tail.s[1] == pytest.approx(0.95, abs=1e-12)
        assert tail.s[2] == pytest.approx(0.95**2, abs=1e-12)

    def test_first_term_beyond_band(self):
        beta = fuzz_beta(1, 2)
        expected = 0.95 ** (3 * beta - 1)  # (b+1+1/(d-1)) beta^(i-b-1) - 1/(d-1)
        tail = fuzz_tail(0.95, 2, 1)
        assert tail.s[3] == pytest.approx(expected, abs=1e-12)
        assert tail.s[3] == pytest.approx(0.8206, abs=1e-4)

    @pytest.mark.parametrize("b,d", [(1, 2), (2, 3), (10, 4)])
    def test_branches_agree_at_boundary(self, b, d):
        # the exponent reduces to b+1 at i = b+1, so both branches coincide
        lam = 0.9
        tail = fuzz_tail(lam, d, b)
        assert tail.s[b + 1] == pytest.approx(lam ** (b + 1), rel=1e-12)

    def test_statement_form_flag_changes_growth(self):
        proof = fuzz_tail(0.95, 2, 1)
        statement = fuzz_tail(0.95, 2, 1, statement_form=True)
        assert statement.s[3] < proof.s[3]  # beta^(i-b) decays faster

    def test_tail_monotone(self):
        s = fuzz_tail(0.95, 3, 2).s
        assert (np.diff(s) <= 1e-15).all()


class TestFuzzRecurrence:
    def test_b0_matches_baseline_term_by_term(self):
        rec = fuzz_tail_recurrence(0.95, 2, 0)
        base = baseline_tail(0.95, 2)
        width = min(len(rec.s), len(base.s))
        assert np.allclose(rec.s[:width], base.s[:width], atol=1e-12)

    def test_hand_computed_term(self):
        # s3 = lam * s2 * s1 = 0.95 * 0.9025 * 0.95
        rec = fuzz_tail_recurrence(0.95, 2, 1)
        assert rec.s[3] == pytest.approx(0.81450625, abs=1e-12)

    def test_expected_depth_reference(self):
        # independent summation of the recurrence at (0.95, d=2, b=1)
        s_prev = [1.0, 0.95]
        total = 0.95
        while True:
            i = len(s_prev)
            lagged = s_prev[i - 2] if i >= 2 else 1.0
            si = 0.95 * s_prev[-1] * lagged
            if si < 1e-12:
                break
            total += si
            s_prev.append(si)
        rec = fuzz_tail_recurrence(0.95, 2, 1)
        assert rec.expected_depth == pytest.approx(total, abs=1e-12)
        assert rec.expected_depth == pytest.approx(4.52, abs=5e-3)

    def test_exact_within_band(self):
        rec = fuzz_tail_recurrence(0.9, 3, 4)
        for i in range(1, 6):  # i <= b+1
            assert rec.s[i] == pytest.approx(0.9**i, rel=1e-12)


class TestMaxDepthEstimate:
    def test_reference_entries(self):
        rho0 = effective_loads(EQUAL_RATES)[0]
        assert max_depth_estimate(baseline_tail(rho0, 1), 1000) == 7
        assert max_depth_estimate(baseline_tail(rho0, 2), 1000) == 3

    def test_vanishing_load(self):
        assert max_depth_estimate(baseline_tail(1e-9, 2), 1000) == 1

    def test_small_n(self):
        tail = baseline_tail(0.5, 2)
        assert max_depth_estimate(tail, 1) == 1  # 1 * 0.5 < 1 already at i=1


class TestCsvExport:
    def test_header_and_scaling(self, tmp_path):
        tail = baseline_tail(0.5, 2)
        path = tmp_path / "tail.csv"
        tail.to_csv(path, n=100)
        lines = path.read_text().splitlines()
        assert lines[0] == "i,s_i,n_times_s_i"
        assert lines[1] == "0,1,100"
        assert lines[2] == "1,0.5,50"

    def test_without_n(self, tmp_path):
        path = tmp_path / "tail.csv"
        baseline_tail(0.5, 2).to_csv(path)
        assert path.read_text().splitlines()[2] == "1,0.5,"
