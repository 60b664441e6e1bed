"""
Tests for the oracle validation suite and golden-record export
"""

import json

import pytest

from app.report_generator import (
    VALIDATION_CHECKS,
    CheckResult,
    check_ratio_identity,
    checks_to_frame,
    export_golden_record,
    first_moment_cases,
    k4_pairing,
    run_validation_suite,
)


class TestValidationSuite:

    @pytest.mark.parametrize("check", VALIDATION_CHECKS, ids=lambda c: c.__name__)
    def test_check_passes(self, check):
        result = check()
        assert result.passed, f"{result.name}: max_error={result.max_error} ({result.detail})"

    def test_raising_check_is_recorded_as_failure(self):
        def broken_check():
            raise RuntimeError("boom")

        def passing_check():
            return CheckResult(name="ok", passed=True, max_error=0.0)

        results = run_validation_suite([broken_check, passing_check])
        assert [r.passed for r in results] == [False, True]
        assert results[0].name == "broken_check"
        assert results[0].detail == "boom"
        frame = checks_to_frame(results)
        assert list(frame.columns) == ["name", "passed", "max_error", "detail"]

    def test_first_moment_cases(self):
        cases = first_moment_cases(8)
        assert (2, 3) in cases and (2, 4) in cases and (1, 8) in cases
        assert (1, 3) not in cases
        assert all(n * d <= 8 and (n * d) % 2 == 0 and d >= 3 for n, d in cases)

    def test_ratio_identity_covers_every_small_pairing(self):
        result = check_ratio_identity(sampled_n6=2)
        assert result.passed
        assert result.detail.startswith("10410 enumerated pairings")


class TestGoldenRecord:

    def test_export(self, tmp_path):
        out = tmp_path / "golden" / "k4.json"
        record = export_golden_record(k4_pairing(), 0.5, str(out))
        stored = json.loads(out.read_text())
        assert stored["report"]["z_table"] == pytest.approx(record["z_table"])
        assert stored["metadata"]["params"]["n"] == 4
        assert stored["report"]["gaps"]["glauber"] == pytest.approx(record["gaps"]["glauber"])
