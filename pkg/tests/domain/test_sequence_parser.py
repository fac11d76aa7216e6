"""Tests for the sequence expression parser."""

import math

import pytest

from src.domain.errors import SequenceSpecError
from src.domain.sequence_parser import SEQUENCE_PRESETS, parse_sequence, tokenize


class TestTokenize:
    def test_kinds(self):
        assert tokenize("2*n ** 1.5") == [
            ("number", "2"),
            ("op", "*"),
            ("name", "n"),
            ("op", "**"),
            ("number", "1.5"),
        ]

    def test_scientific_number(self):
        assert tokenize("1e3") == [("number", "1e3")]

    def test_bad_character(self):
        with pytest.raises(SequenceSpecError):
            tokenize("n % 2")


class TestEvaluate:
    @pytest.mark.parametrize(
        "text,n,expected",
        [
            ("2", 7, 2.0),
            ("n", 7, 7.0),
            ("n+1", 3, 4.0),
            ("2*n-1", 5, 9.0),
            ("n/4", 2, 0.5),
            ("-n + 10", 3, 7.0),
            ("2^3^2", 1, 512.0),
            ("-2^2", 1, -4.0),
            ("(n+1)*(n-1)", 4, 15.0),
            ("floor(sqrt(n))", 10, 3.0),
            ("ceil(n/3)", 4, 2.0),
        ],
    )
    def test_arithmetic(self, text, n, expected):
        assert parse_sequence(text).evaluate(n) == pytest.approx(expected)

    def test_log_and_power(self):
        value = parse_sequence("n*log(n)^2").evaluate(10)
        assert value == pytest.approx(10 * math.log(10) ** 2)

    def test_domain_error_is_wrapped(self):
        with pytest.raises(SequenceSpecError):
            parse_sequence("log(n-1)").evaluate(1)

    def test_division_by_zero_is_wrapped(self):
        with pytest.raises(SequenceSpecError):
            parse_sequence("1/(n-2)").evaluate(2)

    def test_positive(self):
        seq = parse_sequence("n-3")
        assert seq.positive(5) == 2.0
        with pytest.raises(SequenceSpecError):
            seq.positive(3)


class TestParse:
    def test_constant_detection(self):
        assert parse_sequence("2*3").is_constant
        assert parse_sequence(" 0.5 ").is_constant
        assert not parse_sequence("sqrt(n)").is_constant

    def test_text_is_stripped(self):
        assert parse_sequence("  n + 1 ").text == "n + 1"

    def test_numbers_are_accepted(self):
        assert parse_sequence(2).evaluate(9) == 2.0

    @pytest.mark.parametrize("name", sorted(SEQUENCE_PRESETS))
    def test_presets(self, name):
        seq = parse_sequence(name)
        assert seq.preset == name
        assert seq.text == SEQUENCE_PRESETS[name]
        assert seq.evaluate(16) > 0

    @pytest.mark.parametrize("text", ["", "   ", "n +", "(n", "n)", "exp(n)", "m", "2 3"])
    def test_malformed(self, text):
        with pytest.raises(SequenceSpecError):
            parse_sequence(text)
