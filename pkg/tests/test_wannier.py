import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bzdos import reference
from bzdos.models import HermiticityViolation, TightBindingModel
from bzdos.wannier import (CountMismatch, ParseError, from_model, parse_hr, read_hr,
                           to_model, write_hr)


def chain_text():
    return write_hr(from_model(reference.make_chain(1.0).model))


def two_orbital_model():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    onsite = np.array([[0.3, 0.1 - 0.2j], [0.1 + 0.2j, -0.4]])
    return TightBindingModel.from_terms({(0, 0, 0): onsite, (1, 0, 0): A, (0, 1, 1): B})


class TestParse:
    def test_chain_file(self):
        hr = parse_hr(chain_text())
        assert hr.num_wann == 1 and hr.nrpts == 3
        assert sorted(map(tuple, hr.R)) == [(-1, 0, 0), (0, 0, 0), (1, 0, 0)]

    def test_sources(self, tmp_path):
        text = chain_text()
        path = tmp_path / "chain_hr.dat"
        path.write_text(text)
        for src in (text, io.StringIO(text), path):
            assert parse_hr(src).nrpts == 3
        assert read_hr(str(path)).nrpts == 3

    def test_fortran_exponents(self):
        text = "c\n1\n1\n1\n 0 0 0 1 1 1.5D+00 -2.0d-01\n"
        hr = parse_hr(text)
        assert hr.H[0, 0, 0] == 1.5 - 0.2j

    def test_many_degeneracy_lines(self):
        R = [(i, 0, 0) for i in range(-10, 11)]
        degs = list(range(1, 22))
        lines = ["big", "1", str(len(R))]
        lines += [" ".join(map(str, degs[s:s + 15])) for s in range(0, len(degs), 15)]
        lines += [f"{r[0]} 0 0 1 1 {float(r[0])} 0.0" for r in R]
        hr = parse_hr("\n".join(lines) + "\n")
        assert list(hr.degeneracies) == degs

    def test_empty_file(self):
        with pytest.raises(ParseError) as exc:
            parse_hr("")
        assert exc.value.line == 2

    def test_too_many_degeneracies(self):
        text = "c\n1\n2\n1 1 1\n 0 0 0 1 1 0.0 0.0\n 1 0 0 1 1 1.0 0.0\n"
        with pytest.raises(CountMismatch):
            parse_hr(text)

    def test_missing_record(self):
        text = "c\n2\n1\n1\n 0 0 0 1 1 0.0 0.0\n 0 0 0 2 1 0.0 0.0\n 0 0 0 1 2 0.0 0.0\n"
        with pytest.raises(CountMismatch):
            parse_hr(text)

    @pytest.mark.parametrize("record,line", [
        (" 0 0 0 1 1 abc 0.0", 5),
        (" 0 0 x 1 1 0.0 0.0", 5),
        (" 0 0 0 1 1 0.0", 5),
        (" 0 0 0 2 1 0.0 0.0", 5),
    ])
    def test_bad_tokens(self, record, line):
        with pytest.raises(ParseError) as exc:
            parse_hr(f"c\n1\n1\n1\n{record}\n")
        assert exc.value.line == line
        assert f"line {line}" in str(exc.value)

    def test_duplicate_record(self):
        text = "c\n1\n2\n1 1\n 0 0 0 1 1 0.0 0.0\n 0 0 0 1 1 0.0 0.0\n"
        with pytest.raises(ParseError, match="duplicate"):
            parse_hr(text)

    def test_nonpositive_header(self):
        with pytest.raises(ParseError):
            parse_hr("c\n0\n1\n1\n")


class TestWrite:
    def test_rewrite_is_whitespace_normal_form(self):
        text = chain_text()
        head, rest = text.split("\n", 1)
        messy = head + "\n" + "\n".join("   ".join(line.split()) for line in rest.splitlines()) + "\n"
        again = write_hr(parse_hr(messy))
        assert again == text

    def test_stream_output(self):
        buf = io.StringIO()
        assert write_hr(parse_hr(chain_text()), buf) is None
        assert buf.getvalue() == chain_text()

    def test_exact_float_round_trip(self):
        m = two_orbital_model()
        hr = parse_hr(write_hr(from_model(m)))
        back = to_model(hr)
        assert np.array_equal(np.sort(back.R, axis=0), np.sort(m.R, axis=0))
        k = np.random.default_rng(0).uniform(-0.5, 0.5, (20, 3))
        assert np.abs(back.hamiltonian(k) - m.hamiltonian(k)).max() <= 1e-12


class TestModel:
    def test_chain_at_gamma(self):
        m = to_model(parse_hr(chain_text()))
        assert m.dim == 1
        assert m.hamiltonian(np.array([[0.0]]))[0, 0, 0].real == pytest.approx(2.0)

    def test_fermi_shift(self):
        m = to_model(parse_hr(chain_text()), fermi_shift=0.5)
        assert m.hamiltonian(np.array([[0.0]]))[0, 0, 0].real == pytest.approx(1.5)

    def test_fermi_shift_without_onsite_block(self):
        text = "c\n1\n2\n1 1\n 1 0 0 1 1 1.0 0.0\n -1 0 0 1 1 1.0 0.0\n"
        m = to_model(parse_hr(text), fermi_shift=0.25)
        assert m.hamiltonian(np.array([[0.25]]))[0, 0, 0].real == pytest.approx(-0.25)

    def test_degeneracy_halves_block(self):
        text = "c\n1\n3\n1 2 2\n 0 0 0 1 1 0.0 0.0\n 1 0 0 1 1 1.0 0.0\n -1 0 0 1 1 1.0 0.0\n"
        m = to_model(parse_hr(text))
        assert m.hamiltonian(np.array([[0.0]]))[0, 0, 0].real == pytest.approx(1.0)

    def test_strict_hermiticity(self):
        text = "c\n1\n3\n1 1 1\n 0 0 0 1 1 0.0 0.0\n 1 0 0 1 1 1.0 0.0\n -1 0 0 1 1 1.001 0.0\n"
        hr = parse_hr(text)
        with pytest.raises(HermiticityViolation):
            to_model(hr, strict=True)
        with pytest.warns(UserWarning, match="symmetrizing"):
            to_model(hr)  # lenient mode completes rather than rejects

    def test_dimension_inference(self):
        m = two_orbital_model()
        assert to_model(parse_hr(write_hr(from_model(m)))).dim == 3
        assert to_model(parse_hr(chain_text()), dim=3).dim == 3
        with pytest.raises(ValueError):
            to_model(parse_hr(write_hr(from_model(m))), dim=1)

    def test_graphene_round_trip(self, graphene):
        hr = parse_hr(write_hr(from_model(graphene.model)))
        back = to_model(hr)
        k = np.random.default_rng(2).uniform(-0.5, 0.5, (20, 2))
        assert np.abs(back.eigvals(k) - graphene.model.eigvals(k)).max() <= 1e-12


@given(st.lists(st.tuples(st.integers(-3, 3), st.floats(-5, 5), st.floats(-5, 5)),
                min_size=1, max_size=5, unique_by=lambda t: abs(t[0])))
def test_random_chains_round_trip(terms):
    model = TightBindingModel.from_terms(
        {(r,): [[complex(a, b) if r else complex(a, 0)]] for r, a, b in terms if r >= 0}
        or {(0,): [[0.0]]})
    back = to_model(parse_hr(write_hr(from_model(model))), dim=1)
    k = np.linspace(-0.5, 0.5, 20)[:, None]
    assert np.abs(back.hamiltonian(k) - model.hamiltonian(k)).max() <= 1e-12
