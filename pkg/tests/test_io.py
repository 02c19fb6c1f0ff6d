import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasedecomp.bilinear import BilinearTensor, field_tensor
from phasedecomp.io import (
    FormatError,
    format_bil,
    format_cpd,
    format_phase,
    format_war,
    parse_bil,
    parse_cpd,
    parse_phase,
    parse_war,
    read_file,
)
from phasedecomp.phasepoly import PhasePolynomial
from phasedecomp.waring import GateSynthesisMatrix

from strategies import THICK, THICK_RANK3, decompositions


@st.composite
def phase_polys(draw):
    n = draw(st.integers(3, 8))
    idx = st.integers(0, n - 1)
    L = draw(st.sets(idx))
    Q = draw(st.sets(st.tuples(idx, idx).filter(lambda t: t[0] < t[1])))
    C = draw(st.sets(st.tuples(idx, idx, idx).filter(lambda t: t[0] < t[1] < t[2])))
    return PhasePolynomial(n, frozenset(L), frozenset(Q), frozenset(C))


@given(phase_polys())
def test_phase_roundtrip(p):
    assert parse_phase(format_phase(p)) == p


@given(decompositions())
def test_cpd_roundtrip(d):
    text = format_cpd(d)
    assert parse_cpd(text).key() == d.key()
    assert format_cpd(parse_cpd(text)) == text


@given(st.integers(1, 6))
def test_bil_roundtrip(p):
    t = field_tensor(p)
    assert parse_bil(format_bil(t)) == t


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, (1 << n) - 1), max_size=10))))
def test_war_roundtrip(case):
    n, rows = case
    a = GateSynthesisMatrix(n, tuple(rows))
    assert parse_war(format_war(a)) == a


def test_cpd_fixture_text():
    text = format_cpd(THICK_RANK3)
    assert text.splitlines()[0] == "cpd 6 3"
    assert text.endswith("\n") and "\r" not in text
    assert all(len(tok) == 6 for line in text.splitlines()[1:] for tok in line.split())


def test_comments_and_blank_lines():
    text = "# thickness example\nphase 6\n\nC 0 2 4  # first\nC 0 2 5\nC 0 3 5\nC 1 2 5\nC 1 3 4\n"
    assert parse_phase(text) == THICK


@pytest.mark.parametrize(
    "parser, text",
    [
        (parse_phase, ""),
        (parse_phase, "phase x\n"),
        (parse_phase, "phase 3\nC 0 1\n"),
        (parse_phase, "phase 3\nC 0 1 5\n"),
        (parse_phase, "phase 3\nZ 0\n"),
        (parse_cpd, "cpd 3 2\n100 010 001\n"),
        (parse_cpd, "cpd 3 1\n100 010\n"),
        (parse_cpd, "cpd 3 1\n100 010 0a1\n"),
        (parse_cpd, "cpd 3 1\n100 010 110\n"),
        (parse_bil, "bilinear 2 2\n"),
        (parse_bil, "bilinear 2 2 2\n0 0 2\n"),
        (parse_war, "waring 3 1\n1111\n"),
    ],
)
def test_malformed_inputs(parser, text):
    with pytest.raises(FormatError):
        parser(text)


def test_read_file_by_extension_and_header(tmp_path):
    f = tmp_path / "t.bil"
    f.write_text(format_bil(field_tensor(2)))
    assert isinstance(read_file(f), BilinearTensor)
    g = tmp_path / "t.txt"
    g.write_text(format_phase(THICK))
    assert read_file(g) == THICK
    with pytest.raises(FormatError):
        read_file(tmp_path / "missing.cpd")
    h = tmp_path / "junk.txt"
    h.write_text("hello 1\n")
    with pytest.raises(FormatError):
        read_file(h)
