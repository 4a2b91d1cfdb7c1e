import pytest

from bzdos.plot import emit_plot, read_series
from bzdos.wannier import ParseError


def write(path, text):
    path.write_text(text)
    return path


def test_read_series_skips_blank_cells(tmp_path):
    p = write(tmp_path / "a.csv", "n,nevals,rel_error\n1,10,0.1\n2,20,\n\n3,30,0.001\n")
    assert read_series(p) == ([10.0, 30.0], [0.1, 0.001])


@pytest.mark.parametrize("text,line", [("", 1), ("n,nevals\n1,2\n", 1),
                                       ("nevals,rel_error\n1\n", 2),
                                       ("nevals,rel_error\n1,x\n", 2)])
def test_read_series_errors(tmp_path, text, line):
    p = write(tmp_path / "bad.csv", text)
    with pytest.raises(ParseError) as exc:
        read_series(p)
    assert exc.value.line == line


def test_svg_is_reproducible(tmp_path):
    a = write(tmp_path / "a.csv", "nevals,rel_error\n10,1e-2\n100,1e-4\n1000,0\n")
    b = write(tmp_path / "b.csv", "nevals,rel_error\n10,1e-1\n100,1e-3\n")
    out1, out2 = tmp_path / "1.svg", tmp_path / "2.svg"
    emit_plot([a, b], out1, title="demo")
    emit_plot([a, b], out2, title="demo")
    data = out1.read_bytes()
    assert data == out2.read_bytes()
    assert data.lstrip().startswith(b"<?xml") and b"<svg" in data
    assert b"demo" in data


def test_empty_series(tmp_path):
    a = write(tmp_path / "a.csv", "nevals,rel_error\n")
    emit_plot([a], tmp_path / "e.svg")
    assert (tmp_path / "e.svg").stat().st_size > 0


def test_label_count(tmp_path):
    a = write(tmp_path / "a.csv", "nevals,rel_error\n1,1\n")
    with pytest.raises(ValueError):
        emit_plot([a], tmp_path / "x.svg", labels=["one", "two"])
