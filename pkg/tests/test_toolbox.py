import io
import re

import pytest

from gptrans_lib.number_crunchers import toolbox


def test_tprint_goes_to_log_stream(monkeypatch, capsys):
    stream = io.StringIO()
    monkeypatch.setattr(toolbox, "LOG_STREAM", stream)
    toolbox.tprint("audit started")
    assert re.fullmatch(r"\[\d\d-\d\d-\d{4} \d\d:\d\d:\d\d UTC\] audit started\n", stream.getvalue())
    assert capsys.readouterr().out == ""


def test_tprint_defaults_to_stdout(monkeypatch, capsys):
    monkeypatch.setattr(toolbox, "LOG_STREAM", None)
    toolbox.tprint("x", 1)
    assert capsys.readouterr().out.endswith("x 1\n")


def test_cpu_pct_to_cores(monkeypatch):
    monkeypatch.setattr(toolbox.os, "cpu_count", lambda: 8)
    assert toolbox.cpu_pct_to_cores(0.25) == 2
    assert toolbox.cpu_pct_to_cores(0.0) == 1
    assert toolbox.cpu_pct_to_cores(1.0) == 8
    with pytest.raises(ValueError):
        toolbox.cpu_pct_to_cores(1.5)


def test_relative_error():
    assert toolbox.relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert toolbox.relative_error(-1e-3, 0.0) == pytest.approx(1e-3)
