import json
import struct

import numpy as np
import pytest

from metaplectic import io
from metaplectic.amalgam import NormEstimateReport, cross_estimate_experiment
from metaplectic.errors import InvalidInputError, InvalidDimensionError
from metaplectic.schrodinger import OSCILLATOR, PropagationJob, compare_results, propagate_metaplectic
from metaplectic.symplectic import SymplecticMatrix, random_symplectic
from metaplectic.wavefunction import Axis, SampledWavefunction, gaussian


def test_dumps_full_precision():
    text = io.dumps({"x": 0.1, "y": [1 / 3, 2], "inf": float("inf")})
    d = json.loads(text)
    assert d["x"] == 0.1 and d["y"][0] == 1 / 3 and d["inf"] == float("inf")
    assert "0.33333333333333331" in text


def test_matrix_json_round_trip(tmp_path):
    S = random_symplectic(2, 7)
    p = tmp_path / "m.json"
    p.write_text(io.matrix_to_json(S))
    assert np.array_equal(io.read_matrix(p).entries, S.entries)


def test_matrix_csv_round_trip(tmp_path):
    S = random_symplectic(1, 3)
    p = tmp_path / "m.csv"
    p.write_text(io.matrix_to_csv(S))
    assert np.array_equal(io.read_matrix(p).entries, S.entries)


def test_matrix_bad_inputs(tmp_path):
    with pytest.raises(InvalidInputError):
        io.matrix_from_dict({"n": 2, "rows": [[1, 0], [0, 1]]})
    with pytest.raises(InvalidInputError):
        io.matrix_from_dict({"cols": []})
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InvalidInputError):
        io.read_matrix(p)
    with pytest.raises((InvalidInputError, InvalidDimensionError)):
        io.matrix_from_dict({"rows": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})


def test_wavefunction_csv_round_trip():
    ax = Axis.symmetric(5.0, 64)
    psi = gaussian(ax, 1.0 - 0.3j, center=0.2)
    back = io.wavefunction_from_csv(io.wavefunction_to_csv(psi))
    assert np.array_equal(back.values, psi.values)
    assert back.axes[0].N == ax.N and abs(back.axes[0].dx - ax.dx) < 1e-15


def test_wavefunction_csv_2d():
    ax = Axis.symmetric(3.0, 8)
    psi = SampledWavefunction.from_function((ax, ax), lambda x, y: np.exp(-x**2 - 2j * y))
    back = io.wavefunction_from_csv(io.wavefunction_to_csv(psi))
    assert back.n == 2 and np.array_equal(back.values, psi.values)


def test_wavefunction_csv_rejects_bad_header():
    with pytest.raises(InvalidInputError):
        io.wavefunction_from_csv("t,re,im\n0,1,0\n1,1,0\n")


def test_binary_layout():
    ax = Axis(-2.0, 0.5, 8)
    psi = SampledWavefunction((ax,), np.arange(8) + 1j, hbar=0.5)
    data = io.wavefunction_to_bytes(psi)
    assert struct.unpack_from("<II", data, 0) == (1, 8)
    assert struct.unpack_from("<ddd", data, 8) == (-2.0, 0.5, 0.5)
    body = np.frombuffer(data, "<f8", offset=32)
    assert body[2] == 1.0 and body[3] == 1.0
    back = io.wavefunction_from_bytes(data)
    assert np.array_equal(back.values, psi.values) and back.hbar == 0.5


def test_binary_truncated():
    ax = Axis(-2.0, 0.5, 8)
    data = io.wavefunction_to_bytes(SampledWavefunction((ax,), np.ones(8, complex)))
    with pytest.raises(InvalidInputError):
        io.wavefunction_from_bytes(data[:-8])
    with pytest.raises(InvalidInputError):
        io.wavefunction_from_bytes(data[:6])


def test_write_atomic_leaves_no_temp(tmp_path):
    io.write_atomic(tmp_path / "sub" / "a.txt", "hi")
    assert (tmp_path / "sub" / "a.txt").read_text() == "hi"
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["a.txt"]


def test_plot_data_propagation():
    ax = Axis.symmetric(8.0, 128)
    res = propagate_metaplectic(PropagationJob(OSCILLATOR, gaussian(ax, 1.0), (0.0, 1.2)))
    files = io.plot_data(res)
    assert set(files) == {"profile_000.csv", "profile_001.csv", "profiles_index.csv"}
    assert files["profile_000.csv"].splitlines()[0] == "x,abs2,re,im"
    assert files["profiles_index.csv"].splitlines()[2].startswith("1,1.2,profile_001.csv,")


def test_plot_data_comparison_and_series():
    ax = Axis.symmetric(8.0, 128)
    res = propagate_metaplectic(PropagationJob(OSCILLATOR, gaussian(ax, 1.0), (1.2,)))
    errs = io.plot_data(compare_results(res, res))["errors.csv"].splitlines()
    assert errs[0] == "t,l2_error,phase" and len(errs) == 2
    assert io.plot_data([(0.0, 1.5)])["series.csv"] == "t,norm\n0,1.5\n"


def test_plot_data_ratios():
    ax = Axis.symmetric(12.0, 512)
    rep = cross_estimate_experiment(SymplecticMatrix.J(1), 2, 2, [gaussian(ax, 1.0)])
    lines = io.plot_data(rep)["ratios.csv"].splitlines()
    assert lines[0] == "index,label,ratio,inner_factor_ratio,outer_factor_ratio"
    assert len(lines) == 2


def test_plot_data_empty_report():
    rep = NormEstimateReport(
        SymplecticMatrix.J(1), "cross", (2, 2), (2, 2), None, [], [])
    assert io.plot_data(rep)["ratios.csv"] == "index,label,ratio,inner_factor_ratio,outer_factor_ratio\n"


def test_plot_data_unknown_type():
    with pytest.raises(TypeError):
        io.plot_data(object())
