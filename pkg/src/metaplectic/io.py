"""File formats: matrices (JSON/CSV), wavefunctions (CSV/binary), plot CSVs."""

from __future__ import annotations

import io
import json
import math
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .symplectic import TOL_SYM, SymplecticMatrix
from .wavefunction import Axis, SampledWavefunction


def _fmt(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_atomic(path, data) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- matrices ---------------------------------------------------------------

def matrix_to_dict(S) -> dict:
    M = S.entries if isinstance(S, SymplecticMatrix) else np.asarray(S, dtype=float)
    return {"n": M.shape[0] // 2, "rows": M.tolist()}


def matrix_to_json(S) -> str:
    return dumps(matrix_to_dict(S)) + "\n"


def matrix_from_dict(d: dict, tol: float = TOL_SYM) -> SymplecticMatrix:
    try:
        rows = np.array(d["rows"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad matrix record: {exc}") from exc
    if "n" in d and rows.shape != (2 * int(d["n"]), 2 * int(d["n"])):
        raise InvalidInputError(f"matrix rows have shape {rows.shape}, expected n={d['n']}")
    return SymplecticMatrix(rows, tol=tol)


def read_matrix(path, tol: float = TOL_SYM) -> SymplecticMatrix:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        try:
            rows = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse matrix CSV {path}: {exc}") from exc
        return SymplecticMatrix(rows, tol=tol)
    try:
        return matrix_from_dict(json.loads(path.read_text()), tol)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"cannot parse matrix JSON {path}: {exc}") from exc


def matrix_to_csv(S) -> str:
    M = S.entries if isinstance(S, SymplecticMatrix) else np.asarray(S)
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in M)


# -- wavefunctions ----------------------------------------------------------

def wavefunction_to_csv(psi: SampledWavefunction) -> str:
    buf = io.StringIO()
    cols = ["x"] if psi.n == 1 else ["x1", "x2"]
    buf.write(",".join(cols + ["re", "im"]) + "\n")
    pts = psi.points()
    vals = psi.values.ravel()
    for xs, v in zip(pts, vals):
        buf.write(",".join(_fmt(x) for x in xs) + f",{_fmt(v.real)},{_fmt(v.imag)}\n")
    return buf.getvalue()


def _axis_from_samples(xs: np.ndarray) -> Axis:
    xs = np.unique(xs)
    if len(xs) < 2:
        raise InvalidInputError("grid needs at least two distinct points")
    dx = (xs[-1] - xs[0]) / (len(xs) - 1)
    if np.max(np.abs(np.diff(xs) - dx)) > 1e-9 * max(1.0, abs(dx)):
        raise InvalidInputError("grid is not uniform")
    return Axis(float(xs[0]), float(dx), len(xs))


def wavefunction_from_csv(text: str, hbar: float = 1.0) -> SampledWavefunction:
    lines = text.strip().splitlines()
    header = [h.strip() for h in lines[0].split(",")]
    if header not in (["x", "re", "im"], ["x1", "x2", "re", "im"]):
        raise InvalidInputError(f"unexpected wavefunction CSV header {header}")
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    n = len(header) - 2
    axes = tuple(_axis_from_samples(data[:, i]) for i in range(n))
    values = data[:, n] + 1j * data[:, n + 1]
    return SampledWavefunction(axes, values.reshape([ax.N for ax in axes]), hbar)


def wavefunction_to_bytes(psi: SampledWavefunction) -> bytes:
    """Little-endian: u32 n, u32 N per axis, (f64 x0, f64 dx) per axis, f64 hbar, then re/im pairs."""
    head = struct.pack("<I", psi.n)
    head += struct.pack(f"<{psi.n}I", *[ax.N for ax in psi.axes])
    for ax in psi.axes:
        head += struct.pack("<dd", ax.x0, ax.dx)
    head += struct.pack("<d", psi.hbar)
    body = np.empty(2 * psi.values.size, dtype="<f8")
    body[0::2] = psi.values.real.ravel()
    body[1::2] = psi.values.imag.ravel()
    return head + body.tobytes()


def wavefunction_from_bytes(data: bytes) -> SampledWavefunction:
    try:
        (n,) = struct.unpack_from("<I", data, 0)
        off = 4
        Ns = struct.unpack_from(f"<{n}I", data, off)
        off += 4 * n
        axes = []
        for N in Ns:
            x0, dx = struct.unpack_from("<dd", data, off)
            off += 16
            axes.append(Axis(x0, dx, N))
        (hbar,) = struct.unpack_from("<d", data, off)
        off += 8
    except struct.error as exc:
        raise InvalidInputError(f"truncated snapshot header: {exc}") from exc
    count = int(np.prod(Ns))
    body = np.frombuffer(data, dtype="<f8", offset=off)
    if body.size != 2 * count:
        raise InvalidInputError(f"snapshot body has {body.size} doubles, expected {2 * count}")
    values = (body[0::2] + 1j * body[1::2]).reshape(Ns)
    return SampledWavefunction(tuple(axes), values, hbar)


def read_wavefunction(path, hbar: float = 1.0) -> SampledWavefunction:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return wavefunction_from_csv(path.read_text(), hbar)
    return wavefunction_from_bytes(path.read_bytes())


# -- plot data --------------------------------------------------------------

PLOT_COLUMNS = {
    "profile": "x,abs2,re,im (n=1) or x1,x2,abs2,re,im (n=2)",
    "profiles_index": "index,t,file,l2_norm",
    "ratios": "index,label,ratio,inner_factor_ratio,outer_factor_ratio",
    "series": "t,norm",
    "errors": "t,l2_error,phase",
}


def _profile_csv(psi: SampledWavefunction) -> str:
    cols = ["x"] if psi.n == 1 else ["x1", "x2"]
    lines = [",".join(cols + ["abs2", "re", "im"])]
    for xs, v in zip(psi.points(), psi.values.ravel()):
        lines.append(",".join(_fmt(x) for x in xs)
                     + f",{_fmt(abs(v) ** 2)},{_fmt(v.real)},{_fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def plot_data(result) -> dict[str, str]:
    """Flat CSV views of a module result, keyed by file name."""
    from .amalgam import NormEstimateReport
    from .schrodinger import ComparisonReport, PropagationResult

    if isinstance(result, PropagationResult):
        files = {}
        index = ["index,t,file,l2_norm"]
        for i, (t, psi) in enumerate(result.snapshots):
            name = f"profile_{i:03d}.csv"
            files[name] = _profile_csv(psi)
            index.append(f"{i},{_fmt(t)},{name},{_fmt(psi.l2_norm())}")
        files["profiles_index.csv"] = "\n".join(index) + "\n"
        return files
    if isinstance(result, NormEstimateReport):
        lines = ["index,label,ratio,inner_factor_ratio,outer_factor_ratio"]
        inner = result.factor_ratios.get("inner", [])
        outer = result.factor_ratios.get("outer", [])
        for i, (label, r) in enumerate(zip(result.labels, result.ratios)):
            fi = _fmt(inner[i]) if i < len(inner) else ""
            fo = _fmt(outer[i]) if i < len(outer) else ""
            lines.append(f"{i},{json.dumps(label)},{_fmt(r)},{fi},{fo}")
        return {"ratios.csv": "\n".join(lines) + "\n"}
    if isinstance(result, ComparisonReport):
        lines = ["t,l2_error,phase"] + [f"{_fmt(t)},{_fmt(e)},{_fmt(p)}" for t, e, p in result.rows]
        return {"errors.csv": "\n".join(lines) + "\n"}
    if isinstance(result, (list, tuple)):
        lines = ["t,norm"] + [f"{_fmt(t)},{_fmt(v)}" for t, v in result]
        return {"series.csv": "\n".join(lines) + "\n"}
    raise TypeError(f"no plot view for {type(result).__name__}")


def emit_plot_data(result, out_dir) -> list[Path]:
    files = plot_data(result)
    paths = []
    for name, text in files.items():
        write_atomic(Path(out_dir) / name, text)
        paths.append(Path(out_dir) / name)
    return paths
