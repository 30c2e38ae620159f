"""Command-line interface.

Usage:
    congruence-flows verify   --spec sphere.spec --out residuals.csv
    congruence-flows classify --spec sphere.spec
    congruence-flows focal    --spec obstructed.spec --out focal.csv
    congruence-flows trace    --spec sphere.spec --seed 3,-1,1 --length 1

Exit codes: 0 success, 1 tolerance failure or obstructed verdict,
2 parse/validation error, 3 singularity in the sample set.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Literal, Optional

import click
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import geometry
from .congruence import CongruenceSpec, beta, focal_points, spin_coefficients
from .errors import (
    CongruenceFlowError,
    DegenerateParameterization,
    FocalSingularity,
    LocateError,
    SingularityTooClose,
    SourceSingularity,
    SpecError,
)
from .flows import (
    TimeSignal,
    canonical_cylinder_flow,
    canonical_plane_flow,
    canonical_sphere_flow,
    divfree_rank0,
    divfree_rank1,
    divfree_rank2,
)
from .obstruction import classify, default_samples
from .polynomials import BiPoly, CurvePoly, SheetPoly
from .verify import FDConfig, sample_box, trace_streamline, verify_flow

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_SINGULAR = 0, 1, 2, 3
CSV_HEADER = ["x1", "x2", "x3", "t", "res_x1", "res_x2", "res_x3", "res_norm", "divergence"]
SINGULAR_ERRORS = (SingularityTooClose, SourceSingularity, FocalSingularity, LocateError)
DATA_DIR = Path(__file__).parent / "data"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class CongruenceDoc(_Strict):
    rank: Literal[0, 1, 2]
    F: Optional[list[tuple[int, int, float, float]]] = None
    xi: Optional[list[tuple[int, float, float]]] = None
    eta: Optional[list[tuple[int, int, float, float]]] = None
    xi0: Optional[tuple[float, float]] = None


class SignalDoc(_Strict):
    constant: float = 0.0
    poly: list[tuple[int, float]] = []
    sinusoids: list[tuple[float, float, float]] = []


class FlowDoc(_Strict):
    builder: Literal["canonical", "divfree"] = "canonical"
    H: SignalDoc = SignalDoc(constant=1.0)
    H_field: Optional[list[tuple[int, int, float, float]]] = None
    K: list[tuple[int, int, float, float]] = []
    p0: float = 0.0
    pressure_form: Literal["steady", "case_i", "case_ii", "case_iii", "candidate",
                           "rank1", "rank0", "none"] = "none"


class SamplingDoc(_Strict):
    box: tuple[tuple[float, float], tuple[float, float], tuple[float, float]] = (
        (1.0, 3.0), (1.0, 3.0), (1.0, 3.0))
    grid: tuple[int, int, int] = (5, 5, 5)
    fd_step: float = Field(1e-5, ge=1e-9, le=1e-2)
    fd_scheme: Literal["central2", "central4"] = "central2"
    times: list[float] = [0.0]
    param_box: Optional[tuple[tuple[float, float], tuple[float, float]]] = None
    param_grid: tuple[int, int] = (9, 9)

    @field_validator("grid", "param_grid")
    @classmethod
    def _positive(cls, v):
        if any(n < 1 for n in v):
            raise ValueError("grid counts must be positive")
        return v


class SpecDocument(_Strict):
    schema_version: Literal[1]
    congruence: CongruenceDoc
    flow: FlowDoc = FlowDoc()
    sampling: SamplingDoc = SamplingDoc()


def load_spec(path) -> SpecDocument:
    try:
        text = Path(path).read_text()
        return SpecDocument.model_validate(json.loads(text))
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise SpecError(str(exc)) from exc


def build_congruence(doc: CongruenceDoc) -> CongruenceSpec:
    try:
        if doc.rank == 2:
            if doc.F is None:
                raise SpecError("rank-2 congruence needs F")
            return CongruenceSpec.rank2(BiPoly([(i, j, complex(a, b)) for i, j, a, b in doc.F]))
        if doc.rank == 1:
            if doc.xi is None or doc.eta is None:
                raise SpecError("rank-1 congruence needs xi and eta")
            return CongruenceSpec.rank1(
                CurvePoly([(k, complex(a, b)) for k, a, b in doc.xi]),
                SheetPoly([(k, l, complex(a, b)) for k, l, a, b in doc.eta]))
        return CongruenceSpec.rank0(complex(*(doc.xi0 or (0.0, 0.0))))
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc


_CANONICAL_FORMS = {2: "case_ii", 1: "rank1", 0: "rank0"}


def build_flow(doc: SpecDocument):
    spec = build_congruence(doc.congruence)
    f = doc.flow
    H = TimeSignal(f.H.constant, tuple(f.H.poly), tuple(f.H.sinusoids))
    K = SheetPoly([(k, l, complex(a, b)) for k, l, a, b in f.K]) if f.K else None
    form = f.pressure_form
    if f.builder == "canonical":
        if form not in ("none", _CANONICAL_FORMS[spec.rank]):
            raise SpecError(f"canonical rank-{spec.rank} flow uses pressure form "
                            f"{_CANONICAL_FORMS[spec.rank]!r}, got {form!r}")
        if f.H_field is not None:
            raise SpecError("H_field only applies to the divfree builder")
        verdict = classify(spec)
        if not verdict.ok:
            raise SpecError(f"canonical builder needs a sphere, cylinder or plane "
                            f"congruence ({verdict.reason})")
        if verdict.verdict == "sphere":
            flow = canonical_sphere_flow(verdict.parameters["center"], H, f.p0)
        elif verdict.verdict == "cylinder":
            flow = canonical_cylinder_flow(verdict.parameters["axis_point"],
                                           verdict.parameters["axis_direction"], H, f.p0)
        else:
            flow = canonical_plane_flow(spec.xi0, H, K, f.p0)
        return flow, form
    if spec.rank == 2:
        amp = BiPoly([(i, j, complex(a, b)) for i, j, a, b in f.H_field]) if f.H_field else H
        builder = lambda pf: divfree_rank2(spec, amp, f.p0, pf)
    elif spec.rank == 1:
        builder = lambda pf: divfree_rank1(spec, H, f.p0, pf)
    else:
        builder = lambda pf: divfree_rank0(K, H, spec.xi0, f.p0, pf)
    try:
        return builder(form), form
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def fmt(x: float) -> str:
    """Shortest round-trip representation of a float."""
    return repr(float(x) + 0.0)


def frame_rotation(direction) -> np.ndarray:
    """Rotation taking ``direction`` to the north pole ``(0, 0, 1)``.

    Useful for re-expressing inputs whose lines point at the south pole,
    which the single stereographic chart cannot represent.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    north = np.array([0.0, 0.0, 1.0])
    axis = np.cross(d, north)
    s, c = np.linalg.norm(axis), float(np.dot(d, north))
    if s < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    return geometry.rotation_matrix(axis, math.atan2(s, c))


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out) -> None:
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _parse_floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc
    if n is not None and len(vals) != n:
        raise click.BadParameter(f"expected {n} comma-separated numbers")
    if not all(math.isfinite(v) for v in vals):
        raise click.BadParameter("values must be finite")
    return vals


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(spec_path):
    try:
        return load_spec(spec_path)
    except SpecError as exc:
        _fail(EXIT_INVALID, f"invalid spec: {exc}")


def _param_samples(doc: SpecDocument, spec: CongruenceSpec):
    s = doc.sampling
    if s.param_box is None:
        return default_samples(spec, s.param_grid[0])
    (a0, a1), (b0, b1) = s.param_box
    return [(a, b) for a in np.linspace(a0, a1, s.param_grid[0])
            for b in np.linspace(b0, b1, s.param_grid[1])]


@click.group()
def cli():
    """Line congruences and straight-streamline Euler flows."""


@cli.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), help="CSV of per-sample residuals.")
@click.option("--summary", type=click.Path(dir_okay=False), help="Also write the JSON summary here.")
@click.option("--tol", type=float, default=1e-5, show_default=True)
@click.option("--fd-step", type=float, default=None)
@click.option("--grid", default=None, help="nx,ny,nz")
@click.option("--time", "times", default=None, help="t0,t1,...")
def verify(spec_path, out, summary, tol, fd_step, grid, times):
    """Check the Euler equations on a sample box."""
    doc = _load(spec_path)
    try:
        flow, form = build_flow(doc)
    except SpecError as exc:
        _fail(EXIT_INVALID, str(exc))
    if form == "none":
        _fail(EXIT_INVALID, "no pressure to verify")
    s = doc.sampling
    try:
        cfg = FDConfig(fd_step if fd_step is not None else s.fd_step, s.fd_scheme)
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    counts = [int(x) for x in _parse_floats(grid, 3)] if grid else list(s.grid)
    tlist = _parse_floats(times) if times else list(s.times)
    points = sample_box(s.box, counts)
    try:
        report = verify_flow(flow, points, tlist, cfg)
    except SINGULAR_ERRORS as exc:
        _fail(EXIT_SINGULAR, f"singularity in sample box: {exc}")
    except CongruenceFlowError as exc:
        _fail(EXIT_SINGULAR, str(exc))
    rows = [[*map(fmt, p), fmt(t), *map(fmt, res), fmt(norm), fmt(div)]
            for p, t, norm, res, div in report.samples]
    passed = report.sup_momentum < tol and report.sup_divergence < tol
    result = {
        "sup_momentum": report.sup_momentum,
        "sup_divergence": report.sup_divergence,
        "samples": len(report.samples),
        "pass": passed,
    }
    if out:
        _atomic_write(out, _csv_text(CSV_HEADER, rows))
    text = _json_text(result)
    if summary:
        _atomic_write(summary, text)
    sys.stdout.write(text)
    sys.exit(EXIT_OK if passed else EXIT_FAIL)


@cli.command(name="classify")
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
def classify_cmd(spec_path, out):
    """Sphere, cylinder, plane or obstructed."""
    doc = _load(spec_path)
    try:
        spec = build_congruence(doc.congruence)
        verdict = classify(spec, _param_samples(doc, spec))
    except SpecError as exc:
        _fail(EXIT_INVALID, str(exc))
    except CongruenceFlowError as exc:
        _fail(EXIT_INVALID, str(exc))
    result = {"verdict": verdict.verdict, **verdict.parameters}
    if verdict.reason:
        result["reason"] = verdict.reason
    if verdict.indeterminate:
        result["indeterminate"] = True
    result["diagnostics"] = [{"condition": n, "sup": v} for n, v in verdict.diagnostics]
    if verdict.notes:
        result["notes"] = verdict.notes
    _emit(_json_text(result), out)
    sys.exit(EXIT_OK if verdict.ok else EXIT_FAIL)


@cli.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
def focal(spec_path, out):
    """Focal radii at each sampled congruence parameter."""
    doc = _load(spec_path)
    try:
        spec = build_congruence(doc.congruence)
    except SpecError as exc:
        _fail(EXIT_INVALID, str(exc))
    rows = []
    for p1, p2 in _param_samples(doc, spec):
        radii: list[float] = []
        if spec.rank == 2:
            radii = list(focal_points(spin_coefficients(spec, complex(p1, p2))))
        elif spec.rank == 1:
            try:
                radii = [-beta(spec, p1, p2)]
            except DegenerateParameterization:
                radii = []
        cells = [fmt(r) for r in radii] + [""] * (2 - len(radii))
        rows.append([fmt(p1), fmt(p2), *cells])
    _emit(_csv_text(["p1", "p2", "r_minus", "r_plus"], rows), out)
    sys.exit(EXIT_OK)


@cli.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", required=True, help="x1,x2,x3")
@click.option("--length", type=float, default=1.0, show_default=True)
@click.option("--steps", type=int, default=100, show_default=True)
@click.option("--t", "t", type=float, default=0.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def trace(spec_path, seed, length, steps, t, out):
    """Trace a streamline from a seed point at frozen time."""
    doc = _load(spec_path)
    try:
        flow, _ = build_flow(doc)
    except SpecError as exc:
        _fail(EXIT_INVALID, str(exc))
    start = _parse_floats(seed, 3)
    n = steps if length != 0.0 else 0
    try:
        line = trace_streamline(flow, start, t, length, n)
    except SINGULAR_ERRORS as exc:
        _fail(EXIT_SINGULAR, str(exc))
    h = length / n if n else 0.0
    rows = [[fmt(i * h), *map(fmt, p)] for i, p in enumerate(line)]
    _emit(_csv_text(["s", "x1", "x2", "x3"], rows), out)
    sys.exit(EXIT_OK)


def main():
    cli()


if __name__ == "__main__":
    main()
