import csv
import io
import json
import math

import numpy as np
import pytest

from nonmarkov_gp.errors import ConfigurationError, DegenerateTrajectoryError, InvalidInputError
from nonmarkov_gp.numerics import QuadratureSettings
from nonmarkov_gp.sweep import (
    COLUMNS,
    ERROR_MARK,
    PRESETS,
    WORKERS_ENV,
    PhaseRecord,
    SweepAxis,
    SweepSpec,
    emit,
    evaluate_point,
    failed_points,
    figure_preset,
    grid,
    load_records,
    parse_config,
    run_sweep,
    to_csv,
    to_json,
    worker_count,
)

FAST = QuadratureSettings(256)


def small_spec(evaluators=("exact", "unitary", "perturbative", "markovian", "kinematic")):
    axes = (SweepAxis.linspace("W", 0.0, 0.6, 4), SweepAxis("lambda", (0.0, 0.05, 5.0)))
    return SweepSpec({"theta0": math.pi / 3}, axes, evaluators, FAST)


# ---------------------------------------------------------------- config


def test_parse_single_axis():
    spec = parse_config("axis = W 0 0.5 51; lambda = 5.0; theta0 = 1.0471975512")
    assert spec.shape == (51,)
    assert spec.fixed == {"lambda": 5.0, "theta0": 1.0471975512}
    assert spec.axes[0].values[0] == 0.0 and spec.axes[0].values[-1] == 0.5
    assert spec.evaluators == ("exact", "unitary")


def test_parse_surface():
    spec = parse_config("axis = W 0 1 41; axis2 = theta0 0 3.14159265 41; lambda = 0.05")
    assert spec.shape == (41, 41)
    assert [a.name for a in spec.axes] == ["W", "theta0"]
    assert spec.fixed == {"lambda": 0.05}


def test_parse_full_document():
    text = """
    # narrow bath
    lambda = 0.05
    theta0 = 1.0   # radians
    axis = W list 0 0.1 0.3
    evaluators = exact, kinematic
    samples = 512; refinement_tolerance = 1e-5
    output = out.json
    format = json
    """
    spec = parse_config(text)
    assert spec.axes[0].values == (0.0, 0.1, 0.3)
    assert spec.evaluators == ("exact", "kinematic")
    assert spec.resolution == QuadratureSettings(512, 1e-5)
    assert (spec.output, spec.fmt) == ("out.json", "json")


def test_parse_points_row_major():
    spec = parse_config("theta0 = 1\naxis = W 0 1 3\naxis2 = lambda list 2 4")
    pts = spec.points()
    assert [(p["W"], p["lambda"]) for p in pts] == [(0, 2), (0, 4), (0.5, 2), (0.5, 4), (1, 2), (1, 4)]


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("lambda = 1\ntheta0 = 1\naxis = W 0 1 3\naxis2 = W 0 2 3", 4, "duplicate axis"),
        ("lambda = 1\ntheta0 = 1\nbogus = 3\naxis = W 0 1 3", 3, "unknown key"),
        ("lambda = 1x\ntheta0 = 1\naxis = W 0 1 3", 1, "malformed number"),
        ("lambda = 1\n\ntheta0 = 4\naxis = W 0 1 3", 3, "theta0"),
        ("lambda = 1\ntheta0 = 1\naxis = omega0 0 1 3", 3, "cannot sweep"),
        ("lambda = 1\ntheta0 = 1\naxis = theta0 0 4 3", 3, "theta0"),
        ("lambda = 1\ntheta0 = 1\naxis = W 0 1 2.5", 3, "count"),
        ("lambda = 1\nlambda = 2\ntheta0 = 1\naxis = W 0 1 3", 2, "twice"),
        ("W = 1\ntheta0 = 1\naxis = W 0 1 3\nlambda = 1", 3, "both fixed and swept"),
        ("lambda = 1\ntheta0 = 1\naxis = W 0 1 3\nevaluators = exact, berry", 4, "evaluator"),
        ("lambda = 1\ntheta0 = 1\naxis = W 0 1 3\nsamples = 15", 4, "samples"),
        ("lambda = 1\ntheta0 = 1\njust words", 3, "key = value"),
        ("lambda = 1\ntheta0 = 1\naxis2 = W 0 1 3", 3, "axis2 given without axis"),
    ],
)
def test_parse_errors_carry_line(text, line, fragment):
    with pytest.raises(ConfigurationError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")
    assert fragment in str(exc.value)


def test_parse_missing_parameter():
    with pytest.raises(ConfigurationError, match="no value given for theta0"):
        parse_config("lambda = 1\naxis = W 0 1 3")
    with pytest.raises(ConfigurationError, match="no axis"):
        parse_config("lambda = 1\ntheta0 = 1\nW = 0.1")


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        SweepSpec({"theta0": 1.0, "lambda": 1.0}, ())
    with pytest.raises(ConfigurationError):
        SweepSpec({"theta0": 1.0}, (SweepAxis("W", (0, 1)), SweepAxis("W", (0, 1))))
    with pytest.raises(ConfigurationError):
        SweepAxis("W", (0.1,))
    with pytest.raises(ConfigurationError):
        SweepSpec({"theta0": 1.0, "lambda": 1.0}, (SweepAxis("W", (0, 1)),), fmt="xml")


# ---------------------------------------------------------------- presets


def test_presets_fix_pinned_values():
    assert figure_preset("fig1a").fixed == {"lambda": 5.0}
    assert figure_preset("fig1b").fixed == {"lambda": 0.05}
    assert figure_preset("fig2").fixed == {"theta0": math.pi / 3}
    assert figure_preset("fig3").fixed == {"W": 0.2}


def test_preset_shapes_and_columns():
    assert figure_preset("fig1a").shape == (41, 41)
    fig2 = figure_preset("fig2")
    assert fig2.shape == (51, 4)
    assert fig2.axes[1].values == (0.0, 0.05, 1.0, 5.0)
    assert "perturbative" in fig2.evaluators and "exact" in fig2.evaluators
    assert set(figure_preset("fig3").evaluators) == {"exact", "unitary"}


def test_preset_overrides():
    spec = figure_preset("fig3", theta0_range=(0, 1, 5), lambdas=(1.0, 2.0))
    assert spec.shape == (5, 2)
    with pytest.raises(InvalidInputError):
        figure_preset("fig4")
    assert PRESETS == ("fig1a", "fig1b", "fig2", "fig3")


def test_fig2_unitary_boundary():
    spec = figure_preset("fig2")
    records = run_sweep(spec, workers=1)
    assert len(records) == 204
    exact = grid(records, spec, "phi_exact")
    np.testing.assert_allclose(exact[0], 1.5 * math.pi, atol=1e-9)
    assert not failed_points(records)


# ---------------------------------------------------------------- evaluation


def test_evaluate_point_columns():
    rec = evaluate_point({"W": 0.2, "lambda": 0.0, "theta0": 1.0}, ("exact", "unitary", "markovian"), FAST)
    assert rec.phi_markovian is None  # undefined at lambda = 0
    assert rec.phi_kinematic is None  # not requested
    assert rec.correction == pytest.approx(rec.phi_unitary - rec.phi_exact)
    assert not rec.failed


@pytest.fixture
def kinematic_fails_at_pole(monkeypatch):
    import nonmarkov_gp.sweep as sweep_mod

    real = sweep_mod.kinematic_from_params

    def fake(params, settings=None):
        if params.theta0 == 0.0:
            raise DegenerateTrajectoryError("eigenvalues coincide at sample 17")
        return real(params, settings)

    monkeypatch.setattr(sweep_mod, "kinematic_from_params", fake)


def test_evaluate_point_marks_failures(kinematic_fails_at_pole):
    rec = evaluate_point({"W": 0.5, "lambda": 2.0, "theta0": 0.0}, ("exact", "kinematic"), FAST)
    assert rec.phi_kinematic == ERROR_MARK
    assert rec.failed and "phi_kinematic" in rec.errors[0]
    assert isinstance(rec.phi_exact, float)


def test_sweep_continues_past_failures(tmp_path, kinematic_fails_at_pole):
    spec = SweepSpec(
        {"lambda": 2.0, "W": 0.5}, (SweepAxis("theta0", (0.0, 1.0)),), ("exact", "kinematic"), FAST
    )
    records = run_sweep(spec, workers=1)
    assert len(records) == 2
    assert [r.failed for r in records] == [True, False]
    text = to_csv(records)
    assert f",{ERROR_MARK}," in text.splitlines()[1]
    back = load_records(emit(records, "csv", tmp_path / "r.csv"))
    assert back[0].phi_kinematic == ERROR_MARK


def test_worker_count(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigurationError):
        worker_count()
    monkeypatch.delenv(WORKERS_ENV)
    assert worker_count() >= 1


def test_parallel_sweep_byte_identical():
    spec = small_spec()
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    assert to_csv(serial) == to_csv(parallel)
    assert to_json(serial) == to_json(parallel)


# ---------------------------------------------------------------- output


def test_csv_single_record():
    rec = PhaseRecord(0.1, 5.0, 1.0, phi_exact=1.0, phi_unitary=2.0)
    text = to_csv([rec])
    lines = text.split("\n")
    assert text.endswith("\n") and len(lines) == 3 and lines[2] == ""
    assert lines[0] == ",".join(COLUMNS)
    assert lines[1] == "0.10000000000000001,5,1,1,2,,,,,"


def test_csv_cells_reparse_exactly():
    records = run_sweep(small_spec(), workers=1)
    rows = list(csv.DictReader(io.StringIO(to_csv(records))))
    for rec, row in zip(records, rows):
        for col in COLUMNS:
            v = getattr(rec, col)
            if v is None:
                assert row[col] == ""
            else:
                assert float(row[col]) == v


def test_json_round_trip(tmp_path):
    records = run_sweep(small_spec(), workers=1)
    path = emit(records, "json", tmp_path / "out.json")
    back = load_records(path)
    assert [r.as_dict() for r in back] == [r.as_dict() for r in records]
    rows = json.loads(path.read_text())
    assert all(list(row) == list(COLUMNS) for row in rows)


def test_csv_round_trip(tmp_path):
    records = run_sweep(small_spec(), workers=1)
    back = load_records(emit(records, "csv", tmp_path / "out.csv"))
    assert [r.as_dict() for r in back] == [r.as_dict() for r in records]


def test_rerun_byte_identical(tmp_path):
    a = emit(run_sweep(small_spec(), workers=1), "csv", tmp_path / "a.csv").read_bytes()
    b = emit(run_sweep(small_spec(), workers=1), "csv", tmp_path / "b.csv").read_bytes()
    assert a == b


def test_json_non_finite_becomes_null():
    rec = PhaseRecord(0.1, 5.0, 1.0, phi_exact=float("nan"), phi_unitary=2.0)
    assert json.loads(to_json([rec]))[0]["phi_exact"] is None


def test_emit_errors(tmp_path):
    rec = PhaseRecord(0.1, 5.0, 1.0, phi_unitary=2.0)
    with pytest.raises(InvalidInputError):
        emit([], "csv", tmp_path / "x.csv")
    with pytest.raises(InvalidInputError):
        emit([rec], "xml", tmp_path / "x.xml")
    with pytest.raises(OSError):
        emit([rec], "csv", tmp_path / "missing" / "x.csv")
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit([rec], "csv", blocker / "x.csv")
