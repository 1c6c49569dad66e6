import numpy as np
import pytest

from qdarwin.experiments import (
    COLUMNS,
    SweepPanel,
    SweepSpec,
    TimeGridSpec,
    builtin_figures,
    emit_plot,
    emit_table,
    load_table,
    run_sweep,
)
from qdarwin.model import InitialScenario
from qdarwin.redundancy import RedundancyConfig


def tiny_spec(kind="max_redundancy", **overrides):
    base = dict(
        figure="custom",
        kind=kind,
        gamma=0.1,
        n=2,
        p_values=(0.0, 1.0),
        time=TimeGridSpec(gamma_t_max=0.6 * np.pi, points=25),
        redundancy=RedundancyConfig(delta=0.9),
        quantities=("chi_E1", "entropy_S")
        if kind == "time_curves"
        else ("redundancy", "chi_E1", "entropy_S"),
        panels=(
            SweepPanel(
                label="",
                scenarios=(InitialScenario.circle_left(),),
                omega_values=(0.1,),
            ),
        ),
        grid_id="test-tiny",
    )
    base.update(overrides)
    return SweepSpec(**base)


# ---------------------------------------------------------------------------
# spec construction and validation
# ---------------------------------------------------------------------------

def test_builtin_figures_match_caption_parameters():
    figs = builtin_figures()
    assert set(figs) == {"fig1", "fig2", "fig3", "fig4", "fig5"}

    fig1 = figs["fig1"]
    assert fig1.kind == "time_curves"
    assert fig1.gamma == 0.1 and fig1.n == 8
    assert fig1.panels[0].omega_values == (0.1,)
    assert fig1.p_values == (0.0, 0.25, 0.5, 0.75, 1.0)

    fig2 = figs["fig2"]
    assert fig2.kind == "max_redundancy"
    assert fig2.redundancy.delta == 0.9
    assert len(fig2.p_values) == 11
    assert fig2.p_values[0] == 0.0 and fig2.p_values[-1] == 1.0
    assert "redundancy" in fig2.quantities and "chi_E1" in fig2.quantities

    fig3 = figs["fig3"]
    assert fig3.p_values == (1.0,) and fig3.n == 8
    ratios3 = tuple(w / fig3.gamma for w in fig3.panels[0].omega_values)
    assert ratios3 == pytest.approx((0.1, 1.0, 10.0))

    fig4 = figs["fig4"]
    assert fig4.kind == "max_redundancy" and fig4.p_values == (1.0,)
    ratios4 = np.array(fig4.panels[0].omega_values) / fig4.gamma
    assert ratios4.min() == pytest.approx(0.1) and ratios4.max() == pytest.approx(10.0)

    fig5 = figs["fig5"]
    assert fig5.kind == "pointer" and fig5.n == 6 and fig5.redundancy.delta == 0.9
    labels = [panel.label for panel in fig5.panels]
    assert labels == ["a", "b", "c"]
    x0s = [sc.x0 for sc in fig5.panels[0].scenarios]
    assert x0s == [0.5, 0.6, 0.7, 0.8, 0.9]
    assert len(fig5.panels[1].scenarios) == 8
    assert all(sc.kind == "phase" for sc in fig5.panels[1].scenarios)
    ratios5 = tuple(w / fig5.gamma for w in fig5.panels[2].omega_values)
    assert 0.1 in np.round(ratios5, 10) and 10.0 in np.round(ratios5, 10)


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        tiny_spec(p_values=())
    with pytest.raises(ValueError):
        tiny_spec(p_values=(1.5,))
    with pytest.raises(ValueError):
        tiny_spec(quantities=("nonsense",))
    with pytest.raises(ValueError):
        tiny_spec(kind="wandering")
    with pytest.raises(ValueError):
        TimeGridSpec(gamma_t_max=1.0, points=1)  # empty/degenerate grid
    with pytest.raises(ValueError):
        TimeGridSpec(gamma_t_max=-1.0, points=10)


# ---------------------------------------------------------------------------
# sweep execution
# ---------------------------------------------------------------------------

def test_time_curve_rows_and_normalization():
    spec = tiny_spec(kind="time_curves")
    rows = run_sweep(spec, workers=1)
    assert len(rows) == 2 * 25
    for row in rows:
        assert row["figure"] == "custom"
        assert row["threshold_mode"] == "literal"
        assert row["version"]
        if row["chi_E1_norm"] != "":
            assert -1e-9 <= row["chi_E1_norm"] <= 1.0 + 1e-6
        if row["entropy_S"] != "" and row["entropy_S"] >= 1e-6:
            assert row["chi_E1_norm"] != ""


def test_worker_count_does_not_change_rows():
    spec = tiny_spec()
    rows1 = run_sweep(spec, workers=1)
    rows2 = run_sweep(spec, workers=2)
    assert rows1 == rows2


def test_drive_ratio_controls_information_flow():
    # reduced fig3: slow drive lets one qubit capture nearly everything,
    # a fast drive keeps the record weak
    spec = tiny_spec(
        kind="time_curves",
        n=8,
        p_values=(1.0,),
        time=TimeGridSpec(gamma_t_max=2.0 * np.pi, points=120),
        panels=(
            SweepPanel(
                label="",
                scenarios=(InitialScenario.circle_left(),),
                omega_values=(0.01, 1.0),
            ),
        ),
    )
    rows = run_sweep(spec, workers=1)
    peaks = {}
    for r in rows:
        if r["chi_E1_norm"] != "":
            key = round(r["omega_over_gamma"], 6)
            peaks[key] = max(peaks.get(key, 0.0), r["chi_E1_norm"])
    assert peaks[0.1] >= 0.95
    assert peaks[10.0] <= 0.6


def test_flagged_rows_never_abort():
    # an impossibly high entropy floor leaves every time point undefined
    spec = tiny_spec(
        redundancy=RedundancyConfig(delta=0.9, min_entropy=0.999999),
        time=TimeGridSpec(gamma_t_max=0.05, points=5),
    )
    rows = run_sweep(spec, workers=1)
    assert len(rows) == 2
    assert all(r["flag"] == "undefined_redundancy" for r in rows)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def test_emit_table_shape_and_determinism(tmp_path):
    spec = tiny_spec(p_values=(0.0, 0.5, 1.0))
    rows = run_sweep(spec, workers=1)[:3]
    p1 = emit_table(rows, tmp_path / "a.csv")
    p2 = emit_table(rows, tmp_path / "b.csv")
    text = p1.read_text()
    assert len(text.splitlines()) == 4  # header + 3 records
    assert text == p2.read_text()
    assert text.splitlines()[0] == ",".join(COLUMNS)


def test_emit_table_round_trip(tmp_path):
    spec = tiny_spec()
    rows = run_sweep(spec, workers=1)
    path = emit_table(rows, tmp_path / "t.csv")
    loaded = load_table(path)
    assert len(loaded) == len(rows)
    path2 = emit_table(loaded, tmp_path / "t2.csv")
    assert path.read_bytes() == path2.read_bytes()


def test_emit_table_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        emit_table([], tmp_path / "x.csv")


def test_emit_table_unwritable_path(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("occupied")
    row = {c: "" for c in COLUMNS}
    with pytest.raises(OSError):
        emit_table([row], blocker / "table.csv")


def test_float_serialization_significant_digits(tmp_path):
    row = {c: "" for c in COLUMNS}
    row.update(figure="f", p=1 / 3, chi_E1=0.12345678901234567)
    path = emit_table([row], tmp_path / "d.csv")
    loaded = load_table(path)[0]
    assert loaded["p"] == "0.333333333333"
    assert loaded["chi_E1"] == "0.123456789012"


# ---------------------------------------------------------------------------
# plots
# ---------------------------------------------------------------------------

def test_emit_plot_time_curves_and_single_row(tmp_path):
    spec = tiny_spec(kind="time_curves")
    rows = run_sweep(spec, workers=1)
    out = emit_plot(rows, "custom", tmp_path / "c.svg")
    head = out.read_text()[:500]
    assert "<svg" in head
    single = emit_plot(rows[:1], "custom", tmp_path / "one.svg")
    assert single.exists()


def test_emit_plot_peak_kind(tmp_path):
    rows = run_sweep(tiny_spec(), workers=1)
    out = emit_plot(rows, "custom", tmp_path / "p.svg")
    assert out.exists() and out.stat().st_size > 0


def test_emit_plot_rejects_unknown_records(tmp_path):
    with pytest.raises(ValueError):
        emit_plot([], "custom", tmp_path / "n.svg")
    with pytest.raises(ValueError):
        emit_plot([{"kind": "mystery"}], "custom", tmp_path / "m.svg")


def test_emit_plot_pointer_three_panels(tmp_path):
    spec = tiny_spec(
        kind="pointer",
        n=2,
        quantities=("pointer_fidelity", "redundancy", "chi_E1"),
        panels=tuple(
            SweepPanel(
                label=lbl,
                scenarios=(InitialScenario.circle_left(),),
                omega_values=(0.1,),
            )
            for lbl in ("a", "b", "c")
        ),
    )
    rows = run_sweep(spec, workers=1)
    out = emit_plot(rows, "custom", tmp_path / "panels.svg")
    text = out.read_text()
    assert text.count("<g id=\"axes_") == 3
