import pytest

from convertible.utils.plotting import access_by_regime, save_figure, savings_heatmap
from convertible.utils.processing import run_sweep, summarize_sweep, sweep_parameters


def test_sweep_grid():
    grid = sweep_parameters(max_k=3, max_r=2, max_m=6)
    assert len(grid) == 24
    assert all(p.k_i != p.k_f for p in grid)
    assert {p.regime for p in grid} == {"merge", "split", "general"}


def test_grid_respects_the_lcm_cap():
    grid = sweep_parameters(max_k=4, max_r=1, max_m=4)
    pairs = {(p.k_i, p.k_f) for p in grid}
    assert pairs == {(1, 2), (2, 1), (1, 3), (3, 1), (1, 4), (4, 1), (2, 4), (4, 2)}


@pytest.fixture(scope="module")
def small_sweep():
    return run_sweep(sweep_parameters(max_k=3, max_r=2, max_m=6), trials=5)


def test_small_sweep_is_optimal_and_preserving(small_sweep):
    assert len(small_sweep) == 24
    assert small_sweep["optimal"].all()
    assert small_sweep["preserved"].all()
    assert (small_sweep["total"] == small_sweep["bound"]).all()
    assert (small_sweep["reads"] <= small_sweep["default_reads"]).all()


def test_summary_columns(small_sweep):
    summary = summarize_sweep(small_sweep)
    assert list(summary.columns) == ["count", "optimal", "preserved", "mean_savings"]
    assert summary["count"].sum() == 24


def test_charts(small_sweep):
    heatmap = savings_heatmap(small_sweep)
    assert heatmap.data[0].type == "heatmap"
    scatter = access_by_regime(small_sweep)
    assert {trace.name for trace in scatter.data} == set(small_sweep["regime"])
    assert scatter.layout.xaxis.title.text == "default reads + writes"
    assert len(scatter.layout.shapes) == 1
    assert heatmap.layout.yaxis.title.text == "k^I"


def test_save_figure_creates_the_directory(small_sweep, tmp_path):
    out = tmp_path / "charts" / "nested"
    written = save_figure(savings_heatmap(small_sweep), out, "savings")
    assert written[0] == out / "savings.html"
    assert all(path.exists() for path in written)


@pytest.mark.slow
def test_full_sweep():
    df = run_sweep(sweep_parameters(max_k=8, max_r=4, max_m=48), trials=100)
    assert "error" not in df.columns or df["error"].isna().all()
    assert len(df) == 864
    assert df["optimal"].all()
    assert df["preserved"].all()
