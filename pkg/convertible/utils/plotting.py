"""Plotly charts for parameter sweeps."""

import logging
from pathlib import Path

import pandas as pd
import plotly.graph_objects as go

logger = logging.getLogger(__name__)

REGIME_COLORS = {
    "merge": "#636EFA",
    "split": "#EF553B",
    "general": "#00CC96",
    "degenerate": "#AB63FA",
}


def apply_report_style(fig: go.Figure, title: str, x_title: str, y_title: str) -> go.Figure:
    """Sweep chart layout: titled axes, regime legend on the right."""
    fig.update_layout(
        template="simple_white",
        title=dict(text=title, x=0.02, font=dict(size=15)),
        font=dict(family="DejaVu Sans Mono, monospace", size=11),
        margin=dict(l=70, r=20, t=60, b=50),
        legend=dict(title="regime", x=1.02, y=1),
        hoverlabel=dict(font_family="DejaVu Sans Mono, monospace"),
    )
    fig.update_xaxes(title=x_title, ticks="outside", zeroline=False)
    fig.update_yaxes(title=y_title, ticks="outside", zeroline=False)
    return fig


def save_figure(fig: go.Figure, out_dir: Path, name: str, width: int = 900, height: int = 600):
    """Write `name`.html and, when kaleido can render it, `name`.png; return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    html = out_dir / f"{name}.html"
    fig.write_html(html, include_plotlyjs="cdn")
    written = [html]
    png = out_dir / f"{name}.png"
    try:
        fig.write_image(png, width=width, height=height)
    except Exception as exc:  # kaleido or its browser is missing
        logger.warning("no PNG for %s: %s", name, exc)
    else:
        written.append(png)
    logger.info("chart %s: %s", name, ", ".join(p.name for p in written))
    return written


def savings_heatmap(df: pd.DataFrame) -> go.Figure:
    """Mean read savings over the default approach, by (k^I, k^F)."""
    grid = df.pivot_table(index="k_i", columns="k_f", values="savings", aggfunc="mean")
    fig = go.Figure(go.Heatmap(
        z=grid.values,
        x=[str(c) for c in grid.columns],
        y=[str(i) for i in grid.index],
        colorscale="Viridis",
        zmin=0,
        zmax=1,
        colorbar=dict(title="savings"),
        hovertemplate="k^I=%{y} k^F=%{x}<br>savings %{z:.0%}<extra></extra>",
    ))
    fig.update_yaxes(scaleanchor="x")
    return apply_report_style(fig, "Read savings of optimal conversion vs. default", "k^F", "k^I")


def access_by_regime(df: pd.DataFrame) -> go.Figure:
    """Achieved total access against the default approach; points below the diagonal save."""
    fig = go.Figure()
    for regime, group in df.groupby("regime"):
        fig.add_trace(go.Scatter(
            x=group["default_total"],
            y=group["total"],
            mode="markers",
            name=regime,
            marker=dict(color=REGIME_COLORS.get(regime, "#636EFA"), size=7, opacity=0.7),
            text=[f"({a},{b};{c},{d})" for a, b, c, d in
                  zip(group["n_i"], group["k_i"], group["n_f"], group["k_f"])],
        ))
    top = float(df["default_total"].max()) if len(df) else 1.0
    fig.add_shape(type="line", x0=0, y0=0, x1=top, y1=top, line=dict(dash="dot", color="gray"))
    return apply_report_style(
        fig, "Access cost: optimal vs. default", "default reads + writes", "planned reads + writes"
    )
