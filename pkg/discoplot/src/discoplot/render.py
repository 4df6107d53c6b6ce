"""Line charts with confidence bands from sweep-results CSV files.

One series per benchmark, shaded mean +/- ci95 band, axis labels derived
from the swept quantity. Styling is a fixed function of the benchmark tag so
repeated renders of the same CSV are identical; unknown tags get a
deterministic fallback style and a warning, but are still drawn.

Rendering performs no arithmetic on the rates beyond drawing them.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reader import read_rows

# Fixed styles: the standard six-benchmark comparison plus the generic and
# oracle variants the simulator can emit.
BENCHMARK_STYLES: dict[str, dict] = {
    "no_jamming_zf": dict(color="black", linestyle="-", marker="o"),
    "fpj_zf_case1": dict(color="tab:red", linestyle="--", marker="^"),
    "fpj_zf_case2": dict(color="tab:orange", linestyle="--", marker="v"),
    "fpj_ajp_case1": dict(color="tab:blue", linestyle="-", marker="s"),
    "fpj_ajp_case2": dict(color="tab:cyan", linestyle="-", marker="D"),
    "aj_zf": dict(color="tab:green", linestyle="-.", marker="x"),
    "fpj_zf": dict(color="tab:red", linestyle="--", marker="<"),
    "fpj_ajp": dict(color="tab:blue", linestyle="-", marker=">"),
    "fpj_ajp_oracle": dict(color="tab:blue", linestyle=":", marker="p"),
    "fpj_ajp_oracle_case1": dict(color="tab:blue", linestyle=":", marker="1"),
    "fpj_ajp_oracle_case2": dict(color="tab:cyan", linestyle=":", marker="2"),
}

_FALLBACK_COLORS = ("tab:purple", "tab:brown", "tab:pink", "tab:gray", "tab:olive")
_FALLBACK_MARKERS = ("*", "P", "X", "h", "8")

AXIS_LABELS = {
    "power_dbm_per_lu": "Transmit power per LU (dBm)",
    "ap_dirs_distance_m": "AP-DIRS distance (m)",
}

RATE_LABEL = "Ergodic rate per LU (bit/s/Hz)"


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSV, output image, and optional overrides."""

    input_csv: str
    output_image: str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    styles: dict = field(default_factory=dict)


def _fallback_style(tag: str) -> dict:
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=2).digest()
    return dict(
        color=_FALLBACK_COLORS[digest[0] % len(_FALLBACK_COLORS)],
        linestyle=":",
        marker=_FALLBACK_MARKERS[digest[1] % len(_FALLBACK_MARKERS)],
    )


def build_figure(spec: PlotSpec):
    """Assemble the matplotlib figure for a spec (separated for testing)."""
    axis, rows = read_rows(spec.input_csv)
    styles = {**BENCHMARK_STYLES, **spec.styles}

    order: list[str] = []
    series: dict[str, list] = {}
    for row in rows:
        if row.benchmark not in series:
            order.append(row.benchmark)
            series[row.benchmark] = []
        series[row.benchmark].append(row)

    fig, ax = plt.subplots(figsize=(7.2, 4.8), dpi=120)
    for tag in order:
        pts = sorted(series[tag], key=lambda r: r.axis_value)
        x = [r.axis_value for r in pts]
        y = [r.mean_rate for r in pts]
        lo = [r.mean_rate - r.ci95 for r in pts]
        hi = [r.mean_rate + r.ci95 for r in pts]
        style = styles.get(tag)
        if style is None:
            warnings.warn(f"unknown benchmark tag '{tag}'; using a default style")
            style = _fallback_style(tag)
        ax.plot(x, y, label=tag, markersize=5, **style)
        ax.fill_between(x, lo, hi, color=style.get("color"), alpha=0.2, linewidth=0)

    if not rows:
        warnings.warn(f"{spec.input_csv} has no data rows; rendering empty axes")

    ax.set_xlabel(spec.xlabel or AXIS_LABELS.get(axis or "", axis or ""))
    ax.set_ylabel(spec.ylabel or RATE_LABEL)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    if order:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> str:
    """Render the spec and write the image; returns the output path."""
    fig = build_figure(spec)
    try:
        fig.savefig(spec.output_image, metadata={"Software": "discoplot"})
    finally:
        plt.close(fig)
    return spec.output_image
