"""Render twin-beam sweep CSV files into static figures.

Rendering is a pure function of the CSV content and the per-figure style
table: no physics is recomputed here.  Series for different mixing values
follow the published marker convention (diamond, star, triangle, circle).
"""

from __future__ import annotations

import argparse
import csv
import os
import re
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["PlotSpec", "RenderError", "load_csv", "render", "main", "FIGURES"]


class RenderError(Exception):
    """Raised for missing inputs, empty data or unknown columns."""


GAMMA_MARKERS = {
    "1": "D", "0.5": "*", "0.1": "^", "0": "o", "0.01": "+", "0.8": "+",
}

# per-figure axis styling: (x log?, y log?) keyed by figure id
_LOG_LOG = {1, 8, 11}
_LOG_X = {2, 3, 4, 5, 6, 9, 12, 14, 15, 17, 18, 20, 21}


@dataclass(frozen=True)
class PlotSpec:
    """One figure: id, its input CSV files and axis/legend choices."""

    figure_id: int
    csv_paths: tuple
    out_path: str
    x_log: bool = False
    y_log: bool = False
    title: str = ""
    dpi: int = 110

    def validate(self):
        problems = [p for p in self.csv_paths if not os.path.exists(p)]
        if problems:
            raise RenderError(f"missing input CSV file(s): {', '.join(problems)}")


@dataclass
class Table:
    """Parsed CSV: x column plus named series."""

    path: str
    x_name: str
    x: np.ndarray
    series: dict = field(default_factory=dict)


def load_csv(path) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise RenderError(f"{path}: no data (empty CSV)")
    header, data = rows[0], rows[1:]
    if not data:
        raise RenderError(f"{path}: no data rows")
    cols = np.array([[float(v) if v != "nan" else np.nan for v in row]
                     for row in data])
    table = Table(path=path, x_name=header[0], x=cols[:, 0])
    for j, name in enumerate(header[1:], start=1):
        table.series[name] = cols[:, j]
    return table


_LABEL_RE = re.compile(r"^(?P<name>[^\[]+)(\[(?P<tags>[^\]]*)\])?$")


def _style_for_label(label):
    m = _LABEL_RE.match(label)
    tags = (m.group("tags") or "") if m else ""
    gamma = None
    for part in tags.split(";"):
        if part.startswith("gamma="):
            gamma = part.split("=", 1)[1]
    marker = GAMMA_MARKERS.get(gamma) if gamma is not None else None
    base = m.group("name") if m else label
    dashed = any(key in base for key in ("i_p", "c_p", "r_p", "_p", "K_n",
                                         "cross", "flux", "coherent_term"))
    return marker, "--" if dashed else "-"


def render(spec: PlotSpec) -> str:
    """Render one figure to a raster image; returns the output path."""
    spec.validate()
    tables = [load_csv(p) for p in spec.csv_paths]
    n_panels = len(tables)
    fig, axes = plt.subplots(1, n_panels, figsize=(5.2 * n_panels, 3.9))
    if n_panels == 1:
        axes = [axes]
    for ax, table in zip(axes, tables):
        if not table.series:
            raise RenderError(f"{table.path}: no series columns")
        for label, values in table.series.items():
            marker, linestyle = _style_for_label(label)
            mask = np.isfinite(values) & np.isfinite(table.x)
            ax.plot(table.x[mask], values[mask], linestyle=linestyle,
                    marker=marker, markersize=4, markevery=max(1, mask.sum() // 24),
                    linewidth=1.0, label=label)
        ax.set_xlabel(table.x_name)
        if spec.x_log:
            ax.set_xscale("log")
        if spec.y_log:
            ax.set_yscale("log")
        ax.legend(fontsize=6, frameon=False)
        ax.set_title(os.path.basename(table.path), fontsize=8)
    if spec.title:
        fig.suptitle(spec.title, fontsize=10)
    fig.tight_layout()
    os.makedirs(os.path.dirname(spec.out_path) or ".", exist_ok=True)
    fig.savefig(spec.out_path, dpi=spec.dpi, metadata={"Software": ""})
    plt.close(fig)
    if os.path.getsize(spec.out_path) == 0:
        raise RenderError(f"{spec.out_path}: rendered image is empty")
    return spec.out_path


FIGURES = {
    1: ["fig01_triplet_intensities.csv"],
    2: ["fig02_coherent_weights.csv"],
    3: ["fig03_reduced_moments.csv"],
    4: ["fig04_pump_squeeze.csv"],
    5: ["fig05_subshot_parameter.csv"],
    6: ["fig06_fluct_moments.csv"],
    7: ["fig07_signal_profiles.csv", "fig07_pump_profiles.csv"],
    8: ["fig08_beam_intensity.csv"],
    9: ["fig09_component_shares.csv"],
    10: ["fig10_pump_transfer.csv"],
    11: ["fig11_mode_counts.csv"],
    12: ["fig12_spectral_widths.csv"],
    13: ["fig13_cross_sections.csv"],
    14: ["fig14_subshot_beam.csv"],
    15: ["fig15_fluct_moment_beam.csv"],
    16: ["fig16_sfg_profile.csv"],
    17: ["fig17_sfg_widths.csv"],
    18: ["fig18_sfg_visibility.csv"],
    19: ["fig19_hom_profile.csv"],
    20: ["fig20_hom_visibility.csv"],
    21: ["fig21_hom_widths.csv"],
}


def spec_for(fig_id: int, csv_dir: str, out_dir: str) -> PlotSpec:
    if fig_id not in FIGURES:
        raise RenderError(f"unknown figure id {fig_id}")
    paths = tuple(os.path.join(csv_dir, name) for name in FIGURES[fig_id])
    return PlotSpec(
        figure_id=fig_id,
        csv_paths=paths,
        out_path=os.path.join(out_dir, f"fig{fig_id:02d}.png"),
        x_log=fig_id in _LOG_X or fig_id in _LOG_LOG,
        y_log=fig_id in _LOG_LOG,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render twin-beam figure CSVs to PNG images",
    )
    parser.add_argument("csv_dir", help="directory holding the figure CSV files")
    parser.add_argument("--only", help="comma-separated figure ids to render")
    parser.add_argument("--out", default=None,
                        help="image output directory (default: csv_dir)")
    args = parser.parse_args(argv)
    out_dir = args.out or args.csv_dir
    ids = ([int(v) for v in args.only.split(",")] if args.only
           else sorted(FIGURES))
    failures = 0
    for fig_id in ids:
        spec = spec_for(fig_id, args.csv_dir, out_dir)
        try:
            print(render(spec))
        except RenderError as exc:
            failures += 1
            print(f"figure {fig_id}: {exc}", file=sys.stderr)
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
