"""Per-experiment figure rendering.

All panels are drawn from the CSV tables; every overlay (envelope curve,
power-law fit line) is evaluated from parameters already present in
summary.json.  Nothing is ever refitted here.
"""

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import InputDataError, load_summary, load_table, require_fit

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "precision", "barrier")


@dataclass
class FigureSpec:
    experiment: str
    input_dir: str
    output_path: str
    x_scale: str = ""   # "linear" | "log"; empty picks the figure's default
    y_scale: str = ""
    overlays: bool = True
    dpi: int = 160


def _finish(fig, ax, spec, default_x, default_y):
    ax.set_xscale(spec.x_scale or default_x)
    ax.set_yscale(spec.y_scale or default_y)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    plt.close(fig)


def _render_fig1(spec, summary):
    table = load_table(spec.input_dir, "p1_vs_tau", summary)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for col in table:
        if col == "tau":
            continue
        ax.plot(table["tau"], table[col], label=rf"$\mu = {col.removeprefix('p_mu')}$")
    ax.set_xlabel(r"runtime $\tau$")
    ax.set_ylabel(r"success probability $p_1$")
    ax.legend()
    _finish(fig, ax, spec, "linear", "linear")


def _scaling_panel(spec, summary, table_prefix, fit_key, y_column, x_label, y_label):
    names = [n for n in summary["tables"] if n.startswith(table_prefix)]
    if not names:
        raise InputDataError(f"summary.json declares no {table_prefix}* tables")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name in sorted(names, key=lambda s: float(s.removeprefix(table_prefix))):
        mu_key = name.removeprefix(table_prefix)
        table = load_table(spec.input_dir, name, summary)
        n = table["n"]
        points = ax.plot(n, table[y_column], "o", ms=4,
                         label=rf"$\mu = {mu_key}$")[0]
        if spec.overlays:
            fit = require_fit(summary, mu_key, fit_key)
            grid = np.geomspace(n.min(), n.max(), 64)
            ax.plot(grid, fit["amplitude"] * grid ** fit["exponent"], "--",
                    color=points.get_color(), lw=1,
                    label=rf"$\propto n^{{{fit['exponent']:.3f}}}$")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.legend(fontsize=8)
    _finish(fig, ax, spec, "log", "log")


def _render_fig2(spec, summary):
    _scaling_panel(spec, summary, "scaling_mu", "expected_runtime", "expected_runtime",
                   r"$n$", r"optimal expected runtime $\tau_n / p_n(\tau_n)$")


def _render_fig3(spec, summary):
    curve = load_table(spec.input_dir, "p1_vs_tau", summary)
    extrema = load_table(spec.input_dir, "extrema", summary)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(curve["tau"], curve["p"], lw=0.8, label=r"$p_1(\tau)$")
    is_max = extrema["is_max"] > 0.5
    ax.plot(extrema["tau"][is_max], extrema["p"][is_max], "^", ms=4, label="maxima")
    ax.plot(extrema["tau"][~is_max], extrema["p"][~is_max], "v", ms=4, label="minima")
    if spec.overlays:
        for side, style in (("upper", "--"), ("lower", ":")):
            fit = require_fit(summary, side)
            if fit.get("perfect_success"):
                continue
            lo, hi = fit["tau_range"]
            grid = np.linspace(lo, hi, 256)
            ax.plot(grid, 1.0 - fit["c"] * grid ** -fit["q"], style, lw=1,
                    label=rf"{side}: $1 - {fit['c']:.3f}\,\tau^{{-{fit['q']:.3f}}}$")
    ax.set_xlabel(r"runtime $\tau$")
    ax.set_ylabel(r"success probability $p_1$")
    ax.legend(fontsize=8)
    _finish(fig, ax, spec, "linear", "linear")


def _render_fig4(spec, summary):
    table = load_table(spec.input_dir, "c_vs_mu", summary)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(table["mu"], table["c_upper"], "o-", ms=4, label=r"$c_u$")
    ax.plot(table["mu"], table["c_lower"], "s-", ms=4, label=r"$c_\ell$")
    perfect = table["perfect_upper"] > 0.5
    if perfect.any():
        ax.plot(table["mu"][perfect], table["c_upper"][perfect], "r*", ms=12,
                label=r"$c_u = 0$ (perfect success)")
    ax.set_xlabel(r"slope $\mu$")
    ax.set_ylabel(r"envelope coefficient $c$")
    ax.legend()
    _finish(fig, ax, spec, "linear", "linear")


def _render_fig5(spec, summary):
    _scaling_panel(spec, summary, "threshold_mu", "threshold", "tau_threshold",
                   r"$n$", r"runtime for 75% ground-state occupancy")


def _render_precision(spec, summary):
    table = load_table(spec.input_dir, "spike_width", summary)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(table["n"], table["width_left"], "o", ms=5, label="measured (left)")
    finite = np.isfinite(table["width_right"])
    if finite.any():
        ax.plot(table["n"][finite], table["width_right"][finite], "s", ms=5,
                label="measured (right)")
    if spec.overlays:
        k = require_fit(summary, "k")
        epsilon = require_fit(summary, "epsilon")
        grid = np.geomspace(table["n"].min(), table["n"].max(), 64)
        ax.plot(grid, np.sqrt(epsilon / (k * grid)), "--", lw=1,
                label=r"$(\epsilon / k n)^{1/2}$")
    ax.set_xlabel(r"$n$")
    ax.set_ylabel(r"allowed $|\tau - \tau_c|$")
    ax.legend()
    _finish(fig, ax, spec, "log", "log")


def _render_barrier(spec, summary):
    table = load_table(spec.input_dir, "barrier_spike", summary)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(table["n"], table["width_left"], "o", ms=5, label="measured (left)")
    if spec.overlays:
        exponent = require_fit(summary, "width_exponent")
        amplitude = require_fit(summary, "width_amplitude")
        grid = np.geomspace(table["n"].min(), table["n"].max(), 64)
        ax.plot(grid, amplitude * grid ** exponent, "--", lw=1,
                label=rf"$\propto n^{{{exponent:.3f}}}$")
    ax.set_xlabel(r"$n$")
    ax.set_ylabel(r"spike width at $p_n = 1 - \epsilon$")
    ax.legend()
    _finish(fig, ax, spec, "log", "log")


_RENDERERS = {
    "fig1": _render_fig1,
    "fig2": _render_fig2,
    "fig3": _render_fig3,
    "fig4": _render_fig4,
    "fig5": _render_fig5,
    "precision": _render_precision,
    "barrier": _render_barrier,
}


def render(spec: FigureSpec) -> str:
    """Validate inputs, then draw and save the figure.  Returns the output path.

    All input files are loaded and checked before anything is written, so a
    failed render leaves no partial output behind.
    """
    if spec.experiment not in _RENDERERS:
        raise InputDataError(
            f"unknown figure id {spec.experiment!r}; expected one of {FIGURE_IDS}"
        )
    summary = load_summary(spec.input_dir)
    if summary["experiment"] != spec.experiment:
        raise InputDataError(
            f"summary.json is for {summary['experiment']!r}, not {spec.experiment!r}"
        )
    _RENDERERS[spec.experiment](spec, summary)
    return spec.output_path
