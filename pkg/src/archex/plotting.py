"""Report figures rendered straight to files.

Uses :class:`matplotlib.figure.Figure` with the Agg canvas rather than
pyplot, so figures can be produced from worker threads and never open a
window.
"""

from __future__ import annotations

from pathlib import Path

from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}
GOLDEN = (5 ** 0.5 - 1) / 2


def _figure(width=5.0):
    fig = Figure(figsize=(width, width * GOLDEN), dpi=150)
    return fig, fig.subplots()


def significance_figure(significance: dict, path, title: str = "") -> Path:
    """Bar chart of signed parameter significance (objective units).

    Positive bars favour the first setting, negative bars the last.
    """
    import matplotlib

    names = list(significance)
    values = [significance[n] for n in names]
    with matplotlib.rc_context(STYLE):
        fig, ax = _figure()
        colors = ["#4C72B0" if v > 0 else "#C44E52" for v in values]
        ax.bar(range(len(names)), values, color=colors)
        ax.axhline(0.0, color="black", linewidth=0.6)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylabel("F(last) - F(first)")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path)
    return path


def pareto_figure(rows, w_power: float, w_time: float, path, title: str = "") -> Path:
    """Normalized power vs time: every point, the Pareto front, the objective line.

    ``rows`` are ``(v_power, v_time, on_front, is_solution)`` tuples. The
    objective line has slope ``-w_power / w_time`` in these axes and passes
    through the solution point, when there is one.
    """
    import matplotlib

    rows = list(rows)
    with matplotlib.rc_context(STYLE):
        fig, ax = _figure()
        ax.scatter([r[0] for r in rows], [r[1] for r in rows], s=4, color="0.75", label="evaluated", zorder=1)
        front = sorted((r[0], r[1]) for r in rows if r[2])
        if front:
            ax.step([p[0] for p in front], [p[1] for p in front], where="post", color="#4C72B0",
                    linewidth=1.0, label="Pareto front", zorder=2)
            ax.scatter([p[0] for p in front], [p[1] for p in front], s=10, color="#4C72B0", zorder=3)
        sol = [r for r in rows if r[3]]
        if sol:
            x0, y0 = sol[0][0], sol[0][1]
            ax.scatter([x0], [y0], s=40, marker="*", color="#C44E52", label="solution", zorder=4)
            if w_time > 0:
                xs = [min(r[0] for r in rows), max(r[0] for r in rows)]
                level = w_power * x0 + w_time * y0
                ys = [(level - w_power * x) / w_time for x in xs]
                ax.plot(xs, ys, linestyle="--", color="#C44E52", linewidth=0.9, label="objective line", zorder=2)
            else:
                ax.axvline(x0, linestyle="--", color="#C44E52", linewidth=0.9, label="objective line")
            ys_all = [r[1] for r in rows]
            pad = 0.05 * (max(ys_all) - min(ys_all) or 1.0)
            ax.set_ylim(min(ys_all) - pad, max(ys_all) + pad)
        ax.set_xlabel("normalized power")
        ax.set_ylabel("normalized execution time")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right", frameon=False)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path)
    return path
