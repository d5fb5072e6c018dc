"""Figure rendering for sweep tables.

Renders the key-rate lower bound against the depolarizing parameter, one
curve per forward bias, to an image file next to the CSV output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_sweep_figure(rows, path) -> None:
    """Plot (b, p, r_lower) rows grouped by b and save to path."""
    curves: dict[float, tuple[list[float], list[float]]] = {}
    order: list[float] = []
    for b, p, r in rows:
        if b not in curves:
            curves[b] = ([], [])
            order.append(b)
        curves[b][0].append(p)
        curves[b][1].append(r)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for b in order:
        ps, rs = curves[b]
        ax.plot(ps, rs, label=f"b = {b:g}")
    ax.axhline(0.0, color="0.6", linewidth=0.8)
    ax.set_xlabel("depolarizing parameter p")
    ax.set_ylabel("key-rate lower bound")
    ax.set_title("Key-rate lower bound vs reverse-channel noise")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
