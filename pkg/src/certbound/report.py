"""Figure rendering for curve files: one PNG next to the delimited output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _series(rows, key):
    xs, ys = [], []
    for row in rows:
        v = row.get(key)
        if v is None or v == "":
            continue
        xs.append(row["a"] if "a" in row else row["n"])
        ys.append(v)
    return xs, ys


def render_sum_cdf(rows: list[dict], path: str, title: str) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    styles = [
        ("exact", "k*-", "exact"),
        ("normal_center", "r.--", "normal center"),
        ("normal_lo", "rs:", "normal lower"),
        ("normal_hi", "ro:", "normal upper"),
        ("sp_center", "bd--", "saddlepoint center"),
        ("sp_lo", "bv:", "saddlepoint lower"),
        ("sp_hi", "b^:", "saddlepoint upper"),
    ]
    for key, style, label in styles:
        xs, ys = _series(rows, key)
        if xs:
            ax.plot(xs, ys, style, label=label, markersize=4, linewidth=0.9)
    ax.set_xlabel("a")
    ax.set_ylabel("CDF")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fbl_curve(rows: list[dict], path: str, title: str) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    styles = [
        ("exact", "m*-", "exact"),
        ("alpha", "kd--", "normal center"),
        ("n_upper", "bs:", "normal upper"),
        ("d", "g.:", "normal lower"),
        ("beta", "k*-", "saddlepoint center"),
        ("s", "b^-", "certified upper"),
        ("g", "rv-", "certified lower"),
    ]
    for key, style, label in styles:
        xs, ys = _series(rows, key)
        pts = [(x, y) for x, y in zip(xs, ys) if y is not None and y > 0.0]
        if pts:
            ax.semilogy([p[0] for p in pts], [p[1] for p in pts], style,
                        label=label, markersize=4, linewidth=0.9)
    ax.set_xlabel("blocklength n")
    ax.set_ylabel("bound value")
    ax.legend(fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
