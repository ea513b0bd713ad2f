"""Static SVG figures: class profile line graphs and subtracted networks."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

_FONT = 'font-family="Helvetica, Arial, sans-serif"'
COLOR_A = "#c0392b"  # Unsatisfied
COLOR_B = "#2e6fbd"  # Satisfied


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
            f'viewBox="0 0 {width:g} {height:g}">')
    return "\n".join([head, f'<rect width="{width:g}" height="{height:g}" fill="white"/>', *body, "</svg>"]) + "\n"


def profiles_svg(profiles, code_names: Sequence[str], class_names: Sequence[str] | None = None,
                 columns: int = 2) -> str:
    """One line graph per class: codes on x, presence (1) / absence (0) on y."""
    P = np.asarray(profiles)
    K, J = P.shape
    class_names = list(class_names) if class_names else [f"Class {k + 1}" for k in range(K)]
    pw, ph = 520.0, 300.0
    left, right, top, bottom = 40.0, 15.0, 30.0, 150.0
    cols = min(columns, K)
    rows = math.ceil(K / cols)
    body = []
    for k in range(K):
        ox, oy = (k % cols) * pw, (k // cols) * ph
        x0, x1 = ox + left, ox + pw - right
        y_hi, y_lo = oy + top + 10, oy + ph - bottom
        step = (x1 - x0) / max(J - 1, 1)
        xs = [x0 + j * step for j in range(J)]
        ys = [y_hi if P[k, j] else y_lo for j in range(J)]
        body.append(f'<g class="panel" id="panel-{k + 1}">')
        body.append(f'<text x="{ox + pw / 2:.1f}" y="{oy + 20:.1f}" text-anchor="middle" font-size="14" '
                    f'{_FONT}>{escape(class_names[k])}</text>')
        body.append(f'<line x1="{x0:.1f}" y1="{y_lo:.1f}" x2="{x1:.1f}" y2="{y_lo:.1f}" stroke="#999"/>')
        body.append(f'<line x1="{x0:.1f}" y1="{y_hi:.1f}" x2="{x1:.1f}" y2="{y_hi:.1f}" stroke="#eee"/>')
        for val, y in ((1, y_hi), (0, y_lo)):
            body.append(f'<text x="{x0 - 8:.1f}" y="{y + 4:.1f}" text-anchor="end" font-size="11" {_FONT}>{val}</text>')
        pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in zip(xs, ys))
        body.append(f'<polyline points="{pts}" fill="none" stroke="#333" stroke-width="1.5"/>')
        for x, y in zip(xs, ys):
            body.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="#333"/>')
        for x, name in zip(xs, code_names):
            body.append(f'<text x="{x:.1f}" y="{y_lo + 12:.1f}" font-size="9" {_FONT} '
                        f'transform="rotate(60 {x:.1f} {y_lo + 12:.1f})">{escape(name)}</text>')
        body.append("</g>")
    return _svg(cols * pw, rows * ph, body)


def network_svg(code_names: Sequence[str], weights, title: str = "",
                labels: tuple[str, str] = ("Unsatisfied", "Satisfied")) -> str:
    """Subtracted network on a circular layout: positive edges in group A's
    colour, negative in group B's, width proportional to |weight|."""
    C = len(code_names)
    w = np.asarray(weights, dtype=float)
    size = 640.0
    cx = cy = size / 2
    rad = size / 2 - 120
    pos = [(cx + rad * math.cos(2 * math.pi * i / C - math.pi / 2),
            cy + rad * math.sin(2 * math.pi * i / C - math.pi / 2)) for i in range(C)]
    wmax = float(np.abs(w).max()) if w.size and np.abs(w).max() > 0 else 1.0
    body = []
    if title:
        body.append(f'<text x="{cx:.1f}" y="24" text-anchor="middle" font-size="15" {_FONT}>{escape(title)}</text>')
    k = 0
    for i in range(C):
        for j in range(i + 1, C):
            v = w[k]
            k += 1
            if v == 0:
                continue
            color = COLOR_A if v > 0 else COLOR_B
            width = 0.5 + 7.5 * abs(v) / wmax
            (x1, y1), (x2, y2) = pos[i], pos[j]
            body.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" stroke="{color}" '
                        f'stroke-width="{width:.2f}" stroke-opacity="0.75"/>')
    for (x, y), name in zip(pos, code_names):
        body.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="6" fill="#222"/>')
        anchor = "start" if x >= cx else "end"
        dx = 10 if x >= cx else -10
        body.append(f'<text x="{x + dx:.1f}" y="{y + 4:.1f}" text-anchor="{anchor}" font-size="11" '
                    f'{_FONT}>{escape(name)}</text>')
    body.append(f'<text x="20" y="{size - 30:.0f}" font-size="12" fill="{COLOR_A}" {_FONT}>'
                f'stronger for {escape(labels[0])}</text>')
    body.append(f'<text x="20" y="{size - 12:.0f}" font-size="12" fill="{COLOR_B}" {_FONT}>'
                f'stronger for {escape(labels[1])}</text>')
    return _svg(size, size, body)
