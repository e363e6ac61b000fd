"""
Arrhenius plot of a sweep: log(lambda/h) against 1/h.

The SVG is emitted path by path so it depends on nothing but the data;
the interactive HTML variant goes through plotly.
"""

import math
from typing import List, Optional, Sequence, Tuple

import plotly.graph_objects as go

from ..models.spectral import SpectralPrediction

Series = Tuple[str, Sequence[Tuple[float, float]]]

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class ArrheniusPlot:
    """A reusable plot of measured eigenvalues and their predicted lines."""

    def __init__(
        self,
        title: str,
        measured: Sequence[Series],
        predicted: Sequence[Tuple[str, SpectralPrediction]] = (),
        width: int = 640,
        height: int = 420,
    ):
        """Initialize the plot.

        Args:
            title: Plot title
            measured: (label, [(h, lambda), ...]) series
            predicted: (label, prediction) pairs drawn as lines over the measured h range
        """
        self.title = title
        self.measured = [(label, [(h, lam) for h, lam in points if lam > 0]) for label, points in measured]
        self.predicted = [(label, pred) for label, pred in predicted if not pred.is_zero and pred.coefficient is not None]
        self.width = width
        self.height = height
        self.margin = 56

    def _h_values(self) -> List[float]:
        return sorted({h for _, points in self.measured for h, _ in points})

    def _predicted_points(self, pred: SpectralPrediction) -> List[Tuple[float, float]]:
        hs = self._h_values()
        if not hs:
            return []
        lo, hi = min(hs), max(hs)
        samples = [lo + (hi - lo) * i / 32 for i in range(33)] if hi > lo else [lo]
        return [(h, pred.eval(h)) for h in samples]

    def _xy(self, points: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
        return [(1.0 / h, math.log(lam / h)) for h, lam in points if lam > 0]

    def render_svg(self) -> str:
        """The plot as a standalone SVG document."""
        series = [(label, self._xy(points), False) for label, points in self.measured]
        series += [(label, self._xy(self._predicted_points(pred)), True) for label, pred in self.predicted]
        all_xy = [xy for _, pts, _ in series for xy in pts]
        w, h, m = self.width, self.height, self.margin
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
            f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
            f'<text x="{w / 2:.1f}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{self.title}</text>',
        ]
        if not all_xy:
            out.append("</svg>")
            return "\n".join(out) + "\n"

        xs, ys = [x for x, _ in all_xy], [y for _, y in all_xy]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        x1 = x1 if x1 > x0 else x0 + 1.0
        y1 = y1 if y1 > y0 else y0 + 1.0

        def sx(x: float) -> float:
            return m + (x - x0) / (x1 - x0) * (w - 2 * m)

        def sy(y: float) -> float:
            return h - m - (y - y0) / (y1 - y0) * (h - 2 * m)

        out.append(f'<path d="M{m} {m} L{m} {h - m} L{w - m} {h - m}" stroke="black" fill="none"/>')
        for i in range(5):
            xv, yv = x0 + (x1 - x0) * i / 4, y0 + (y1 - y0) * i / 4
            out.append(f'<text x="{sx(xv):.1f}" y="{h - m + 16}" text-anchor="middle" font-size="10">{xv:.3g}</text>')
            out.append(f'<text x="{m - 6}" y="{sy(yv) + 3:.1f}" text-anchor="end" font-size="10">{yv:.3g}</text>')
        out.append(f'<text x="{w / 2:.1f}" y="{h - 12}" text-anchor="middle" font-size="12">1/h</text>')
        out.append(
            f'<text x="14" y="{h / 2:.1f}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 14 {h / 2:.1f})">log(lambda/h)</text>'
        )

        for i, (label, pts, dashed) in enumerate(series):
            colour = _COLOURS[i % len(_COLOURS)]
            if not pts:
                continue
            pts = sorted(pts)
            path = " ".join(f"{'M' if j == 0 else 'L'}{sx(x):.2f} {sy(y):.2f}" for j, (x, y) in enumerate(pts))
            dash = ' stroke-dasharray="6 4"' if dashed else ""
            out.append(f'<path d="{path}" stroke="{colour}" fill="none" stroke-width="1.5"{dash}/>')
            if not dashed:
                out.extend(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{colour}"/>' for x, y in pts)
            out.append(f'<text x="{w - m + 4}" y="{m + 14 * i}" font-size="10" fill="{colour}">{label}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def figure(self) -> go.Figure:
        fig = go.Figure()
        for label, points in self.measured:
            xy = sorted(self._xy(points))
            fig.add_trace(go.Scatter(x=[x for x, _ in xy], y=[y for _, y in xy], mode="markers+lines", name=label))
        for label, pred in self.predicted:
            xy = sorted(self._xy(self._predicted_points(pred)))
            fig.add_trace(
                go.Scatter(x=[x for x, _ in xy], y=[y for _, y in xy], mode="lines", name=label, line={"dash": "dash"})
            )
        fig.update_layout(title=self.title, xaxis_title="1/h", yaxis_title="log(lambda/h)", template="plotly_white")
        return fig

    def render_html(self, path: Optional[str] = None) -> str:
        """Interactive HTML; written to ``path`` when given."""
        html = self.figure().to_html(include_plotlyjs="cdn", full_html=True)
        if path is not None:
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(html)
        return html
