"""Deterministic output files: versioned CSV tables, a bare-bones SVG line
plotter, and the run manifest with content hashes."""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

__all__ = ["CSV_SCHEMA", "format_value", "write_csv", "read_csv", "Series", "Plot",
           "RunManifest", "sha256_file"]

CSV_SCHEMA = "sicasy-csv/1"


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool,)):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def write_csv(path: str, table: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Write ``# sicasy-csv/1 <table>`` then a header row then data; LF endings."""
    lines = [f"# {CSV_SCHEMA} {table}", ",".join(header)]
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"row width {len(r)} does not match header width {len(header)}")
        lines.append(",".join(format_value(v) for v in r))
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith(f"# {CSV_SCHEMA}"):
        raise ValueError(f"{path}: missing schema line")
    header = lines[1].split(",")
    return header, [ln.split(",") for ln in lines[2:] if ln]


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ----------------------------------------------------------------------------
# SVG

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    lower: Optional[Sequence[float]] = None  # shaded band
    upper: Optional[Sequence[float]] = None
    dashed: bool = False


@dataclass
class Plot:
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)
    vlines: list = field(default_factory=list)  # (x, label)
    hlines: list = field(default_factory=list)  # (y, label)
    logy: bool = False
    width: int = 640
    height: int = 420

    def add(self, *args, **kwargs) -> "Plot":
        self.series.append(Series(*args, **kwargs))
        return self

    def _ty(self, v):
        return math.log10(v) if self.logy else v

    def _bounds(self):
        xs, ys = [], []
        for s in self.series:
            xs.extend(s.x)
            for arr in (s.y, s.lower, s.upper):
                if arr is not None:
                    ys.extend(arr)
        xs.extend(v for v, _ in self.vlines)
        ys.extend(v for v, _ in self.hlines)
        xs = [v for v in xs if math.isfinite(v)]
        ys = [self._ty(v) for v in ys if math.isfinite(v) and (v > 0 or not self.logy)]
        if not xs or not ys:
            return 0.0, 1.0, 0.0, 1.0
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.04 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self) -> str:
        W, H = self.width, self.height
        left, right, top, bottom = 70, 20, 36, 50
        x0, x1, y0, y1 = self._bounds()

        def px(v):
            return left + (v - x0) / (x1 - x0) * (W - left - right)

        def py(v):
            return H - bottom - (self._ty(v) - y0) / (y1 - y0) * (H - top - bottom)

        def ok(v):
            return math.isfinite(v) and (v > 0 or not self.logy)

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
               f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
               f'<rect width="{W}" height="{H}" fill="white"/>',
               f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(self.title)}</text>']
        # axes and ticks
        out.append(f'<rect x="{left}" y="{top}" width="{W - left - right}" '
                   f'height="{H - top - bottom}" fill="none" stroke="black"/>')
        for i in range(6):
            xv = x0 + (x1 - x0) * i / 5
            out.append(f'<text x="{px(xv):.1f}" y="{H - bottom + 15}" text-anchor="middle">{xv:.3g}</text>')
            yv = y0 + (y1 - y0) * i / 5
            lab = f"1e{yv:.2g}" if self.logy else f"{yv:.3g}"
            ypix = H - bottom - (yv - y0) / (y1 - y0) * (H - top - bottom)
            out.append(f'<text x="{left - 6}" y="{ypix + 4:.1f}" text-anchor="end">{lab}</text>')
        out.append(f'<text x="{W / 2:.1f}" y="{H - 12}" text-anchor="middle">{_esc(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{H / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {H / 2:.1f})">{_esc(self.ylabel)}</text>')

        for i, s in enumerate(self.series):
            color = _PALETTE[i % len(_PALETTE)]
            if s.lower is not None and s.upper is not None:
                up = [(px(a), py(b)) for a, b in zip(s.x, s.upper) if ok(b)]
                lo = [(px(a), py(b)) for a, b in zip(s.x, s.lower) if ok(b)]
                pts = up + lo[::-1]
                if pts:
                    out.append(f'<polygon points="{_pts(pts)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
            pts = [(px(a), py(b)) for a, b in zip(s.x, s.y) if ok(b) and math.isfinite(a)]
            if pts:
                dash = ' stroke-dasharray="5,4"' if s.dashed else ""
                out.append(f'<polyline points="{_pts(pts)}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
            if s.label:
                ly = top + 14 + 14 * i
                out.append(f'<line x1="{W - right - 150}" y1="{ly - 4}" x2="{W - right - 130}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
                out.append(f'<text x="{W - right - 125}" y="{ly}">{_esc(s.label)}</text>')
        for v, label in self.vlines:
            out.append(f'<line x1="{px(v):.2f}" y1="{top}" x2="{px(v):.2f}" y2="{H - bottom}" stroke="gray" stroke-dasharray="3,3"/>')
            out.append(f'<text x="{px(v) + 3:.2f}" y="{top + 12}" fill="gray">{_esc(label)}</text>')
        for v, label in self.hlines:
            if ok(v):
                out.append(f'<line x1="{left}" y1="{py(v):.2f}" x2="{W - right}" y2="{py(v):.2f}" stroke="gray" stroke-dasharray="3,3"/>')
                out.append(f'<text x="{left + 4}" y="{py(v) - 3:.2f}" fill="gray">{_esc(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path: str) -> str:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(self.render())
        return path


def _pts(pts) -> str:
    return " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ----------------------------------------------------------------------------
# manifest


@dataclass
class RunManifest:
    command: str
    parameters: dict
    output_dir: str
    input_config_path: Optional[str] = None
    artifact_hashes: dict = field(default_factory=dict)

    def record(self, path: str) -> str:
        self.artifact_hashes[os.path.basename(path)] = sha256_file(path)
        return path

    def write(self) -> str:
        """Write ``manifest.json`` (always the last file of a run)."""
        path = os.path.join(self.output_dir, "manifest.json")
        doc = {
            "command": self.command,
            "parameters": self.parameters,
            "input_config_path": self.input_config_path,
            "output_dir": self.output_dir,
            "artifact_hashes": dict(sorted(self.artifact_hashes.items())),
        }
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path
