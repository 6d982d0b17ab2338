"""File formats: JSON specs and curves, CSV tables and SVG snapshots.

Floats are written with 17 significant digits (JSON uses ``repr``), so a
write followed by a read reproduces every value bit for bit. No output
carries timestamps, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .anisotropy import Anisotropy, AnisotropyError
from .curve import PolylineCurve, geometry, geometry_table
from .gen import GenSpec

CURVE_VERSION = 1
GEOMETRY_COLUMNS = ("s", "x", "y", "theta", "k", "kF", "F_nu")


class FormatError(ValueError):
    """A file could not be parsed; the message names the offending field."""


def _load(source, what):
    """Parse ``source`` as inline JSON (starting with ``{``) or as a file path."""
    text = str(source)
    try:
        if text.lstrip().startswith("{"):
            return json.loads(text)
        return json.loads(Path(text).read_text())
    except OSError as exc:
        raise FormatError(f"{what}: cannot read {text!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: malformed JSON at line {exc.lineno}: {exc.msg}") from None


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


# -- anisotropy ---------------------------------------------------------------

def read_anisotropy(source):
    """Anisotropy from a JSON file or an inline JSON object."""
    d = _load(source, "anisotropy")
    try:
        return Anisotropy.from_dict(d)
    except AnisotropyError as exc:
        raise FormatError(str(exc)) from None


def write_anisotropy(a, path):
    write_json(a.to_dict(), path)


# -- curves -------------------------------------------------------------------

def curve_to_dict(c):
    return {"version": CURVE_VERSION, "vertices": c.vertices.tolist()}


def curve_from_dict(d):
    """Validated :class:`PolylineCurve`; bad structure raises :class:`FormatError`."""
    if not isinstance(d, dict):
        raise FormatError("curve: expected an object")
    if "version" not in d:
        raise FormatError("version: missing field")
    if d["version"] != CURVE_VERSION:
        raise FormatError(f"version: unsupported curve format version {d['version']!r}")
    if "vertices" not in d:
        raise FormatError("vertices: missing field")
    extra = set(d) - {"version", "vertices"}
    if extra:
        raise FormatError(f"{sorted(extra)[0]}: unknown field")
    try:
        v = np.array(d["vertices"], dtype=float)
    except (TypeError, ValueError):
        raise FormatError("vertices: expected a list of [x, y] pairs") from None
    if v.ndim != 2 or v.shape[1] != 2:
        raise FormatError("vertices: expected a list of [x, y] pairs")
    return PolylineCurve(v)


def read_curve(source):
    return curve_from_dict(_load(source, "curve"))


def write_curve(c, path):
    write_json(curve_to_dict(c), path)


# -- curve generator specs ----------------------------------------------------

def read_genspec(source):
    """GenSpec from a JSON file, inline JSON, or ``family:key=value,...`` text."""
    text = str(source)
    try:
        if text.lstrip().startswith("{") or Path(text).is_file():
            d = _load(text, "genspec")
            if not isinstance(d, dict) or "family" not in d:
                raise FormatError("family: missing field")
            extra = set(d) - {"family", "params", "M", "seed"}
            if extra:
                raise FormatError(f"{sorted(extra)[0]}: unknown field")
            return GenSpec.from_dict(d)
        return GenSpec.parse(text)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from None


def write_genspec(g, path):
    write_json(g.to_dict(), path)


# -- delimited tables ---------------------------------------------------------

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


def write_table(path, columns, rows):
    """CSV with a header line; floats with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def read_table(path):
    """``(columns, values)`` of a numeric CSV table written by :func:`write_table`."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        try:
            columns = next(r)
        except StopIteration:
            raise FormatError(f"{path}: empty table") from None
        rows = [[float(x) for x in row] for row in r]
    values = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return tuple(columns), values


def write_geometry_table(c, a, path):
    write_table(path, GEOMETRY_COLUMNS, geometry_table(geometry(c, a), c))


def write_trace(trace, path):
    rows = ([getattr(s, name) for name in trace.COLUMNS] for s in trace.samples)
    write_table(path, trace.COLUMNS, rows)


def write_batch_table(summary, path):
    cols = summary.COLUMNS
    write_table(path, cols, ([row[c] for c in cols] for row in summary.rows))


# -- SVG ------------------------------------------------------------------------

def viewport(c, pad=0.05):
    """``(xmin, ymin, xmax, ymax)`` of the curve's bounding box, padded."""
    lo, hi = c.vertices.min(axis=0), c.vertices.max(axis=0)
    margin = pad * float((hi - lo).max())
    return (lo[0] - margin, lo[1] - margin, hi[0] + margin, hi[1] + margin)


def svg_document(curves, box, width=480, stroke="#1f4e79"):
    """SVG text drawing each curve as a closed path inside the fixed ``box``."""
    x0, y0, x1, y1 = box
    height = int(round(width * (y1 - y0) / (x1 - x0)))
    sx = width / (x1 - x0)
    paths = []
    for c in curves:
        p = c.vertices
        # flip y so the picture is in the usual orientation
        pts = " ".join(f"{(x - x0) * sx:.3f},{(y1 - y) * sx:.3f}" for x, y in p)
        paths.append(f'<path d="M {pts} Z" fill="none" stroke="{stroke}" stroke-width="1"/>')
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n' + "\n".join(paths) + "\n</svg>\n")


def write_svg(curves, path, box=None, width=480):
    if isinstance(curves, PolylineCurve):
        curves = [curves]
    box = viewport(curves[0]) if box is None else box
    Path(path).write_text(svg_document(curves, box, width))


def write_snapshots(trace, outdir, svg=True):
    """Numbered curve files (and SVGs sharing the initial curve's viewport)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if not trace.snapshots:
        return []
    box = viewport(trace.snapshots[0][1])
    written = []
    for i, (_, c) in enumerate(trace.snapshots):
        stem = outdir / f"snapshot_{i:04d}"
        write_curve(c, stem.with_suffix(".json"))
        written.append(stem.with_suffix(".json"))
        if svg:
            write_svg(c, stem.with_suffix(".svg"), box)
            written.append(stem.with_suffix(".svg"))
    return written


__all__ = [
    "FormatError", "read_anisotropy", "write_anisotropy", "read_curve", "write_curve",
    "curve_to_dict", "curve_from_dict", "read_genspec", "write_genspec", "write_json",
    "write_table", "read_table", "write_geometry_table", "write_trace",
    "write_batch_table", "viewport", "svg_document", "write_svg", "write_snapshots",
]
