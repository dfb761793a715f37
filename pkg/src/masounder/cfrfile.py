"""On-disk CFR exchange format: '#' key=value headers plus CSV body rows."""

from __future__ import annotations

import numpy as np

from .channel import CfrSet
from .geometry import FrequencyGrid, MaGeometry, UraGeometry

FORMAT_VERSION = 1


class CfrFormatError(ValueError):
    """Malformed or inconsistent CFR file."""


def _header_fields(cfr: CfrSet) -> dict:
    geom = cfr.geometry
    if cfr.layout == "ura":
        if geom.dx_wl != geom.dy_wl:
            raise CfrFormatError("file format carries one spacing; URA needs dx == dy")
        nx, ny, spacing = geom.m_count, geom.n_count, geom.dx_wl
    else:
        nx, ny, spacing = geom.x_count, geom.y_count, geom.d_wl
    return {
        "format_version": FORMAT_VERSION,
        "layout": cfr.layout,
        "f_start_hz": cfr.freqs.f_start_hz,
        "f_stop_hz": cfr.freqs.f_stop_hz,
        "n_freq": cfr.freqs.n_points,
        "n_elem_x": nx,
        "n_elem_y": ny,
        "spacing_wl": spacing,
        "ref_freq_hz": cfr.ref_freq_hz,
    }


def write_cfr(path, cfr: CfrSet) -> None:
    """Serialize one CFR set; complex values keep 17 significant digits."""
    fields = _header_fields(cfr)
    with open(path, "w") as fh:
        for key, value in fields.items():
            if isinstance(value, float):
                fh.write(f"# {key}={value:.17g}\n")
            else:
                fh.write(f"# {key}={value}\n")
        if cfr.layout == "ura":
            xi = cfr.geometry.x_indices
            yi = cfr.geometry.y_indices
            for a, m in enumerate(xi):
                for b, n in enumerate(yi):
                    for l in range(cfr.freqs.n_points):
                        z = cfr.values[a, b, l]
                        fh.write(f"{m},{n},{l},{z.real:.17g},{z.imag:.17g}\n")
        else:
            idx = cfr.geometry.x_indices if cfr.layout == "ma_x" else cfr.geometry.y_indices
            for a, m in enumerate(idx):
                for l in range(cfr.freqs.n_points):
                    z = cfr.values[a, l]
                    if cfr.layout == "ma_x":
                        fh.write(f"{m},0,{l},{z.real:.17g},{z.imag:.17g}\n")
                    else:
                        fh.write(f"0,{m},{l},{z.real:.17g},{z.imag:.17g}\n")


def read_cfr(path) -> CfrSet:
    """Parse a CFR file back into a CfrSet; round-trips write_cfr exactly."""
    headers: dict[str, str] = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                headers[key.strip()] = value.strip()
            else:
                parts = line.split(",")
                if len(parts) != 5:
                    raise CfrFormatError(f"malformed body row: {line!r}")
                rows.append(parts)
    try:
        version = int(headers["format_version"])
        layout = headers["layout"]
        freqs = FrequencyGrid(float(headers["f_start_hz"]),
                              float(headers["f_stop_hz"]),
                              int(headers["n_freq"]))
        nx = int(headers["n_elem_x"])
        ny = int(headers["n_elem_y"])
        spacing = float(headers["spacing_wl"])
        ref_freq = float(headers["ref_freq_hz"])
    except KeyError as exc:
        raise CfrFormatError(f"missing header key: {exc}") from exc
    if version != FORMAT_VERSION:
        raise CfrFormatError(f"unsupported format_version {version}")
    if layout == "ura":
        geometry = UraGeometry(nx, ny, spacing, spacing)
        values = np.zeros((nx, ny, freqs.n_points), complex)
    elif layout in ("ma_x", "ma_y"):
        geometry = MaGeometry(nx, ny, spacing)
        count = nx if layout == "ma_x" else ny
        values = np.zeros((count, freqs.n_points), complex)
    else:
        raise CfrFormatError(f"unknown layout {layout!r}")
    seen = np.zeros(values.shape, bool)
    for mx, my, fl, re, im in rows:
        m, n, l = int(mx), int(my), int(fl)
        z = complex(float(re), float(im))
        if l < 0 or l >= freqs.n_points:
            raise CfrFormatError(f"frequency index {l} out of range")
        if layout == "ura":
            a, b = m + (nx - 1) // 2, n + (ny - 1) // 2
            if not (0 <= a < nx and 0 <= b < ny):
                raise CfrFormatError(f"element index ({m},{n}) out of range")
            key = (a, b, l)
        elif layout == "ma_x":
            if my != "0" and int(my) != 0:
                raise CfrFormatError("ma_x rows must have elem_index_y == 0")
            a = m + (nx - 1) // 2
            if not 0 <= a < nx:
                raise CfrFormatError(f"element index {m} out of range")
            key = (a, l)
        else:
            if int(mx) != 0:
                raise CfrFormatError("ma_y rows must have elem_index_x == 0")
            a = n + (ny - 1) // 2
            if not 0 <= a < ny:
                raise CfrFormatError(f"element index {n} out of range")
            key = (a, l)
        if seen[key]:
            raise CfrFormatError(f"duplicate row for entry {key}")
        seen[key] = True
        values[key] = z
    if not seen.all():
        raise CfrFormatError(
            f"body covers {int(seen.sum())} entries, header implies {seen.size}")
    return CfrSet(layout, values, freqs, geometry, ref_freq)
