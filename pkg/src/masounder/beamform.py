"""Classical beamforming, power-angle-delay profiles and the fake-path predictor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .channel import CfrSet
from .geometry import FrequencyGrid, PathComponent, ScanGrid, delay_axis, uv_map

DB_FLOOR = 1e-30


class NoPeakError(RuntimeError):
    """No usable maximum found (all-zero or below the numerical floor)."""


def _level_db(values: np.ndarray, kind: str) -> np.ndarray:
    """Display convention: URA quantities are field-like (20 log10), MA
    quantities are products of two fields (10 log10)."""
    mag = np.maximum(np.abs(values), DB_FLOOR)
    scale = 20.0 if kind == "ura" else 10.0
    return scale * np.log10(mag)


@dataclass(frozen=True)
class BeamPattern:
    """Complex beamformed response over (theta, phi) at one frequency."""

    values: np.ndarray  # (n_theta, n_phi)
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    frequency_hz: float
    kind: str  # 'ura' | 'ma'

    def level_db(self) -> np.ndarray:
        return _level_db(self.values, self.kind)


@dataclass(frozen=True)
class UvBeam:
    """Complex beamformed response over a direction-cosine lattice.

    Unlike a physical (theta, phi) scan this covers the whole (u, v)
    square, including the invisible region u^2 + v^2 > 1 where the
    multiplicative array places some of its cross-product terms.
    """

    values: np.ndarray  # (n_u, n_v)
    u_axis: np.ndarray
    v_axis: np.ndarray
    frequency_hz: float
    kind: str  # 'ura' | 'ma'

    def level_db(self) -> np.ndarray:
        return _level_db(self.values, self.kind)


@dataclass(frozen=True)
class Padp:
    """Complex angle-delay profile over (delay, phi) at fixed elevation."""

    values: np.ndarray  # (n_delay, n_phi)
    delay_s: np.ndarray
    phi_deg: np.ndarray
    theta_deg: float
    kind: str  # 'ura' | 'ma'

    def level_db(self) -> np.ndarray:
        return _level_db(self.values, self.kind)


def _freq_index(freqs: FrequencyGrid, f_hz: float) -> int:
    idx = int(round((f_hz - freqs.f_start_hz) / freqs.spacing_hz))
    if idx < 0 or idx >= freqs.n_points or \
            abs(freqs.points[idx] - f_hz) > 1e-6 * freqs.spacing_hz:
        raise ValueError(f"frequency {f_hz} Hz is not on the sweep grid")
    return idx


def _scan_cosines(theta_deg: np.ndarray, phi_deg: np.ndarray):
    st = np.sin(np.radians(np.asarray(theta_deg, float)))
    pp = np.radians(np.asarray(phi_deg, float))
    u = st[:, None] * np.cos(pp)[None, :]
    v = st[:, None] * np.sin(pp)[None, :]
    return u, v


def _conj_steer(indices: np.ndarray, spacing_wl: float, cosines: np.ndarray,
                scale: float) -> np.ndarray:
    """Conjugated steering matrix, shape (n_elem, n_points)."""
    return np.exp(-2j * np.pi * spacing_wl * scale * np.outer(indices, cosines.ravel()))


def _phase_scale(cfr: CfrSet, f_hz: float) -> float:
    return 1.0 if cfr.narrowband_phase else f_hz / cfr.ref_freq_hz


def _resolve_window(window, n_points: int) -> np.ndarray | None:
    if window is None:
        return None
    if isinstance(window, str):
        if window == "hann":
            win = np.hanning(n_points)
        else:
            raise ValueError(f"unknown window {window!r}")
    else:
        win = np.asarray(window, float)
        if win.shape != (n_points,):
            raise ValueError("window length must match the frequency grid")
    return win / win.mean()


def cbf_ura(cfr: CfrSet, grid: ScanGrid, f_hz: float,
            taper: tuple[np.ndarray, np.ndarray] | None = None) -> BeamPattern:
    """Delay-and-sum beam pattern of a URA at a single sweep frequency.

    Weights are normalized by their magnitude sum, so a single unit path
    scanned at its own direction gives |B| = 1.
    """
    if cfr.layout != "ura":
        raise ValueError("cbf_ura needs a URA-layout CFR")
    geom = cfr.geometry
    fi = _freq_index(cfr.freqs, f_hz)
    tx = np.ones(geom.m_count) if taper is None else np.asarray(taper[0])
    ty = np.ones(geom.n_count) if taper is None else np.asarray(taper[1])
    if tx.size != geom.m_count or ty.size != geom.n_count:
        raise ValueError("taper lengths must match the URA geometry")
    u, v = _scan_cosines(grid.theta_deg, grid.phi_deg)
    scale = _phase_scale(cfr, f_hz)
    ax = _conj_steer(geom.x_indices, geom.dx_wl, u, scale) * tx[:, None]
    ay = _conj_steer(geom.y_indices, geom.dy_wl, v, scale) * ty[:, None]
    h = cfr.values[:, :, fi]
    b = np.einsum("mp,mn,np->p", ax, h, ay, optimize=True) / (np.sum(np.abs(tx)) * np.sum(np.abs(ty)))
    return BeamPattern(b.reshape(u.shape), grid.theta_deg, grid.phi_deg, f_hz, "ura")


def cbf_ma(cfr_x: CfrSet, cfr_y: CfrSet, grid: ScanGrid, f_hz: float,
           taper: tuple[np.ndarray, np.ndarray] | None = None) -> BeamPattern:
    """Product of the two normalized sub-array beamforming sums."""
    if cfr_x.layout != "ma_x" or cfr_y.layout != "ma_y":
        raise ValueError("cbf_ma needs ma_x and ma_y CFRs")
    geom = cfr_x.geometry
    fi = _freq_index(cfr_x.freqs, f_hz)
    tx = np.ones(geom.x_count) if taper is None else np.asarray(taper[0])
    ty = np.ones(geom.y_count) if taper is None else np.asarray(taper[1])
    if tx.size != geom.x_count or ty.size != geom.y_count:
        raise ValueError("taper lengths must match the MA geometry")
    u, v = _scan_cosines(grid.theta_deg, grid.phi_deg)
    scale = _phase_scale(cfr_x, f_hz)
    bx = (tx * cfr_x.values[:, fi]) @ _conj_steer(geom.x_indices, geom.d_wl, u, scale)
    by = (ty * cfr_y.values[:, fi]) @ _conj_steer(geom.y_indices, geom.d_wl, v, scale)
    b = (bx / np.sum(np.abs(tx))) * (by / np.sum(np.abs(ty)))
    return BeamPattern(b.reshape(u.shape), grid.theta_deg, grid.phi_deg, f_hz, "ma")


def cbf_ura_uv(cfr: CfrSet, u_axis: np.ndarray, v_axis: np.ndarray, f_hz: float,
               taper: tuple[np.ndarray, np.ndarray] | None = None) -> UvBeam:
    """URA beam pattern evaluated on a direction-cosine lattice."""
    if cfr.layout != "ura":
        raise ValueError("cbf_ura_uv needs a URA-layout CFR")
    geom = cfr.geometry
    fi = _freq_index(cfr.freqs, f_hz)
    tx = np.ones(geom.m_count) if taper is None else np.asarray(taper[0])
    ty = np.ones(geom.n_count) if taper is None else np.asarray(taper[1])
    if tx.size != geom.m_count or ty.size != geom.n_count:
        raise ValueError("taper lengths must match the URA geometry")
    u_axis = np.asarray(u_axis, float)
    v_axis = np.asarray(v_axis, float)
    scale = _phase_scale(cfr, f_hz)
    ax = _conj_steer(geom.x_indices, geom.dx_wl, u_axis, scale) * tx[:, None]
    ay = _conj_steer(geom.y_indices, geom.dy_wl, v_axis, scale) * ty[:, None]
    b = np.einsum("mu,mn,nv->uv", ax, cfr.values[:, :, fi], ay, optimize=True)
    b /= np.sum(np.abs(tx)) * np.sum(np.abs(ty))
    return UvBeam(b, u_axis, v_axis, f_hz, "ura")


def cbf_ma_uv(cfr_x: CfrSet, cfr_y: CfrSet, u_axis: np.ndarray,
              v_axis: np.ndarray, f_hz: float,
              taper: tuple[np.ndarray, np.ndarray] | None = None) -> UvBeam:
    """MA beam pattern on a direction-cosine lattice (separable product)."""
    if cfr_x.layout != "ma_x" or cfr_y.layout != "ma_y":
        raise ValueError("cbf_ma_uv needs ma_x and ma_y CFRs")
    geom = cfr_x.geometry
    fi = _freq_index(cfr_x.freqs, f_hz)
    tx = np.ones(geom.x_count) if taper is None else np.asarray(taper[0])
    ty = np.ones(geom.y_count) if taper is None else np.asarray(taper[1])
    if tx.size != geom.x_count or ty.size != geom.y_count:
        raise ValueError("taper lengths must match the MA geometry")
    u_axis = np.asarray(u_axis, float)
    v_axis = np.asarray(v_axis, float)
    scale = _phase_scale(cfr_x, f_hz)
    bx = (tx * cfr_x.values[:, fi]) @ _conj_steer(geom.x_indices, geom.d_wl,
                                                  u_axis, scale)
    by = (ty * cfr_y.values[:, fi]) @ _conj_steer(geom.y_indices, geom.d_wl,
                                                  v_axis, scale)
    b = np.outer(bx / np.sum(np.abs(tx)), by / np.sum(np.abs(ty)))
    return UvBeam(b, u_axis, v_axis, f_hz, "ma")


def inverse_delay_transform(spectrum: np.ndarray, freqs: FrequencyGrid,
                            pad_factor: int) -> np.ndarray:
    """Zero-padded sum over frequency of X(f) exp(+j 2 pi f tau), divided by L.

    Operates along the last axis; output length is L * pad_factor on the
    bins of delay_axis(freqs, pad_factor).
    """
    L = freqs.n_points
    n = L * pad_factor
    out = np.fft.ifft(spectrum, n=n, axis=-1) * (n / L)
    tau = delay_axis(freqs, pad_factor)
    return out * np.exp(2j * np.pi * freqs.f_start_hz * tau)


def forward_delay_transform(profile: np.ndarray, freqs: FrequencyGrid,
                            pad_factor: int) -> np.ndarray:
    """Exact inverse of inverse_delay_transform (delay bins back to the sweep)."""
    L = freqs.n_points
    n = L * pad_factor
    tau = delay_axis(freqs, pad_factor)
    descreened = profile * np.exp(-2j * np.pi * freqs.f_start_hz * tau)
    return np.fft.fft(descreened, axis=-1)[..., :L] * (L / n)


def cfr_to_cir(values: np.ndarray, freqs: FrequencyGrid, pad_factor: int) -> np.ndarray:
    """Per-element impulse response on the padded delay axis."""
    return inverse_delay_transform(values, freqs, pad_factor)


def cir_to_cfr(cir: np.ndarray, freqs: FrequencyGrid, pad_factor: int) -> np.ndarray:
    """Per-element frequency response recovered from a padded impulse response."""
    return forward_delay_transform(cir, freqs, pad_factor)


def _beam_over_sweep_ura(cfr: CfrSet, theta_deg: float, phi_deg: np.ndarray,
                         taper) -> np.ndarray:
    """B(f, phi) at fixed elevation, shape (n_phi, L)."""
    geom = cfr.geometry
    tx = np.ones(geom.m_count) if taper is None else np.asarray(taper[0])
    ty = np.ones(geom.n_count) if taper is None else np.asarray(taper[1])
    u, v = _scan_cosines(np.array([theta_deg]), phi_deg)
    norm = np.sum(np.abs(tx)) * np.sum(np.abs(ty))
    if cfr.narrowband_phase:
        ax = _conj_steer(geom.x_indices, geom.dx_wl, u, 1.0) * tx[:, None]
        ay = _conj_steer(geom.y_indices, geom.dy_wl, v, 1.0) * ty[:, None]
        return np.einsum("mp,mnl,np->pl", ax, cfr.values, ay, optimize=True) / norm
    out = np.empty((phi_deg.size, cfr.freqs.n_points), complex)
    for li, f in enumerate(cfr.freqs.points):
        scale = f / cfr.ref_freq_hz
        ax = _conj_steer(geom.x_indices, geom.dx_wl, u, scale) * tx[:, None]
        ay = _conj_steer(geom.y_indices, geom.dy_wl, v, scale) * ty[:, None]
        out[:, li] = np.einsum("mp,mn,np->p", ax, cfr.values[:, :, li], ay, optimize=True) / norm
    return out


def _beam_over_sweep_ma(cfr_x: CfrSet, cfr_y: CfrSet, theta_deg: float,
                        phi_deg: np.ndarray, taper) -> np.ndarray:
    geom = cfr_x.geometry
    tx = np.ones(geom.x_count) if taper is None else np.asarray(taper[0])
    ty = np.ones(geom.y_count) if taper is None else np.asarray(taper[1])
    u, v = _scan_cosines(np.array([theta_deg]), phi_deg)
    if cfr_x.narrowband_phase:
        bx = _conj_steer(geom.x_indices, geom.d_wl, u, 1.0).T @ (tx[:, None] * cfr_x.values)
        by = _conj_steer(geom.y_indices, geom.d_wl, v, 1.0).T @ (ty[:, None] * cfr_y.values)
    else:
        L = cfr_x.freqs.n_points
        bx = np.empty((phi_deg.size, L), complex)
        by = np.empty((phi_deg.size, L), complex)
        for li, f in enumerate(cfr_x.freqs.points):
            scale = f / cfr_x.ref_freq_hz
            bx[:, li] = _conj_steer(geom.x_indices, geom.d_wl, u, scale).T @ \
                (tx * cfr_x.values[:, li])
            by[:, li] = _conj_steer(geom.y_indices, geom.d_wl, v, scale).T @ \
                (ty * cfr_y.values[:, li])
    return (bx / np.sum(np.abs(tx))) * (by / np.sum(np.abs(ty)))


def padp_ura(cfr: CfrSet, theta_deg: float, phi_deg: np.ndarray,
             pad_factor: int = 4, taper=None, window=None) -> Padp:
    """Inverse transform of the URA beam pattern over the sweep."""
    if cfr.layout != "ura":
        raise ValueError("padp_ura needs a URA-layout CFR")
    phi_deg = np.asarray(phi_deg, float)
    spectrum = _beam_over_sweep_ura(cfr, theta_deg, phi_deg, taper)
    win = _resolve_window(window, cfr.freqs.n_points)
    if win is not None:
        spectrum = spectrum * win
    values = inverse_delay_transform(spectrum, cfr.freqs, pad_factor).T
    return Padp(values, delay_axis(cfr.freqs, pad_factor), phi_deg, theta_deg, "ura")


def padp_ma(cfr_x: CfrSet, cfr_y: CfrSet, theta_deg: float, phi_deg: np.ndarray,
            pad_factor: int = 4, taper=None, window=None) -> Padp:
    """Inverse transform of the product MA beam pattern; true-path delays double."""
    if cfr_x.layout != "ma_x" or cfr_y.layout != "ma_y":
        raise ValueError("padp_ma needs ma_x and ma_y CFRs")
    phi_deg = np.asarray(phi_deg, float)
    spectrum = _beam_over_sweep_ma(cfr_x, cfr_y, theta_deg, phi_deg, taper)
    win = _resolve_window(window, cfr_x.freqs.n_points)
    if win is not None:
        spectrum = spectrum * win
    values = inverse_delay_transform(spectrum, cfr_x.freqs, pad_factor).T
    return Padp(values, delay_axis(cfr_x.freqs, pad_factor), phi_deg, theta_deg, "ma")


@dataclass(frozen=True)
class PredictedTerm:
    """One of the K^2 beam/PADP terms produced by the MA cross products."""

    u: float
    v: float
    delay_s: float
    level_db: float
    origin: tuple[int, int]

    @property
    def is_true(self) -> bool:
        return self.origin[0] == self.origin[1]


def predict_ma_terms(paths) -> list[PredictedTerm]:
    """Enumerate all K^2 true/fake terms of the MA for a known path set.

    Term (i, j) sits at (u_i, v_j) with delay tau_i + tau_j and displayed
    level (P_i + P_j)/2 dB; i == j marks a true path at doubled delay.
    """
    path_list = list(paths)
    if not path_list:
        raise ValueError("predict_ma_terms needs at least one path")
    terms = []
    for i, pi in enumerate(path_list):
        for j, pj in enumerate(path_list):
            ui = uv_map(pi.direction).u
            vj = uv_map(pj.direction).v
            level = 0.5 * (pi.power_db + pj.power_db)
            terms.append(PredictedTerm(ui, vj, pi.delay_s + pj.delay_s, level, (i, j)))
    return terms


@dataclass(frozen=True)
class Peak:
    """A local maximum of a beam pattern or PADP."""

    level_db: float
    row: int
    col: int
    theta_deg: float | None = None
    phi_deg: float | None = None
    delay_s: float | None = None
    u: float | None = None
    v: float | None = None


def _plateau_peaks(level: np.ndarray) -> list[tuple[int, int]]:
    """Cells >= all 8 neighbours, with equal-valued plateaus merged."""
    neigh = ndimage.maximum_filter(level, size=3, mode="constant", cval=-np.inf)
    mask = level >= neigh
    labels, _ = ndimage.label(mask, structure=np.ones((3, 3), int))
    rows, cols = np.nonzero(mask)
    labs = labels[rows, cols]
    order = np.lexsort((cols, rows, labs))
    sorted_labs = labs[order]
    first = np.nonzero(np.r_[True, sorted_labs[1:] != sorted_labs[:-1]])[0]
    keep = order[first]
    return [(int(r), int(c)) for r, c in zip(rows[keep], cols[keep])]


def find_peaks(pattern: BeamPattern | Padp | UvBeam, dynamic_range_db: float,
               min_separation: int = 3) -> list[Peak]:
    """Ordered local maxima above (global max - dynamic_range_db).

    Maxima closer than min_separation grid cells (Chebyshev distance) to a
    stronger accepted peak are suppressed. Ties break toward the lowest
    delay, then lowest azimuth, then lowest elevation (or lowest u, then v
    on a direction-cosine lattice).
    """
    level = pattern.level_db()
    if level.size == 0:
        raise ValueError("empty grid")
    is_padp = isinstance(pattern, Padp)
    cells = _plateau_peaks(level)
    top = max(level[r, c] for r, c in cells)
    cells = [(r, c) for r, c in cells if level[r, c] >= top - dynamic_range_db]
    # Padp rows are delay, cols azimuth; BeamPattern rows are elevation,
    # cols azimuth; UvBeam rows are u, cols v.
    tiebreak = (lambda rc: (rc[1], rc[0])) if isinstance(pattern, BeamPattern) \
        else (lambda rc: (rc[0], rc[1]))
    cells.sort(key=lambda rc: (-level[rc], *tiebreak(rc)))
    accepted: list[tuple[int, int]] = []
    for r, c in cells:
        if all(max(abs(r - ar), abs(c - ac)) >= min_separation for ar, ac in accepted):
            accepted.append((r, c))
    peaks = []
    for r, c in accepted:
        if is_padp:
            peaks.append(Peak(float(level[r, c]), r, c,
                              theta_deg=pattern.theta_deg,
                              phi_deg=float(pattern.phi_deg[c]),
                              delay_s=float(pattern.delay_s[r])))
        elif isinstance(pattern, UvBeam):
            peaks.append(Peak(float(level[r, c]), r, c,
                              u=float(pattern.u_axis[r]),
                              v=float(pattern.v_axis[c])))
        else:
            peaks.append(Peak(float(level[r, c]), r, c,
                              theta_deg=float(pattern.theta_deg[r]),
                              phi_deg=float(pattern.phi_deg[c])))
    return peaks
