"""Command-line front end: scenario-driven simulation, scanning and estimation.

All outputs are CSV (plots, if wanted, are rendered externally). Exit codes:
0 success, 2 validation failure, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np

from .beamform import NoPeakError, cbf_ma, cbf_ura, padp_ma, padp_ura
from .cfrfile import CfrFormatError, read_cfr, write_cfr
from .channel import add_noise, gen_ma_cfr, gen_ura_cfr
from .compare import compare_arrays
from .geometry import Direction, uv_map
from .patterns import check_conjugate_symmetry, ma_power_pattern, ura_power_pattern
from .scenario import Scenario, ScenarioError, dump_scenario, parse_scenario
from .sic import EstimatorConfig, run_sic

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

EQUIVALENCE_TOL_DB = 1e-6


def _fmt9(x: float) -> str:
    return f"{x:.9g}"


def _common_options(fn):
    @click.option("--config", "config_path", required=True,
                  type=click.Path(exists=True, dir_okay=False),
                  help="Scenario JSON file.")
    @click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False),
                  help="Output directory.")
    @click.option("--seed", default=0, type=int, help="RNG seed for noise.")
    @click.option("--quiet", is_flag=True, help="Suppress progress messages.")
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        return fn(*args, **kwargs)
    return wrapper


def _load(config_path: str, out_dir: str, quiet: bool) -> tuple[Scenario, Path]:
    scenario = parse_scenario(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_scenario(scenario, out / "scenario_normalized.json")
    if not quiet:
        click.echo(f"scenario loaded from {config_path}")
    return scenario, out


def _guarded(fn):
    """Map exception classes onto the documented exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ScenarioError, CfrFormatError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except NoPeakError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
    return wrapper


@click.group()
def main():
    """Wideband channel sounding with multiplicative arrays."""


def _write_uv_pattern(path: Path, pattern) -> None:
    level = pattern.level_db()
    with open(path, "w") as fh:
        fh.write("u,v,level_db\n")
        for i, u in enumerate(pattern.u_axis):
            for j, v in enumerate(pattern.v_axis):
                fh.write(f"{_fmt9(u)},{_fmt9(v)},{_fmt9(level[i, j])}\n")


@main.command("synth-pattern")
@_common_options
@_guarded
def cmd_synth_pattern(config_path, out_dir, seed, quiet):
    """Narrowband URA and MA power patterns on a (u, v) lattice."""
    scenario, out = _load(config_path, out_dir, quiet)
    if scenario.ura is None:
        raise ScenarioError("synth-pattern needs a URA geometry")
    wx, wy, wx_ma, wy_ma = scenario.steered_excitations()
    axis = np.linspace(-1.0, 1.0, scenario.pattern_lattice)
    ura_pat = ura_power_pattern(wx, wy, scenario.ura, axis, axis)
    _write_uv_pattern(out / "ura_pattern.csv", ura_pat)
    if scenario.ma is None:
        if not quiet:
            click.echo("no MA geometry; URA pattern only")
        return
    ma_pat = ma_power_pattern(wx_ma, wy_ma, scenario.ma, axis, axis)
    _write_uv_pattern(out / "ma_pattern.csv", ma_pat)
    if not (check_conjugate_symmetry(wx) and check_conjugate_symmetry(wy)):
        click.echo("warning: excitations not conjugate-symmetric; "
                   "equivalence check skipped", err=True)
        return
    if scenario.is_ura_equivalent_ma():
        deviation = float(np.max(np.abs(ura_pat.level_db() - ma_pat.level_db())))
        if not quiet:
            click.echo(f"max pattern deviation: {deviation:.3e} dB")
        if deviation > EQUIVALENCE_TOL_DB:
            click.echo(f"error: URA/MA pattern deviation {deviation:.3e} dB "
                       f"exceeds {EQUIVALENCE_TOL_DB} dB", err=True)
            sys.exit(EXIT_NUMERICAL)


@main.command("simulate")
@_common_options
@_guarded
def cmd_simulate(config_path, out_dir, seed, quiet):
    """Generate per-element CFR files for the scenario's arrays."""
    scenario, out = _load(config_path, out_dir, quiet)
    if scenario.ura is None and scenario.ma is None:
        raise ScenarioError("simulate needs a URA or MA geometry")
    if scenario.ura is not None:
        cfr = gen_ura_cfr(scenario.paths, scenario.ura, scenario.freqs)
        if scenario.snr_db is not None and len(scenario.paths):
            cfr = add_noise(cfr, scenario.snr_db, seed)
        write_cfr(out / "ura_cfr.csv", cfr)
        if not quiet:
            click.echo(f"wrote {out / 'ura_cfr.csv'}")
    if scenario.ma is not None:
        ma_x, ma_y = gen_ma_cfr(scenario.paths, scenario.ma, scenario.freqs)
        if scenario.snr_db is not None and len(scenario.paths):
            ma_x = add_noise(ma_x, scenario.snr_db, seed + 1)
            ma_y = add_noise(ma_y, scenario.snr_db, seed + 2)
        write_cfr(out / "ma_x_cfr.csv", ma_x)
        write_cfr(out / "ma_y_cfr.csv", ma_y)
        if not quiet:
            click.echo(f"wrote {out / 'ma_x_cfr.csv'} and {out / 'ma_y_cfr.csv'}")


def _write_beam_csv(path: Path, beam) -> None:
    level = beam.level_db()
    with open(path, "w") as fh:
        fh.write("u,v,level_db\n")
        for i, theta in enumerate(beam.theta_deg):
            for j, phi in enumerate(beam.phi_deg):
                uv = uv_map(Direction(float(theta), float(phi) % 360.0))
                fh.write(f"{_fmt9(uv.u)},{_fmt9(uv.v)},{_fmt9(level[i, j])}\n")


def _write_padp_csv(path: Path, padp) -> None:
    level = padp.level_db()
    with open(path, "w") as fh:
        fh.write("azimuth_deg,delay_ns,level_db\n")
        for j, phi in enumerate(padp.phi_deg):
            for i, tau in enumerate(padp.delay_s):
                fh.write(f"{_fmt9(phi)},{_fmt9(tau * 1e9)},{_fmt9(level[i, j])}\n")


@main.command("beamscan")
@_common_options
@click.option("--cfr-dir", default=None, type=click.Path(file_okay=False),
              help="Directory holding CFR files (default: the output directory).")
@click.option("--theta", "theta_deg", default=None, type=float,
              help="Elevation for the PADP cut (default: compare.theta_deg).")
@_guarded
def cmd_beamscan(config_path, out_dir, seed, quiet, cfr_dir, theta_deg):
    """Beam pattern at the center frequency and a PADP cut, per array."""
    scenario, out = _load(config_path, out_dir, quiet)
    src = Path(cfr_dir) if cfr_dir is not None else out
    theta = scenario.compare_theta_deg if theta_deg is None else theta_deg
    grid = scenario.scan_grid()
    fc = scenario.freqs.f_center_hz
    found = False
    ura_file = src / "ura_cfr.csv"
    if ura_file.exists():
        cfr = read_cfr(ura_file)
        taper = scenario.ura_taper()
        _write_beam_csv(out / "ura_beam.csv", cbf_ura(cfr, grid, fc, taper))
        _write_padp_csv(out / "ura_padp.csv",
                        padp_ura(cfr, theta, grid.phi_deg, scenario.pad_factor,
                                 taper=taper))
        found = True
    ma_x_file, ma_y_file = src / "ma_x_cfr.csv", src / "ma_y_cfr.csv"
    if ma_x_file.exists() and ma_y_file.exists():
        ma_x, ma_y = read_cfr(ma_x_file), read_cfr(ma_y_file)
        taper = scenario.ma_taper()
        _write_beam_csv(out / "ma_beam.csv", cbf_ma(ma_x, ma_y, grid, fc, taper))
        _write_padp_csv(out / "ma_padp.csv",
                        padp_ma(ma_x, ma_y, theta, grid.phi_deg,
                                scenario.pad_factor, taper=taper))
        found = True
    if not found:
        raise OSError(f"no CFR files found under {src}")
    if not quiet:
        click.echo(f"beam/PADP CSVs written to {out}")


@main.command("estimate")
@_common_options
@click.option("--cfr-dir", default=None, type=click.Path(file_okay=False),
              help="Directory holding MA CFR files (default: the output directory).")
@_guarded
def cmd_estimate(config_path, out_dir, seed, quiet, cfr_dir):
    """Run the SIC estimator on MA CFR files and emit the path table."""
    scenario, out = _load(config_path, out_dir, quiet)
    src = Path(cfr_dir) if cfr_dir is not None else out
    ma_x_file, ma_y_file = src / "ma_x_cfr.csv", src / "ma_y_cfr.csv"
    if not (ma_x_file.exists() and ma_y_file.exists()):
        raise OSError(f"MA CFR files not found under {src}")
    ma_x, ma_y = read_cfr(ma_x_file), read_cfr(ma_y_file)
    config = EstimatorConfig(scan=scenario.scan_grid(),
                             epsilon_db=scenario.epsilon_db,
                             max_iterations=scenario.max_iterations,
                             gate_db=scenario.gate_db,
                             pad_factor=scenario.pad_factor)

    def snapshot(q, padp):
        _write_padp_csv(out / f"ma_padp_iter{q}.csv", padp)

    report = run_sic(ma_x, ma_y, config, snapshot_hook=snapshot)
    with open(out / "paths.csv", "w") as fh:
        fh.write("iteration,power_db,delay_ns,elevation_deg,azimuth_deg,stop_reason\n")
        for p in report.paths:
            fh.write(f"{p.iteration},{_fmt9(p.amplitude_db)},"
                     f"{_fmt9(p.delay_s * 1e9)},{_fmt9(p.direction.theta_deg)},"
                     f"{_fmt9(p.direction.phi_deg)},{report.stop_reason}\n")
    if not quiet:
        click.echo(f"{len(report.paths)} paths recovered "
                   f"(stop: {report.stop_reason}); table in {out / 'paths.csv'}")


@main.command("compare")
@_common_options
@_guarded
def cmd_compare(config_path, out_dir, seed, quiet):
    """URA CBF vs MA SIC estimates on the same synthetic channel."""
    scenario, out = _load(config_path, out_dir, quiet)
    result = compare_arrays(scenario, seed)
    if result.count_mismatch:
        click.echo(f"warning: URA found {result.ura_count} paths, "
                   f"MA found {result.ma_count}", err=True)
    with open(out / "comparison.csv", "w") as fh:
        fh.write("path,ura_delay_ns,ura_azimuth_deg,ura_power_db,"
                 "ma_delay_ns,ma_azimuth_deg,ma_power_db,"
                 "err_delay_ns,err_azimuth_deg,err_power_db\n")
        for row in result.rows:
            ed, ea, ep = row.errors
            fh.write(f"{row.index},{_fmt9(row.ura_delay_ns)},"
                     f"{_fmt9(row.ura_azimuth_deg)},{_fmt9(row.ura_power_db)},"
                     f"{_fmt9(row.ma_delay_ns)},{_fmt9(row.ma_azimuth_deg)},"
                     f"{_fmt9(row.ma_power_db)},{_fmt9(ed)},{_fmt9(ea)},"
                     f"{_fmt9(ep)}\n")
    if not quiet:
        click.echo(f"comparison table in {out / 'comparison.csv'}")


if __name__ == "__main__":
    main()
