"""Command line front end: one subcommand per experiment.

Every run writes a single CSV or JSON file. CSV files start with a ``#``
line holding the JSON metadata (echoed config, package version, summary);
JSON files carry the same block under ``"meta"``.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__, dynamics, gate, spectrum
from .driving import DriveParams
from .errors import NumericalError

EXPERIMENTS = (
    "spectrum",
    "decay_table",
    "trajectories",
    "scheme_compare",
    "detuning_sweep",
    "gate_report",
    "dissipation_sweep",
)

SUBCOMMANDS = {
    "spectrum": "spectrum",
    "decay": "decay_table",
    "evolve": "trajectories",
    "compare": "scheme_compare",
    "sweep-detuning": "detuning_sweep",
    "gate": "gate_report",
    "sweep-dissipation": "dissipation_sweep",
}

DEFAULT_FORMAT = {"gate_report": "json"}


@dataclass
class Physical:
    omega: float = 1e9  # s^-1
    kappa1: float = 1e6  # s^-1
    ratio_kappa2: float = 0.3439
    ratio_kappa3: float = 0.1520


@dataclass
class Sweep:
    axis: str = "both"
    max_detuning: float = 0.3  # units of Omega
    kappa_max: float = 0.01  # kappa_1/Omega


@dataclass
class ExperimentConfig:
    experiment: str = "gate_report"
    physical: Physical = field(default_factory=Physical)
    sweep: Sweep = field(default_factory=Sweep)
    ez_v_per_cm: list = field(default_factory=lambda: [0.0, 100.0, 200.0, 500.0, 1000.0])
    n_levels: int = 6
    grid_points: int = spectrum.DEFAULT_POINTS
    points: int = 61
    initial: str = "10"
    t_max: float = 2 * math.pi  # Omega t
    coherences: bool = False
    output: str = ""
    format: str = ""

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "physical" in data:
            data["physical"] = Physical(**data["physical"])
        if "sweep" in data:
            data["sweep"] = Sweep(**data["sweep"])
        if "ez_v_per_cm" in data:
            data["ez_v_per_cm"] = [float(v) for v in data["ez_v_per_cm"]]
        return cls(**data)

    def to_dict(self):
        return asdict(self)

    @property
    def kappa1_over_omega(self):
        return self.physical.kappa1 / self.physical.omega

    def drive(self):
        return DriveParams.resonant(
            kappa_1=self.kappa1_over_omega,
            ratio_2=self.physical.ratio_kappa2,
            ratio_3=self.physical.ratio_kappa3,
        )

    @property
    def fmt(self):
        return self.format or DEFAULT_FORMAT.get(self.experiment, "csv")


def validate(config):
    """Return a list of human-readable violations; empty if ``run`` accepts it."""
    v = []
    if config.experiment not in EXPERIMENTS:
        v.append(f"experiment: unknown tag {config.experiment!r} (expected one of {', '.join(EXPERIMENTS)})")
    ph = config.physical
    if not ph.omega > 0:
        v.append("physical.omega must be > 0")
    if not ph.kappa1 >= 0:
        v.append("physical.kappa1 must be >= 0")
    for name in ("ratio_kappa2", "ratio_kappa3"):
        if not getattr(ph, name) >= 0:
            v.append(f"physical.{name} must be >= 0")
    if ph.omega > 0 and ph.kappa1 / ph.omega > 0.1:
        v.append("physical.kappa1 must not exceed 0.1 * omega")
    sw = config.sweep
    if sw.axis not in ("delta_1", "delta_2", "both"):
        v.append(f"sweep.axis must be delta_1, delta_2 or both, got {sw.axis!r}")
    if abs(sw.max_detuning) > 0.5:
        v.append("sweep.max_detuning must satisfy |Delta| <= 0.5 Omega (dynamics regime bound)")
    if not 0 <= sw.kappa_max <= 0.1:
        v.append("sweep.kappa_max must lie in [0, 0.1] (kappa_1/Omega)")
    if any(not e >= 0 for e in config.ez_v_per_cm):
        v.append("ez_v_per_cm entries must be >= 0")
    if not config.ez_v_per_cm:
        v.append("ez_v_per_cm must not be empty")
    if not 2 <= config.n_levels <= 6:
        v.append("n_levels must lie in 2..6")
    if config.grid_points < 2000:
        v.append("grid_points must be >= 2000")
    if config.points < 2:
        v.append("points must be >= 2")
    if config.initial not in dynamics.INDEX4:
        v.append(f"initial must be one of 00, 01, 10, 11, got {config.initial!r}")
    if not config.t_max > 0:
        v.append("t_max must be > 0")
    if config.fmt not in ("csv", "json"):
        v.append(f"format must be csv or json, got {config.fmt!r}")
    return v


def _num(x):
    return format(float(x), ".12g")


def _meta(config, summary=None):
    meta = {"config": config.to_dict(), "version": __version__}
    if summary:
        meta["summary"] = summary
    return meta


def write_table(path, meta, columns, rows, fmt):
    path = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_num(x) if isinstance(x, (float, np.floating)) else x for x in row])
        path.write_text(buf.getvalue())
    else:
        data = {"meta": meta, "columns": list(columns),
                "rows": [[float(_num(x)) if isinstance(x, (float, np.floating)) else x for x in r]
                         for r in rows]}
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_output(path):
    """Parse a file written by :func:`run`; returns ``(meta, columns, rows)``.

    CSV cells come back as strings. A JSON gate report returns the report
    dict in place of ``rows`` and ``None`` for ``columns``.
    """
    text = Path(path).read_text()
    if text.startswith("# "):
        head, _, body = text.partition("\n")
        meta = json.loads(head[2:])
        reader = list(csv.reader(io.StringIO(body)))
        return meta, reader[0], reader[1:]
    data = json.loads(text)
    if "columns" in data:
        return data["meta"], data["columns"], data["rows"]
    meta = data.pop("meta")
    return meta, None, data


def _spectrum(config):
    rows = []
    for ez in config.ez_v_per_cm:
        states = spectrum.solve_stark_spectrum(
            ez * spectrum.V_PER_CM, config.n_levels, points=config.grid_points
        )
        for s in states:
            rows.append([
                ez, s.n,
                s.energy / spectrum.const.e * 1e3,
                spectrum.expected_z(s) * 1e9,
                spectrum.dvdz_element(s, ez * spectrum.V_PER_CM),
            ])
    return ["E_z_V_per_cm", "n", "energy_meV", "expected_z_nm", "dvdz_N"], rows, None


def _decay(config):
    cols = ["E_z_V_per_cm"] + [f"ratio_{n}_2" for n in range(3, config.n_levels + 1)]
    rows = []
    for ez in config.ez_v_per_cm:
        model = spectrum.decay_rate_ratios(ez * spectrum.V_PER_CM, config.n_levels,
                                           points=config.grid_points)
        rows.append([ez] + model.table_row())
    return cols, rows, None


def _trajectories(config):
    p = config.drive()
    rho0 = np.zeros((4, 4), dtype=complex)
    k = dynamics.INDEX4[config.initial]
    rho0[k, k] = 1.0
    times = np.linspace(0.0, config.t_max, config.points)
    traj = dynamics.evolve_master(rho0, dynamics.coherent_schedule(p, config.t_max), times)
    labels = list(dynamics.INDEX4)
    cols = ["omega_t"] + [f"p{lab}" for lab in labels]
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    if config.coherences:
        for i, j in pairs:
            cols += [f"re_{labels[i]}_{labels[j]}", f"im_{labels[i]}_{labels[j]}"]
    rows = []
    for t, rho, pop in zip(times, traj.states, traj.populations):
        row = [t] + list(pop)
        if config.coherences:
            for i, j in pairs:
                row += [rho[i, j].real, rho[i, j].imag]
        rows.append(row)
    summary = {"t_seconds_per_unit": 1.0 / config.physical.omega}
    return cols, rows, summary


def _compare(config):
    p = config.drive()
    t_end = 1.2 * dynamics.scheme_period(dynamics.TWO_STEP, p)
    times = np.linspace(0.0, t_end, config.points)
    rho0 = np.diag([0.0, 1.0, 0.0]).astype(complex)
    cols = ["omega_t"]
    series = []
    summary = {}
    for scheme in (dynamics.COHERENT, dynamics.TWO_STEP):
        traj = dynamics.evolve_master(rho0, dynamics.make_schedule(scheme, p, t_end), times)
        series.append(traj.populations[:, dynamics.INDEX3["11"]])
        cols.append(f"fidelity_{scheme}")
        t_pk, f_pk = dynamics.peak_transfer_search(scheme, p)
        summary[scheme] = {"t_peak": t_pk, "f_peak": f_pk}
    rows = [[t, a, b] for t, a, b in zip(times, *series)]
    return cols, rows, summary


def _detuning(config):
    p = config.drive()
    axes = ["delta_1", "delta_2"] if config.sweep.axis == "both" else [config.sweep.axis]
    d = np.linspace(-config.sweep.max_detuning, config.sweep.max_detuning, config.points)
    cols = ["detuning_over_omega"] + [f"fidelity_{a}" for a in axes]
    data = [dynamics.detuning_sweep(a, d, p) for a in axes]
    rows = [[x] + [col[i][1] for col in data] for i, x in enumerate(d)]
    return cols, rows, None


def _dissipation(config):
    ks = np.linspace(0.0, config.sweep.kappa_max, config.points)
    data = gate.fidelity_vs_dissipation(ks, config.physical.ratio_kappa2,
                                        config.physical.ratio_kappa3, simulated=True)
    return ["kappa1_over_omega", "fidelity_analytic", "fidelity_simulated"], [list(r) for r in data], None


def _gate(config, path):
    _, report = gate.simulate_cnot(config.drive())
    meta = _meta(config)
    if config.fmt == "json":
        data = {"meta": meta, **report.to_dict()}
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return
    meta["summary"] = {"gate_fidelity": report.gate_fidelity,
                       "simulated_gate_fidelity": report.simulated_gate_fidelity}
    rows = [[r["input"], r["target"], r["fidelity"]] for r in report.table1]
    write_table(path, meta, ["input", "target", "fidelity"], rows, "csv")


_RUNNERS = {
    "spectrum": _spectrum,
    "decay_table": _decay,
    "trajectories": _trajectories,
    "scheme_compare": _compare,
    "detuning_sweep": _detuning,
    "dissipation_sweep": _dissipation,
}


def output_path(config):
    return Path(config.output or f"{config.experiment}.{config.fmt}")


def run(config):
    """Run one experiment and write its file. Returns the process exit status."""
    problems = validate(config)
    if problems:
        for msg in problems:
            print(f"config error: {msg}", file=sys.stderr)
        return 1
    path = output_path(config)
    try:
        if config.experiment == "gate_report":
            _gate(config, path)
        else:
            cols, rows, summary = _RUNNERS[config.experiment](config)
            write_table(path, _meta(config, summary), cols, rows, config.fmt)
    except (NumericalError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure in {config.experiment}: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="se-cnot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, tag in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=f"run the {tag} experiment")
        sp.add_argument("--config", type=Path, help="JSON config file; flags override it")
        sp.add_argument("--out", help="output file path")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--omega", type=float, help="total Rabi frequency in s^-1")
        sp.add_argument("--kappa1", type=float, help="decay rate of |01> in s^-1")
        sp.add_argument("--ez", type=float, action="append", metavar="V_PER_CM",
                        help="holding field in V/cm (repeatable)")
        sp.add_argument("--points", type=int, help="number of samples in sweeps and trajectories")
    return parser


def config_from_args(args):
    data = {}
    if args.config:
        data = json.loads(args.config.read_text())
    data["experiment"] = SUBCOMMANDS[args.command]
    config = ExperimentConfig.from_dict(data)
    if args.out:
        config.output = args.out
    if args.format:
        config.format = args.format
    if args.omega is not None:
        config.physical.omega = args.omega
    if args.kappa1 is not None:
        config.physical.kappa1 = args.kappa1
    if args.ez:
        config.ez_v_per_cm = list(args.ez)
    if args.points is not None:
        config.points = args.points
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
