"""Canned experiments, parameter sweeps, and file output.

Experiments are described by a JSON-friendly config dict; outputs are
CSV tables (the artifact of record, deterministic and byte-identical
across reruns of the same config) plus optional best-effort SVG line
charts.  Every emitted file carries the config hash in a '#' header.
"""

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .control import PulseSchedule, rail_hamiltonian, track_spectrum
from .dynamics import (
    IntegratorConfig,
    block_averaged_transport,
    evolve_pure,
    transfer_loss_firstorder,
)
from .errors import ConfigError
from .measurement import (
    RailGeometry,
    decoherence_rate_exact,
    decoherence_rate_weak,
    local_limit_rate,
    saturation_rate,
)
from .tls import TlsBath

BASELINE_PAIRS = ((3, 150.0), (5, 196.0), (7, 225.0), (9, 242.0), (11, 249.0))


@dataclass
class ResultTable:
    name: str
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ConfigError(f"ragged row in table {self.name}")


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def default_jobs() -> int:
    env = os.environ.get("CTAP_SIM_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep_map(func, tasks, jobs: int = None):
    """Map func over tasks, in input order, optionally in parallel."""
    tasks = list(tasks)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(func, tasks))


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(table: ResultTable, path: str) -> None:
    lines = [f"# {k} = {v}" for k, v in sorted(table.metadata.items())]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_svg(table: ResultTable, path: str, x_column: str = None, log_x: bool = False) -> None:
    """Best-effort polyline chart of every numeric column against the first."""
    if not table.rows:
        return
    cols = table.columns
    xi = 0 if x_column is None else cols.index(x_column)
    data = np.array([[float(v) for v in row] for row in table.rows])
    x = data[:, xi]
    if log_x:
        x = np.log10(np.maximum(x, 1e-300))
    w, h, pad = 640, 420, 50
    xmin, xmax = float(x.min()), float(x.max())
    ys = np.delete(data, xi, axis=1)
    ymin, ymax = float(ys.min()), float(ys.max())
    xspan = (xmax - xmin) or 1.0
    yspan = (ymax - ymin) or 1.0
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f"<!-- config-hash {table.metadata.get('config_hash', 'n/a')} -->",
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{w - 2 * pad}" height="{h - 2 * pad}" fill="none" stroke="#999"/>',
    ]
    ci = 0
    for j, name in enumerate(cols):
        if j == xi:
            continue
        y = data[:, j]
        pts = " ".join(
            f"{pad + (xv - xmin) / xspan * (w - 2 * pad):.2f},{h - pad - (yv - ymin) / yspan * (h - 2 * pad):.2f}"
            for xv, yv in zip(x, y)
        )
        color = palette[ci % len(palette)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{w - pad + 4}" y="{pad + 14 * (ci + 1)}" font-size="10" fill="{color}">{name}</text>')
        ci += 1
    parts.append(f'<text x="{pad}" y="{h - 12}" font-size="11">{cols[xi]}{" (log10)" if log_x else ""}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# experiment runners

DEFAULT_CONFIGS = {
    "figure3": {
        "experiment": "figure3",
        "schedule": {"section": [0, 4], "T": 150.0},
        "bath": {"chis": [0.0, 0.15, 0.3, 0.45], "block_signs": [-1, 1, 1, 1, 1]},
        "grid_points": 601,
        "output": {"formats": ["csv"]},
    },
    "figure4": {
        "experiment": "figure4",
        "curves": [list(p) for p in BASELINE_PAIRS],
        "geometry": {"alpha_over_a": 0.04, "margin": 10},
        "sweep": {"parameter": "a_over_d", "start": 0.03, "stop": 30.0, "points": 25, "spacing": "log"},
        "grid_points": 600,
        "output": {"formats": ["csv", "svg"]},
    },
    "figure5": {
        "experiment": "figure5",
        "schedule": {"section": [0, 2], "T": 150.0},
        "panel_a": {"chis": [0.02, 0.05, 0.15]},
        "panel_b": {"chis": [0.005, 0.02, 0.1]},
        "grid_points": 801,
        "output": {"formats": ["csv"]},
    },
}


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict) or "experiment" not in config:
        raise ConfigError("config must be a JSON object with an 'experiment' field")
    name = config["experiment"]
    if name not in DEFAULT_CONFIGS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(DEFAULT_CONFIGS)}")
    merged = json.loads(json.dumps(DEFAULT_CONFIGS[name]))
    _deep_update(merged, config)
    return merged


def _deep_update(base: dict, override: dict) -> None:
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = v


def apply_override(config: dict, assignment: str) -> None:
    """Apply a 'path.to.field=value' override; values parsed as JSON."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} must look like path=value")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    keys = path.split(".")
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def run_figure3(config: dict) -> list:
    """Spectra and populations of the five-site chain per TLS coupling."""
    sched = PulseSchedule(section=tuple(config["schedule"]["section"]), T=float(config["schedule"]["T"]))
    signs = np.asarray(config["bath"]["block_signs"], dtype=float)
    grid = np.linspace(*sched.window, int(config["grid_points"]))
    dim = sched.n_section_sites
    spec_rows, pop_rows = [], []
    for chi in config["bath"]["chis"]:
        diag = signs * chi if chi else None
        sp = track_spectrum(sched, diag, grid)
        psi0 = np.zeros(dim, dtype=complex)
        psi0[0] = 1.0
        cfg = IntegratorConfig.for_scales(sched.omega_max, abs(chi))
        traj = evolve_pure(lambda t: rail_hamiltonian(t, sched, diag), psi0, grid, cfg, target=dim - 1)
        pops = traj.observables["populations"]
        for i, t in enumerate(sp.times):
            spec_rows.append([float(chi), float(t)] + [float(e) for e in sp.energies[i]])
        for i, t in enumerate(traj.times):
            pop_rows.append([float(chi), float(t)] + [float(p) for p in pops[i]])
    meta = {"config_hash": config_hash(config)}
    return [
        ResultTable("spectrum", ["chi", "time"] + [f"energy_{j}" for j in range(dim)], spec_rows, dict(meta)),
        ResultTable("populations", ["chi", "time"] + [f"site_{j + 1}" for j in range(dim)], pop_rows, dict(meta)),
    ]


def _figure4_point(args):
    dots, T, aod, alpha_over_a, margin, grid_points = args
    n = dots + 2 * margin
    g = RailGeometry(
        n_sites=n,
        spacing=1.0,
        offset=aod,
        sensitivity=alpha_over_a * aod,
        total_rate=float(n),
        section=(margin, margin + dots - 1),
        margin=margin,
    )
    sched = PulseSchedule(section=g.section, T=T)
    grid = np.linspace(*sched.window, grid_points)
    return transfer_loss_firstorder(sched, g, grid)


def run_figure4(config: dict, jobs: int = None) -> list:
    """First-order transport loss vs QPC distance ratio a/d, per chain."""
    sweep = config["sweep"]
    if sweep.get("spacing", "log") == "log":
        aods = np.geomspace(float(sweep["start"]), float(sweep["stop"]), int(sweep["points"]))
    else:
        aods = np.linspace(float(sweep["start"]), float(sweep["stop"]), int(sweep["points"]))
    curves = [(int(d), float(T)) for d, T in config["curves"]]
    alpha_over_a = float(config["geometry"]["alpha_over_a"])
    margin = int(config["geometry"]["margin"])
    grid_points = int(config["grid_points"])
    tasks = [(d, T, float(aod), alpha_over_a, margin, grid_points) for d, T in curves for aod in aods]
    losses = sweep_map(_figure4_point, tasks, jobs=jobs)
    losses = np.asarray(losses).reshape(len(curves), len(aods))
    rows = [[float(aod)] + [float(losses[c, i]) for c in range(len(curves))] for i, aod in enumerate(aods)]
    meta = {"config_hash": config_hash(config)}
    for d, _ in curves:
        meta[f"crossover_a_over_d_{d}dots"] = (d - 1) / 4.0
    return [ResultTable("transfer_loss", ["a_over_d"] + [f"loss_{d}dots" for d, _ in curves], rows, meta)]


def run_figure5(config: dict) -> list:
    """Purity during transport of a population (a) and a superposition (b)."""
    sched = PulseSchedule(section=tuple(config["schedule"]["section"]), T=float(config["schedule"]["T"]))
    dim = sched.n_section_sites
    points = int(config["grid_points"])
    meta = {"config_hash": config_hash(config)}
    tables = []

    grid = np.linspace(*sched.window, points)
    rows = []
    columns = ["time"] + [f"purity_chi{chi:g}" for chi in config["panel_a"]["chis"]]
    series = []
    psi0 = np.zeros(dim, dtype=complex)
    psi0[0] = 1.0
    for chi in config["panel_a"]["chis"]:
        bath = TlsBath.uniform(float(chi), dim)
        traj = block_averaged_transport(sched, bath, psi0, None, grid)
        series.append(traj.observables["purity"])
        times = traj.times
    for i, t in enumerate(times):
        rows.append([float(t)] + [float(s[i]) for s in series])
    tables.append(ResultTable("purity_population", columns, rows, dict(meta)))

    w0, w1 = sched.window
    grid_b = np.linspace(w0, w1 + (w1 - w0), points)
    rows = []
    columns = ["time"] + [f"purity_chi{chi:g}" for chi in config["panel_b"]["chis"]]
    series = []
    psi0 = np.zeros(dim + 1, dtype=complex)
    psi0[0] = psi0[1] = 1.0 / np.sqrt(2.0)
    for chi in config["panel_b"]["chis"]:
        bath = TlsBath.uniform(float(chi), dim + 1)
        traj = block_averaged_transport(sched, bath, psi0, None, grid_b, section_start=1)
        series.append(traj.observables["purity"])
        times = traj.times
    for i, t in enumerate(times):
        rows.append([float(t)] + [float(s[i]) for s in series])
    tables.append(ResultTable("purity_superposition", columns, rows, dict(meta)))
    return tables


def rates_table(g: RailGeometry, max_separation: int = 20) -> ResultTable:
    """Exact, weak, saturation, and local-limit rates per site separation."""
    m, _ = g.section
    sat = saturation_rate(g)
    local = local_limit_rate(g.total_rate, g.n_sites, g.sensitivity)
    rows = []
    for sep in range(0, max_separation + 1):
        rows.append(
            [
                sep,
                decoherence_rate_exact(m, m + sep, g),
                decoherence_rate_weak(m, m + sep, g),
                sat,
                local,
            ]
        )
    meta = {
        "n_sites": g.n_sites,
        "spacing": g.spacing,
        "offset": g.offset,
        "sensitivity": g.sensitivity,
        "total_rate": g.total_rate,
    }
    return ResultTable("rates", ["separation", "exact", "weak", "saturation", "local_limit"], rows, meta)


def geometry_from_dict(d: dict) -> RailGeometry:
    try:
        return RailGeometry(
            n_sites=int(d["n_sites"]),
            spacing=float(d.get("spacing", 1.0)),
            offset=float(d.get("offset", 1.0)),
            sensitivity=float(d.get("sensitivity", 0.04)),
            total_rate=float(d.get("total_rate", d["n_sites"])),
            section=tuple(d.get("section", (0, 2))),
            margin=int(d.get("margin", 10)),
            tail_cutoff=float(d.get("tail_cutoff", 1e-12)),
        )
    except KeyError as exc:
        raise ConfigError(f"geometry config missing field {exc}") from exc


def run_experiment(config: dict, out_dir: str = ".", jobs: int = None) -> list:
    """Run one configured experiment and write its output files."""
    name = config["experiment"]
    if name == "figure3":
        tables = run_figure3(config)
    elif name == "figure4":
        tables = run_figure4(config, jobs=jobs)
    elif name == "figure5":
        tables = run_figure5(config)
    else:
        raise ConfigError(f"unknown experiment {name!r}")
    formats = config.get("output", {}).get("formats", ["csv"])
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for table in tables:
        if "csv" in formats:
            path = os.path.join(out_dir, f"{name}_{table.name}.csv")
            write_csv(table, path)
            written.append(path)
        if "svg" in formats:
            path = os.path.join(out_dir, f"{name}_{table.name}.svg")
            write_svg(table, path, log_x=(name == "figure4"))
            written.append(path)
    return written
