"""Experiment configuration: strict JSON schema, presets, task construction.

Configs are versioned (schema: 1) and parsed strictly: any unknown key is
rejected with a message naming the offending field, so a run either means
exactly what it says or fails fast.  The fig2/fig3 presets encode the
published experiment parameters together with this artifact's documented
choices (sample-size sweeps, grid resolution, seeds).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .embedding import (
    BUILTIN_ANSATZE,
    Ansatz,
    EmbeddingAnsatz,
    GateOp,
    Layer,
    ThetaGrid,
    make_theta_grid,
)
from .errors import ConfigInvalid
from .pipeline import BoundConfig
from .tasks import (
    DiscreteTask,
    GaussianTaskSpec,
    quantize_gaussian_pair,
    quantize_gaussian_task,
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment: tasks, ansatz, grid, sweeps, bound setup."""

    schema: int
    ansatz_name: str
    ansatz: Ansatz
    resolution: int
    refine: bool
    grid: ThetaGrid
    source_task: DiscreteTask
    target_task: DiscreteTask | None
    source_spec: GaussianTaskSpec | None
    target_spec: GaussianTaskSpec | None
    n_source: tuple[int, ...]
    n_target: tuple[int, ...]
    shifts: tuple[float, ...]
    replications: int
    bound: BoundConfig
    master_seed: int
    out: str | None

    def with_tasks(self, source_task, target_task) -> "ExperimentConfig":
        return replace(self, source_task=source_task, target_task=target_task)


PRESETS: dict[str, dict] = {
    "fig2": {
        "schema": 1,
        "ansatz": "rx_rot_rx",
        "resolution": 4,
        "source": {
            "gaussian": {
                "mu0": 1.0,
                "mu1": -1.0,
                "sigma2": 0.11,
                "prior0": 0.5,
                "bins": 100,
                "span_sigmas": 4.0,
            }
        },
        "target": {
            "gaussian": {
                "mu0": 1.5,
                "mu1": -0.5,
                "sigma2": 0.11,
                "prior0": 0.5,
                "bins": 100,
                "span_sigmas": 4.0,
            }
        },
        "n_source": [0, 10, 100],
        "n_target": [2, 4, 8, 16, 32, 64],
        "replications": 200,
        "bound": {"delta": 0.5, "d_st_mode": "trace", "r_mode": "analytic_cap"},
        "master_seed": 5,
    },
    "fig3": {
        "schema": 1,
        "ansatz": "rx_rot_rx",
        "resolution": 8,
        "source": {
            "gaussian": {
                "mu0": 1.0,
                "mu1": -2.0,
                "sigma2": 1.0,
                "prior0": 0.5,
                "bins": 100,
                "span_sigmas": 4.0,
            }
        },
        "shifts": [round(-2.0 + 0.25 * i, 2) for i in range(17)],
        "n_source": [10],
        "n_target": [4],
        "replications": 200,
        "bound": {"delta": 0.9, "d_st_mode": "trace", "r_mode": "analytic_cap"},
        "master_seed": 7,
    },
}


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigInvalid(f"unknown field '{where}{key}'")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigInvalid(f"missing field '{where}{key}'")
    return obj[key]


def _parse_gaussian(obj: dict, where: str) -> GaussianTaskSpec:
    allowed = {"mu0", "mu1", "sigma2", "prior0", "bins", "span_sigmas"}
    _reject_unknown(obj, allowed, where)
    try:
        return GaussianTaskSpec(
            mu0=float(_require(obj, "mu0", where)),
            mu1=float(_require(obj, "mu1", where)),
            sigma2=float(_require(obj, "sigma2", where)),
            prior0=float(obj.get("prior0", 0.5)),
            bins=int(obj.get("bins", 100)),
            span_sigmas=float(obj.get("span_sigmas", 4.0)),
        )
    except ValueError as exc:
        raise ConfigInvalid(f"invalid field '{where}': {exc}") from exc


def _parse_table(obj: dict, where: str) -> DiscreteTask:
    _reject_unknown(obj, {"features", "prior", "cond"}, where)
    try:
        return DiscreteTask(
            features=np.asarray(_require(obj, "features", where), dtype=float),
            prior=np.asarray(_require(obj, "prior", where), dtype=float),
            cond=np.asarray(_require(obj, "cond", where), dtype=float),
        )
    except ValueError as exc:
        raise ConfigInvalid(f"invalid field '{where}': {exc}") from exc


def _parse_task(obj, where: str):
    """Returns (GaussianTaskSpec | None, DiscreteTask | None)."""
    if not isinstance(obj, dict):
        raise ConfigInvalid(f"field '{where}' must be an object")
    _reject_unknown(obj, {"gaussian", "table"}, where)
    if ("gaussian" in obj) == ("table" in obj):
        raise ConfigInvalid(f"field '{where}' needs exactly one of gaussian/table")
    if "gaussian" in obj:
        return _parse_gaussian(obj["gaussian"], where + ".gaussian."), None
    return None, _parse_table(obj["table"], where + ".table.")


def _parse_ansatz(obj, where: str) -> tuple[str, Ansatz]:
    if isinstance(obj, str):
        if obj not in BUILTIN_ANSATZE:
            raise ConfigInvalid(
                f"field '{where}': unknown ansatz {obj!r}; "
                f"built-ins: {sorted(BUILTIN_ANSATZE)}"
            )
        return obj, BUILTIN_ANSATZE[obj]()
    if not isinstance(obj, dict):
        raise ConfigInvalid(f"field '{where}' must be a name or an object")
    _reject_unknown(obj, {"num_qubits", "encoding", "layers"}, where + ".")
    layers = []
    for li, layer in enumerate(_require(obj, "layers", where + ".")):
        _reject_unknown(layer, {"data", "params"}, f"{where}.layers[{li}].")
        layers.append(
            Layer(
                data=tuple(GateOp(str(g[0]), int(g[1])) for g in layer.get("data", [])),
                params=tuple(
                    GateOp(str(g[0]), int(g[1])) for g in layer.get("params", [])
                ),
            )
        )
    try:
        ans = EmbeddingAnsatz(
            num_qubits=int(_require(obj, "num_qubits", where + ".")),
            layers=tuple(layers),
            encoding_kind=str(obj.get("encoding", "repeated")),
        )
    except Exception as exc:
        raise ConfigInvalid(f"invalid field '{where}': {exc}") from exc
    return "custom", ans


def _parse_bound(obj: dict, where: str) -> BoundConfig:
    allowed = {"delta", "d_st_mode", "r_mode", "mc_outer", "mc_sigma_draws", "mc_seed"}
    _reject_unknown(obj, allowed, where)
    try:
        return BoundConfig(
            delta=float(_require(obj, "delta", where)),
            d_st_mode=str(obj.get("d_st_mode", "trace")),
            r_mode=str(obj.get("r_mode", "analytic_cap")),
            mc_outer=int(obj.get("mc_outer", 50)),
            mc_sigma_draws=int(obj.get("mc_sigma_draws", 100)),
            mc_seed=int(obj.get("mc_seed", 0)),
        )
    except ValueError as exc:
        raise ConfigInvalid(f"invalid field '{where}': {exc}") from exc


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw config dict and resolve tasks, ansatz, and grid."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("config root must be an object")
    allowed = {
        "schema",
        "ansatz",
        "resolution",
        "refine",
        "source",
        "target",
        "n_source",
        "n_target",
        "shifts",
        "replications",
        "bound",
        "master_seed",
        "out",
    }
    _reject_unknown(raw, allowed, "")
    schema = _require(raw, "schema", "")
    if schema != 1:
        raise ConfigInvalid(f"field 'schema': unsupported version {schema!r}")
    ansatz_name, ansatz = _parse_ansatz(_require(raw, "ansatz", ""), "ansatz")
    resolution = int(raw.get("resolution", 16))
    if resolution < 2:
        raise ConfigInvalid("field 'resolution' must be >= 2")
    grid = make_theta_grid(ansatz, resolution)
    source_spec, source_table = _parse_task(_require(raw, "source", ""), "source")
    target_spec, target_table = None, None
    if "target" in raw:
        target_spec, target_table = _parse_task(raw["target"], "target")

    shifts = tuple(float(s) for s in raw.get("shifts", ()))
    if shifts and ("target" in raw):
        raise ConfigInvalid("field 'shifts': target must be omitted in a shift sweep")
    if shifts and source_spec is None:
        raise ConfigInvalid("field 'shifts': shift sweeps need a gaussian source")

    if source_spec is not None and target_spec is not None:
        source_task, target_task = quantize_gaussian_pair(source_spec, target_spec)
    elif source_table is not None and target_table is not None:
        if source_table.n_bins != target_table.n_bins or not np.allclose(
            source_table.features, target_table.features, atol=1e-9
        ):
            raise ConfigInvalid("field 'target': table tasks must share feature bins")
        source_task, target_task = source_table, target_table
    elif "target" in raw:
        raise ConfigInvalid("field 'target': source and target must share a kind")
    else:
        source_task = (
            source_table if source_table is not None else quantize_gaussian_task(source_spec)
        )
        target_task = None

    n_source = tuple(int(v) for v in raw.get("n_source", [0]))
    n_target = tuple(int(v) for v in _require(raw, "n_target", ""))
    if any(v < 0 for v in n_source):
        raise ConfigInvalid("field 'n_source': values must be >= 0")
    if any(v < 1 for v in n_target):
        raise ConfigInvalid("field 'n_target': values must be >= 1")
    replications = int(_require(raw, "replications", ""))
    if replications < 1:
        raise ConfigInvalid("field 'replications' must be >= 1")
    bound = _parse_bound(_require(raw, "bound", ""), "bound.")
    if "master_seed" not in raw:
        raise ConfigInvalid("missing field 'master_seed'")
    return ExperimentConfig(
        schema=1,
        ansatz_name=ansatz_name,
        ansatz=ansatz,
        resolution=resolution,
        refine=bool(raw.get("refine", False)),
        grid=grid,
        source_task=source_task,
        target_task=target_task,
        source_spec=source_spec,
        target_spec=target_spec,
        n_source=n_source,
        n_target=n_target,
        shifts=shifts,
        replications=replications,
        bound=bound,
        master_seed=int(raw["master_seed"]),
        out=str(raw["out"]) if "out" in raw else None,
    )


def load_config(path_or_preset: str) -> ExperimentConfig:
    """Load a JSON config file, or a built-in preset by name (fig2, fig3).

    A preset name may carry a .json suffix; an existing file always wins
    over a preset of the same name.
    """
    p = Path(path_or_preset)
    if p.exists():
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"cannot parse {path_or_preset}: {exc}") from exc
        return parse_config(raw)
    name = p.name.removesuffix(".json")
    if name in PRESETS:
        return parse_config(PRESETS[name])
    raise ConfigInvalid(f"config '{path_or_preset}' is neither a file nor a preset")


def preset_json(name: str) -> str:
    """Render a built-in preset as formatted JSON (for --dump-config)."""
    if name not in PRESETS:
        raise ConfigInvalid(f"unknown preset {name!r}")
    return json.dumps(PRESETS[name], indent=2)
