"""One self-describing key/value configuration surface for the whole tool.

INI-style sections with ``#`` comments.  Every key has an embedded default;
unknown sections or keys are rejected, values are coerced to the default's
type, and ``dump`` emits text that re-ingests to an identical effective
config.  Precedence: command-line ``--set`` overrides > file > defaults.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import replace

from .controller import PlasticityConfig, PlasticityRule
from .evolution import EcologyConfig, EvoConfig, Mode
from .fitness import ConfigError, FitnessConfig
from .world import DEFAULT_BODY, Rect, RobotBody, StepConfig, Target, World, make_world

__all__ = ["Config", "ConfigError", "DEFAULTS", "load_config", "parse_override"]

DEFAULTS: dict[str, dict[str, object]] = {
    "world": {
        "kind": "flat",
        "seed": 1,
        "obstacles": 0,
        "width": 24.0,
        "height": 24.0,
        "cell_size": 0.5,
        "amplitude": 0.3,
        "gravity": 9.81,
        "target_x": "auto",
        "target_y": "auto",
        "target_radius": 1.0,
    },
    "body": {
        "body_radius": 0.5,
        "wheel_base": 0.8,
        "wheel_radius": 0.25,
        "nominal_clearance": 1.0,
        "sensor_range": 6.0,
        "omega_max": 10.0,
    },
    "step": {
        "coarseness": 0.5,
        "dt_min": 0.05,
        "dt_max": 0.2,
        "t_start": 0.0,
        "t_finish": 60.0,
    },
    "controller": {
        "n_hidden": 2,
        "threshold": 0.5,
        "plasticity": "none",
        "eta": 0.005,
        "weight_clip": 4.0,
    },
    "fitness": {
        "w_progress": 0.6,
        "reach_bonus": 0.3,
        "w_rotation": 0.05,
        "w_penalty": 0.12,
        "clearance_floor": 1.0,
        "max_steps": 400,
        "unit_time": 100,
        "sensor_noise_sigma": 0.0,
        "terrain_interference": 0.6,
    },
    "evolution": {
        "mode": "standard",
        "pop_size": 20,
        "generations": 40,
        "tournament_k": 3,
        "elitism_count": 2,
        "sigma": 0.3,
        "crossover_prob": 0.7,
        "seed": 0,
        "lifetime_learning": False,
        "workers": 1,
        "stagnation_window": 20,
    },
    "ecology": {
        "n_robots": 8,
        "energy_init": 100.0,
        "energy_drain": 1.0,
        "energy_gain": 80.0,
        "tournament_k": 2,
        "mutation_sigma": 0.3,
        "steps": 400,
    },
    "estimation": {
        "pop_size": 16,
        "generations": 12,
        "sigma": 0.2,
        "seed": 0,
    },
    "experiment": {
        "environments": "all",
        "trials_per_env": 25,
        "seeds": "0",
        "n_obstacles": 5,
        "evolution_steps": 160,
        "assessment_steps": 350,
        "failure_trials": 5,
    },
    "session": {
        "pop_size": 12,
        "timeout_s": 600.0,
        "port": 8123,
        "n_hidden": 2,
    },
}


def _coerce(section: str, key: str, raw: str):
    default = DEFAULTS[section][key]
    text = raw.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text
    except ValueError as err:
        raise ConfigError(f"[{section}] {key}: {err}") from None


class Config:
    """Validated effective configuration with typed accessors."""

    def __init__(self, values: dict[str, dict[str, object]]):
        self.values = values

    def get(self, section: str, key: str):
        return self.values[section][key]

    def dump(self) -> str:
        out = io.StringIO()
        out.write("# evobot effective configuration\n")
        for section, keys in self.values.items():
            out.write(f"\n[{section}]\n")
            for key, value in keys.items():
                if isinstance(value, bool):
                    text = "true" if value else "false"
                elif isinstance(value, float):
                    text = repr(value)
                else:
                    text = str(value)
                out.write(f"{key} = {text}\n")
        return out.getvalue()

    # -- builders -----------------------------------------------------------

    def world(self) -> World:
        w = self.values["world"]
        bounds = Rect(0.0, 0.0, float(w["width"]), float(w["height"]))
        target = None
        if w["target_x"] != "auto" or w["target_y"] != "auto":
            if w["target_x"] == "auto" or w["target_y"] == "auto":
                raise ConfigError("[world] target_x and target_y must both be set or both auto")
            target = Target(
                (float(w["target_x"]), float(w["target_y"])), float(w["target_radius"])
            )
        return make_world(
            str(w["kind"]),
            int(w["obstacles"]),
            int(w["seed"]),
            bounds=bounds,
            cell_size=float(w["cell_size"]),
            amplitude=float(w["amplitude"]),
            gravity=float(w["gravity"]),
            target=target,
            body=self.body(),
        )

    def body(self) -> RobotBody:
        b = self.values["body"]
        return RobotBody(
            body_radius=float(b["body_radius"]),
            wheel_base=float(b["wheel_base"]),
            wheel_radius=float(b["wheel_radius"]),
            nominal_clearance=float(b["nominal_clearance"]),
            sensor_range=float(b["sensor_range"]),
            omega_max=float(b["omega_max"]),
        )

    def step_cfg(self) -> StepConfig:
        s = self.values["step"]
        return StepConfig(
            coarseness=float(s["coarseness"]),
            dt_min=float(s["dt_min"]),
            dt_max=float(s["dt_max"]),
            t_start=float(s["t_start"]),
            t_finish=float(s["t_finish"]),
        )

    def fitness_cfg(self) -> FitnessConfig:
        f = self.values["fitness"]
        return FitnessConfig(
            threshold=float(self.values["controller"]["threshold"]),
            w_progress=float(f["w_progress"]),
            reach_bonus=float(f["reach_bonus"]),
            w_rotation=float(f["w_rotation"]),
            w_penalty=float(f["w_penalty"]),
            clearance_floor=float(f["clearance_floor"]),
            max_steps=int(f["max_steps"]),
            unit_time=int(f["unit_time"]),
            sensor_noise_sigma=float(f["sensor_noise_sigma"]),
            terrain_interference=float(f["terrain_interference"]),
            step_cfg=self.step_cfg(),
        )

    def plasticity(self) -> PlasticityConfig:
        c = self.values["controller"]
        rule = str(c["plasticity"]).lower()
        if rule not in ("none", "hebbian"):
            raise ConfigError(f"[controller] plasticity must be none or hebbian, got {rule!r}")
        return PlasticityConfig(
            rule=PlasticityRule(rule),
            eta=float(c["eta"]),
            weight_clip=float(c["weight_clip"]),
        )

    def evo_cfg(self) -> EvoConfig:
        e = self.values["evolution"]
        mode = str(e["mode"]).lower()
        modes = {m.value: m for m in Mode}
        if mode not in modes:
            raise ConfigError(f"[evolution] mode must be one of {sorted(modes)}, got {mode!r}")
        try:
            return EvoConfig(
                pop_size=int(e["pop_size"]),
                generations=int(e["generations"]),
                tournament_k=int(e["tournament_k"]),
                elitism_count=int(e["elitism_count"]),
                sigma=float(e["sigma"]),
                crossover_prob=float(e["crossover_prob"]),
                seed=int(e["seed"]),
                mode=modes[mode],
                lifetime_learning=bool(e["lifetime_learning"]),
                workers=int(e["workers"]),
                stagnation_window=int(e["stagnation_window"]),
            )
        except ValueError as err:
            raise ConfigError(f"[evolution] {err}") from None

    def ecology_cfg(self) -> EcologyConfig:
        e = self.values["ecology"]
        try:
            return EcologyConfig(
                n_robots=int(e["n_robots"]),
                energy_init=float(e["energy_init"]),
                energy_drain=float(e["energy_drain"]),
                energy_gain=float(e["energy_gain"]),
                tournament_k=int(e["tournament_k"]),
                mutation_sigma=float(e["mutation_sigma"]),
                n_hidden=int(self.values["controller"]["n_hidden"]),
                seed=int(self.values["evolution"]["seed"]),
            )
        except ValueError as err:
            raise ConfigError(f"[ecology] {err}") from None

    def estimation_evo_cfg(self) -> EvoConfig:
        e = self.values["estimation"]
        try:
            return EvoConfig(
                pop_size=int(e["pop_size"]),
                generations=int(e["generations"]),
                sigma=float(e["sigma"]),
                seed=int(e["seed"]),
            )
        except ValueError as err:
            raise ConfigError(f"[estimation] {err}") from None

    def experiment_plan(self):
        from .experiments import EnvSpec, ExperimentPlan, default_matrix
        from .world import TerrainKind

        x = self.values["experiment"]
        spec = str(x["environments"]).strip()
        if spec == "all":
            envs = default_matrix(int(x["n_obstacles"]))
        else:
            envs = []
            for item in spec.split(","):
                item = item.strip()
                kind, _, obs = item.partition("/")
                try:
                    terrain = TerrainKind(kind)
                except ValueError:
                    raise ConfigError(f"[experiment] unknown terrain kind {kind!r}") from None
                if obs not in ("obs", "no-obs"):
                    raise ConfigError(
                        f"[experiment] environment {item!r} must end in /obs or /no-obs"
                    )
                envs.append(
                    EnvSpec(terrain, int(x["n_obstacles"]) if obs == "obs" else 0)
                )
            envs = tuple(envs)
        try:
            seeds = tuple(int(s) for s in str(x["seeds"]).replace(",", " ").split())
        except ValueError:
            raise ConfigError("[experiment] seeds must be integers") from None
        if not seeds:
            raise ConfigError("[experiment] seeds must be non-empty")
        try:
            return ExperimentPlan(
                environments=envs,
                trials_per_env=int(x["trials_per_env"]),
                seeds=seeds,
                n_hidden=int(self.values["controller"]["n_hidden"]),
                evolution_steps=int(x["evolution_steps"]),
                assessment_steps=int(x["assessment_steps"]),
            )
        except ValueError as err:
            raise ConfigError(f"[experiment] {err}") from None


def parse_override(text: str) -> tuple[str, str, str]:
    """Split ``section.key=value`` into its parts."""
    head, sep, value = text.partition("=")
    if not sep:
        raise ConfigError(f"override {text!r} must look like section.key=value")
    section, sep, key = head.strip().partition(".")
    if not sep:
        raise ConfigError(f"override {text!r} must look like section.key=value")
    return section, key.strip(), value.strip()


def load_config(path: str | None = None, overrides: list[str] | None = None) -> Config:
    """Defaults, then file, then overrides; rejects unknown keys."""
    values = {section: dict(keys) for section, keys in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        for section in parser.sections():
            if section not in values:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in values[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                values[section][key] = _coerce(section, key, raw)
    for text in overrides or []:
        section, key, raw = parse_override(text)
        if section not in values or key not in values[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        values[section][key] = _coerce(section, key, raw)
    return Config(values)
