"""Configuration management for homogenization runs."""

import os
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.fem import LinearSolver
from thermo_homogenization.geometry import Shape, create_shape
from thermo_homogenization.macrosolver import MacroConfig
from thermo_homogenization.microsim import MicroConfig
from thermo_homogenization.params import PhysicalParams
from thermo_homogenization.tables import MODES, default_grid

ENV_PREFIX = "THERMO_HOMOG_"
DEFAULTS_NAME = "defaults.yaml"

# Searched in the working directory when no --config is given.
LOCAL_CONFIG_NAMES = ("thermo_homog.yaml", "thermo_homog.yml", "thermo_homog.json")

# Profile bodies follow the schema; these keys are profile metadata.
PROFILES_KEY = "profiles"
PROFILE_META = ("description",)


def deep_merge(base: Dict, override: Dict) -> Dict:
    """
    Deep merge two dictionaries.

    Override values take precedence. Lists are replaced, not merged.

    Args:
        base: Base dictionary
        override: Override dictionary (takes precedence)

    Returns:
        Merged dictionary
    """
    result = deepcopy(base)

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = deepcopy(value)

    return result


def unknown_keys(data: Dict[str, Any], schema: Dict[str, Any], prefix: str = "") -> List[str]:
    """Dotted keys of ``data`` that the schema does not define."""
    unknown = []
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if key not in schema:
            unknown.append(dotted)
        elif isinstance(schema[key], dict) and isinstance(value, dict):
            unknown.extend(unknown_keys(value, schema[key], f"{dotted}."))
        elif isinstance(schema[key], dict):
            raise ValidationError(
                f"Configuration key '{dotted}' must be a mapping", {"key": dotted}
            )
    return unknown


def _normalize(data: Dict[str, Any]) -> Dict[str, Any]:
    """Expand shorthands: ``table: PATH`` means ``table: {path: PATH}``."""
    data = dict(data)
    if isinstance(data.get("table"), (str, Path)):
        data["table"] = {"path": str(data["table"])}
    return data


def _parse_scalar(value: str) -> Any:
    try:
        return yaml.safe_load(value)
    except yaml.YAMLError:
        return value


def _read_file(path: Path) -> Dict[str, Any]:
    try:
        with path.open("r") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ValidationError(f"Invalid YAML/JSON in {path}: {e}", {"path": str(path)}) from e
    if not isinstance(data, dict):
        raise ValidationError(f"Configuration file {path} must hold a mapping", {"path": str(path)})
    return data


class Config:
    """Manages configuration from files, profiles and environment variables.

    Configuration is loaded in layers:
    1. Built-in defaults (defaults.yaml in package)
    2. User config file (--config, or ./thermo_homog.yaml|yml|json)
    3. Profile overrides (if --profile specified)
    4. Environment variables THERMO_HOMOG_<DOTTED_KEY>
    5. Command-line overrides (highest precedence)
    """

    def __init__(
        self,
        config_path: Optional[Path] = None,
        profile: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> None:
        """
        Initialize configuration.

        Args:
            config_path: Optional path to a YAML or JSON configuration file.
                        If not provided, searches the working directory.
            profile: Optional profile name to apply (e.g., 'benchmark', 'quick')
            overrides: Dotted keys set from command-line flags

        Raises:
            ValidationError: On unreadable files, unknown keys or an unknown profile
        """
        self._config: Dict[str, Any] = {}
        self._schema: Dict[str, Any] = {}
        self._config_path: Optional[Path] = None
        self._overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        self._load_defaults()
        self._load_user_config(config_path)
        self._apply_profile(profile)

    def _load_defaults(self) -> None:
        """Load built-in defaults from package."""
        defaults_path = Path(__file__).parent / DEFAULTS_NAME
        self._config = _read_file(defaults_path)
        self._schema = {k: v for k, v in self._config.items() if k != PROFILES_KEY}

    def _validate(self, data: Dict[str, Any], where: str) -> Dict[str, Any]:
        data = _normalize(data)
        profiles = data.get(PROFILES_KEY, {})
        body = {k: v for k, v in data.items() if k != PROFILES_KEY}
        unknown = unknown_keys(body, self._schema)
        if not isinstance(profiles, dict):
            raise ValidationError(f"'{PROFILES_KEY}' in {where} must be a mapping")
        for name, overlay in profiles.items():
            overlay = _normalize(overlay or {})
            profiles[name] = overlay
            fields = {k: v for k, v in overlay.items() if k not in PROFILE_META}
            unknown.extend(
                f"{PROFILES_KEY}.{name}.{key}" for key in unknown_keys(fields, self._schema)
            )
        if unknown:
            raise ValidationError(
                f"Unknown configuration keys in {where}: {', '.join(unknown)}",
                {"unknown": unknown, "source": where},
            )
        if profiles:
            body[PROFILES_KEY] = profiles
        return body

    def _load_user_config(self, config_path: Optional[Path] = None) -> None:
        """
        Load and merge user configuration.

        Search order:
        1. Provided config_path (must exist)
        2. ./thermo_homog.yaml
        3. ./thermo_homog.yml
        4. ./thermo_homog.json
        """
        if config_path is not None:
            path = Path(config_path)
            if not path.is_file():
                raise ValidationError(f"Configuration file not found: {path}", {"path": str(path)})
            search_paths = [path]
        else:
            search_paths = [Path.cwd() / name for name in LOCAL_CONFIG_NAMES]

        for path in search_paths:
            if path.is_file():
                user_config = self._validate(_read_file(path), str(path))
                self._config = deep_merge(self._config, user_config)
                self._config_path = path
                return

    def _apply_profile(self, profile: Optional[str]) -> None:
        """Apply profile overrides if specified."""
        if not profile:
            return

        profiles = self._config.get(PROFILES_KEY, {})
        if profile not in profiles:
            available = list(profiles.keys())
            raise ValidationError(
                f"Unknown profile: {profile}. Available profiles: {', '.join(available)}",
                {"profile": profile, "available": available},
            )

        overlay = {k: v for k, v in profiles[profile].items() if k not in PROFILE_META}
        self._config = deep_merge(self._config, _normalize(overlay))
        self._config["_active_profile"] = profile

    @property
    def active_profile(self) -> Optional[str]:
        """Get the active profile name."""
        return self._config.get("_active_profile")

    @property
    def config_path(self) -> Optional[Path]:
        return self._config_path

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by key.

        Supports nested keys with dot notation: 'macro.picard.tol'

        Args:
            key: Configuration key (supports dot notation)
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        if key in self._overrides:
            return self._overrides[key]

        # Environment variable (e.g., THERMO_HOMOG_MACRO_PICARD_TOL), parsed as a YAML scalar
        env_key = f"{ENV_PREFIX}{key.upper().replace('.', '_')}"
        env_value = os.getenv(env_key)
        if env_value is not None:
            return _parse_scalar(env_value)

        value = self._config
        for part in key.split('.'):
            if isinstance(value, dict):
                value = value.get(part)
                if value is None:
                    return default
            else:
                return default

        return value if value is not None else default

    def get_bool(self, key: str, default: bool = False) -> bool:
        """Get configuration value as boolean."""
        value = self.get(key, default)

        if isinstance(value, bool):
            return value
        elif isinstance(value, str):
            return value.lower() in ('true', 'yes', '1', 'on')
        else:
            return bool(value)

    def list_profiles(self) -> Dict[str, str]:
        """
        Get available profiles with descriptions.

        Returns:
            Dict mapping profile name to description
        """
        profiles = self._config.get(PROFILES_KEY, {})
        return {
            name: (config or {}).get("description", "No description")
            for name, config in profiles.items()
        }

    def _block(self, section: str) -> Dict[str, Any]:
        """Section with every schema leaf resolved through :meth:`get`."""
        return {key: self.get(f"{section}.{key}") for key in self._schema.get(section, {})}

    def to_dict(self) -> Dict[str, Any]:
        """Effective configuration (profiles dropped), as echoed into run manifests."""
        def _resolve(schema: Dict[str, Any], prefix: str) -> Dict[str, Any]:
            return {
                key: (
                    _resolve(value, f"{prefix}{key}.")
                    if isinstance(value, dict)
                    else self.get(f"{prefix}{key}")
                )
                for key, value in schema.items()
            }
        return _resolve(self._schema, "")

    # ==========================================================================
    # Run-wide settings
    # ==========================================================================

    @property
    def seed(self) -> int:
        return int(self.get('seed', 0))

    @property
    def threads(self) -> int:
        threads = int(self.get('threads', 1))
        if threads < 1:
            raise ValidationError(f"threads must be at least 1, got {threads}")
        return threads

    @property
    def output_dir(self) -> Path:
        return Path(self.get('outputs.dir', 'results'))

    # ==========================================================================
    # Domain objects
    # ==========================================================================

    def shape(self) -> Optional[Shape]:
        """Reference inclusion from the ``shape`` block (None for kind ``none``)."""
        descriptor = {k: v for k, v in self._block("shape").items() if v is not None}
        return create_shape(descriptor)

    def params(self) -> PhysicalParams:
        """Material data from the ``params`` block; a matrix ``K`` replaces the scalar ``k``."""
        block = self._block("params")
        if block.get("K") is not None:
            block.pop("k", None)
        return PhysicalParams.from_dict(block)

    def solver_options(self) -> Dict[str, Any]:
        max_iter = self.get('solver.max_iter')
        return {
            "method": str(self.get('solver.method', 'auto')),
            "tol": float(self.get('solver.tol', 1e-10)),
            "max_iter": None if max_iter is None else int(max_iter),
        }

    def solver(self) -> LinearSolver:
        return LinearSolver(**self.solver_options())

    @property
    def cell_resolution(self) -> float:
        return float(self.get('cell.mesh_resolution', 0.05))

    @property
    def table_path(self) -> Optional[Path]:
        path = self.get('table.path')
        return None if path is None else Path(path)

    @property
    def table_mode(self) -> str:
        mode = str(self.get('table.mode', 'monotone-cubic'))
        if mode not in MODES:
            raise ValidationError(
                f"Unknown table mode: {mode}. Available modes: {', '.join(MODES)}"
            )
        return mode

    def table_grid(self, shape: Optional[Shape] = None) -> List[float]:
        """Table heights: ``table.nodes`` points over [-bound, bound] (bound a*/10 by default)."""
        shape = shape if shape is not None else self.shape()
        bound = self.get('table.bound')
        n = int(self.get('table.nodes', 17))
        grid = default_grid(shape, n=n, bound=None if bound is None else float(bound))
        return grid.tolist()

    def macro_config(self, output_dir: Optional[Path] = None) -> MacroConfig:
        """Settings of a homogenized run; ``output_dir`` None disables file output."""
        return MacroConfig(
            nx=int(self.get('macro.mesh.nx')),
            ny=int(self.get('macro.mesh.ny')),
            dt=float(self.get('macro.dt')),
            t_end=float(self.get('macro.t_end')),
            picard_tol=float(self.get('macro.picard.tol')),
            picard_max_iter=int(self.get('macro.picard.max_iter')),
            table=self.table_path,
            params=self.params(),
            output_every=int(self.get('macro.outputs.every', 1)),
            output_dir=output_dir,
            lumped=self.get_bool('macro.lumped'),
        )

    def micro_config(
        self, level: Optional[int] = None, output_dir: Optional[Path] = None
    ) -> MicroConfig:
        """Settings of an eps-resolved run; ``level`` overrides ``micro.level``."""
        return MicroConfig(
            level=int(self.get('micro.level') if level is None else level),
            dt=float(self.get('micro.dt')),
            t_end=float(self.get('micro.t_end')),
            tol=float(self.get('micro.tol')),
            max_iter=int(self.get('micro.max_iter')),
            coupling=str(self.get('micro.coupling', 'interval')),
            mesh_resolution=float(self.get('micro.mesh_resolution')),
            params=self.params(),
            threads=self.threads,
            output_every=int(self.get('micro.outputs.every', 1)),
            output_dir=output_dir,
        )

    @property
    def micro_elasticity(self) -> bool:
        return self.get_bool('micro.elasticity')
