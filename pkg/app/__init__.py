import os
from collections.abc import Mapping, Sequence
from logging.config import dictConfig
from typing import Any, Final

import yaml

from app.lib import Config, ImproperlyConfiguredError, SettingInitializer

# =============================================================================
# CONSTANTS
# =============================================================================

_DATA_DIR_CONFIG_KEY: Final[str] = "DATA_DIR"

_DATA_DIR_ENV_VAR: Final[str] = "SNBENCH_DATA_DIR"

_EXPERIMENT_CONFIG_KEY: Final[str] = "EXPERIMENT"

_LOGGING_CONFIG_KEY: Final[str] = "LOGGING"

_REPRODUCIBLE_CONFIG_KEY: Final[str] = "REPRODUCIBLE"

_WORKERS_CONFIG_KEY: Final[str] = "WORKERS"

_DEFAULT_CONFIG: Final[dict[str, Any]] = {
    _LOGGING_CONFIG_KEY: {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "verbose": {
                "format": (
                    "%(levelname)s: %(asctime)s %(module)s "
                    "%(process)d %(message)s"
                ),
            },
        },
        "handlers": {
            "console": {
                "level": "DEBUG",
                "class": "logging.StreamHandler",
                "formatter": "verbose",
            },
        },
        "loggers": {
            "app": {"level": "INFO", "handlers": ["console"]},
        },
    },
    _REPRODUCIBLE_CONFIG_KEY: True,
    _WORKERS_CONFIG_KEY: 1,
    _EXPERIMENT_CONFIG_KEY: {},
}


# =============================================================================
# APP GLOBALS
# =============================================================================

settings: Final[Config] = None  # type: ignore
"""
The application configurations. This value is only available after a
successful application set up. That is, after ``app.setup()`` completes
successfully.
"""


# =============================================================================
# HELPERS
# =============================================================================


def _load_config_file(config_file_path: str) -> Mapping[str, Any]:
    try:
        with open(config_file_path, "rb") as config_file:
            loaded = yaml.safe_load(config_file)
    except OSError as exp:
        raise ImproperlyConfiguredError(
            message='Unable to read the config file "%s": %s'
            % (config_file_path, exp),
        ) from exp
    except yaml.YAMLError as exp:
        raise ImproperlyConfiguredError(
            message='The config file "%s" is not valid YAML.'
            % config_file_path,
        ) from exp
    if loaded is None:
        return {}
    if not isinstance(loaded, Mapping):
        raise ImproperlyConfiguredError(
            message='The config file "%s" must contain a mapping.'
            % config_file_path,
        )
    return loaded


def _merge_settings(*layers: Mapping[str, Any] | None) -> dict[str, Any]:
    """Merge settings layers, later layers winning.

    The ``EXPERIMENT`` mappings are merged key by key so that a command-line
    flag only replaces the option it names.
    """
    merged: dict[str, Any] = {}
    experiment: Any = {}
    for layer in layers:
        if not layer:
            continue
        merged.update(layer)
        value = layer.get(_EXPERIMENT_CONFIG_KEY)
        if isinstance(value, Mapping) and isinstance(experiment, Mapping):
            experiment = {**experiment, **value}
        elif value is not None:
            # Left for the experiment initializer to reject.
            experiment = value
    merged[_EXPERIMENT_CONFIG_KEY] = experiment
    return merged


# =============================================================================
# DEFAULT SETTINGS INITIALIZERS
# =============================================================================


class _LoggingInitializer(SettingInitializer):
    """A :class:`SettingInitializer` that configures logging for the app."""

    @property
    def setting(self) -> str:
        return _LOGGING_CONFIG_KEY

    def execute(self, an_input: Mapping[str, Any] | None) -> Mapping[str, Any]:
        logging_config: dict[str, Any] = dict(
            an_input or _DEFAULT_CONFIG[self.setting],
        )
        dictConfig(logging_config)
        return logging_config


class _ReproducibleInitializer(SettingInitializer):
    @property
    def setting(self) -> str:
        return _REPRODUCIBLE_CONFIG_KEY

    def execute(self, an_input: bool | None) -> bool:
        if an_input is None:
            return _DEFAULT_CONFIG[self.setting]
        if type(an_input) is not bool:
            raise ImproperlyConfiguredError(
                message='The value of the "%s" setting must be a boolean.'
                % self.setting,
            )
        return an_input


class _DataDirInitializer(SettingInitializer):
    """Default the data directory from the environment, else ``data``."""

    @property
    def setting(self) -> str:
        return _DATA_DIR_CONFIG_KEY

    def execute(self, an_input: str | None) -> str:
        if an_input is None:
            return os.environ.get(_DATA_DIR_ENV_VAR) or "data"
        if type(an_input) is not str or not an_input:
            raise ImproperlyConfiguredError(
                message='The value of the "%s" setting must be a non-empty '
                "string." % self.setting,
            )
        return an_input


class _WorkersInitializer(SettingInitializer):
    @property
    def setting(self) -> str:
        return _WORKERS_CONFIG_KEY

    def execute(self, an_input: int | None) -> int:
        if an_input is None:
            return _DEFAULT_CONFIG[self.setting]
        if type(an_input) is not int or an_input < 1:
            raise ImproperlyConfiguredError(
                message='The value of the "%s" setting must be a positive '
                "integer." % self.setting,
            )
        return an_input


class _ExperimentInitializer(SettingInitializer):
    """Validate that the experiment options form a flat mapping of scalars
    or lists of scalars."""

    @property
    def setting(self) -> str:
        return _EXPERIMENT_CONFIG_KEY

    def execute(self, an_input: Mapping[str, Any] | None) -> Mapping[str, Any]:
        if an_input is None:
            return {}
        if not isinstance(an_input, Mapping):
            raise ImproperlyConfiguredError(
                message='The value of the "%s" setting must be a mapping.'
                % self.setting,
            )
        for option, value in an_input.items():
            values = value if isinstance(value, list | tuple) else [value]
            if any(isinstance(_v, Mapping | list | tuple) for _v in values):
                raise ImproperlyConfiguredError(
                    message='The experiment option "%s" must be a scalar or '
                    "a list of scalars." % option,
                )
        return dict(an_input)


# =============================================================================
# APP SETUP FUNCTION
# =============================================================================


def setup(
    initial_settings: Mapping[str, Any] | None = None,
    settings_initializers: Sequence[SettingInitializer] | None = None,
    config_file_path: str | None = None,
) -> None:
    """
    Set up the application and ready it for use.

    This involves loading and validating the settings and configuring
    logging. Settings are layered: the built-in defaults, then the config
    file, then ``initial_settings``, which is where command-line overrides
    go.

    :param initial_settings: Optional settings overriding the config file and
        the defaults.
    :param settings_initializers: Extra initializers, run after the default
        ones.
    :param config_file_path: An optional YAML config file.

    :return: None.

    :raise ImproperlyConfiguredError: If the config file cannot be read or a
        setting is invalid.
    """
    file_settings: Mapping[str, Any] | None = None
    if config_file_path:
        file_settings = _load_config_file(config_file_path)
    _settings_dict = _merge_settings(
        _DEFAULT_CONFIG,
        file_settings,
        initial_settings,
    )

    _initializers: list[SettingInitializer] = [
        _LoggingInitializer(),
        _ReproducibleInitializer(),
        _DataDirInitializer(),
        _WorkersInitializer(),
        _ExperimentInitializer(),
    ]
    _initializers.extend(settings_initializers or ())

    global settings
    settings = Config(  # type: ignore
        settings=_settings_dict,
        settings_initializers=_initializers,
    )
