import logging
from collections.abc import Mapping, Sequence
from typing import Any

from .exceptions import MissingSettingError
from .setting_initializer import SettingInitializer

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = logging.getLogger(__name__)


# =============================================================================
# CONFIG
# =============================================================================


class Config:
    """The read-only settings of a benchmark session.

    Settings are upper-case names such as ``DATA_DIR``, ``WORKERS`` or
    ``EXPERIMENT``. Any normalisation or validation happens once, at
    construction, through :class:`initializers <SettingInitializer>`; after
    that the settings never change. Names that are valid identifiers can be
    read with the dot notation.
    """

    def __init__(
        self,
        settings: Mapping[str, Any],
        settings_initializers: Sequence[SettingInitializer] | None = None,
    ):
        """Create a config from raw settings.

        Initializers targeting the same setting run in the given order, each
        receiving the output of the previous one (``None`` when the setting
        is absent). The last output becomes the setting's value, which lets
        initializers supply defaults as well as validate.

        :param settings: The raw settings.
        :param settings_initializers: Optional initializers to run.
        """
        self._settings: dict[str, Any] = dict(settings or {})
        self._initializers: Mapping[str, Sequence[SettingInitializer]] = (
            self._group_by_setting(settings_initializers or ())
        )
        self._run_initializers()

    def __contains__(self, setting: object) -> bool:
        return setting in self._settings

    def __getattr__(self, setting: str) -> Any:  # noqa: ANN401
        try:
            return self._settings[setting]
        except KeyError:
            raise MissingSettingError(setting=setting) from None

    def get(self, setting: str, default: Any = None) -> Any:  # noqa: ANN401
        """Return a setting's value or ``default`` when it is not set."""
        return self._settings.get(setting, default)

    def experiment_option(
        self,
        option: str,
        default: Any = None,  # noqa: ANN401
    ) -> Any:  # noqa: ANN401
        """Return an entry of the ``EXPERIMENT`` setting.

        :param option: The option name, e.g. ``"fraction"``.
        :param default: Returned when the option is not configured.

        :return: The configured value or ``default``.
        """
        experiment: Mapping[str, Any] = self._settings.get("EXPERIMENT") or {}
        return experiment.get(option, default)

    def _run_initializers(self) -> None:
        from app.lib import Pipeline

        for _setting, _initializers in self._initializers.items():
            raw_value: Any = self._settings.get(_setting)
            self._settings[_setting] = Pipeline(*_initializers)(raw_value)
            _LOGGER.debug('Initialized the setting "%s".', _setting)

    @staticmethod
    def _group_by_setting(
        initializers: Sequence[SettingInitializer],
    ) -> Mapping[str, Sequence[SettingInitializer]]:
        grouped: dict[str, list[SettingInitializer]] = {}
        for _initializer in initializers:
            grouped.setdefault(_initializer.setting, []).append(_initializer)
        return grouped
