from typing import TYPE_CHECKING, Any

import pytest

from app.lib import (
    Config,
    ImproperlyConfiguredError,
    MissingSettingError,
    SettingInitializer,
)
from tests import TestCase

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence


# =============================================================================
# HELPERS
# =============================================================================


class _DataDirInitializer(SettingInitializer):
    """
    An initializer that strips trailing slashes from the data directory and
    defaults it to ``data``.
    """

    @property
    def setting(self) -> str:
        return "DATA_DIR"

    def execute(self, an_input: str | None) -> str:
        return (an_input or "data").rstrip("/")


class _DoubleWorkers(SettingInitializer):
    """
    An initializer that doubles the worker count, or returns 1 when the count
    is not set.
    """

    @property
    def setting(self) -> str:
        return "WORKERS"

    def execute(self, an_input: int | None) -> int:
        return 2 * an_input if an_input is not None else 1


class _RejectNegativeWorkers(SettingInitializer):
    @property
    def setting(self) -> str:
        return "WORKERS"

    def execute(self, an_input: int) -> int:
        if an_input < 0:
            raise ImproperlyConfiguredError(message="Negative workers.")
        return an_input


# =============================================================================
# TEST CASES
# =============================================================================


class TestConfig(TestCase):
    """Tests for the :class:`Config` class."""

    def setUp(self) -> None:
        super().setUp()
        self._settings: Mapping[str, Any] = {
            "DATA_DIR": "datasets/",
            "WORKERS": 2,
            "EXPERIMENT": {"fraction": 0.05, "algo": ["str"]},
        }
        self._initializers: Sequence[SettingInitializer] = (
            _DataDirInitializer(),
            _DoubleWorkers(),
        )

    def test_initializers_are_run(self) -> None:
        """
        Assert that initializers are run and the settings values are updated.
        """
        config = Config(
            settings=self._settings,
            settings_initializers=self._initializers,
        )

        assert config.DATA_DIR == "datasets"
        assert config.WORKERS == 4

    def test_initializers_can_set_default_values(self) -> None:
        """
        Assert that when a setting is not provided but an initializer for the
        setting exists, the initializer's output becomes the setting's value.
        """
        config = Config(settings={}, settings_initializers=self._initializers)

        assert config.DATA_DIR == "data"
        assert config.WORKERS == 1

    def test_initializers_of_one_setting_run_in_order(self) -> None:
        """
        Assert that the initializers of one setting are chained in the given
        order, each receiving the previous output.
        """
        config = Config(
            settings={"WORKERS": 3},
            settings_initializers=(_DoubleWorkers(), _DoubleWorkers()),
        )

        assert config.WORKERS == 12

    def test_initializer_errors_propagate(self) -> None:
        """
        Assert that an initializer rejecting a value aborts the construction
        of the config.
        """
        with pytest.raises(ImproperlyConfiguredError, match="Negative"):
            Config(
                settings={"WORKERS": -1},
                settings_initializers=(_RejectNegativeWorkers(),),
            )

    def test_missing_settings_retrieval_using_dot_notation(self) -> None:
        """
        Assert that retrieval of missing settings using the dot notation
        results in a :class:`MissingSettingError`, which is also a
        ``LookupError``.
        """
        config = Config(settings={})
        with pytest.raises(MissingSettingError) as exp:
            _: Any = config.REPRODUCIBLE

        assert exp.value.setting == "REPRODUCIBLE"
        assert exp.value.message == 'Setting "REPRODUCIBLE" does not exist.'
        assert isinstance(exp.value, LookupError)

    def test_settings_retrieval_using_get_method(self) -> None:
        """
        Assert that ``get`` returns the setting or the default value when the
        setting is missing.
        """
        config = Config(settings={**self._settings, "odd::name": "value"})

        assert config.get("WORKERS") == 2
        assert config.get("odd::name") == "value"
        assert config.get("MISSING", default="default") == "default"
        assert config.get("MISSING") is None

    def test_settings_without_initializers_are_not_modified(self) -> None:
        """
        Assert that settings without initializers are returned as given.
        """
        config = Config(
            settings=self._settings,
            settings_initializers=self._initializers,
        )

        assert config.EXPERIMENT == {"fraction": 0.05, "algo": ["str"]}

    def test_setting_membership(self) -> None:
        """Assert that ``in`` reports only the configured settings."""
        config = Config(settings=self._settings)

        assert "WORKERS" in config
        assert "LOGGING" not in config

    def test_experiment_option(self) -> None:
        """
        Assert that ``experiment_option`` reads the ``EXPERIMENT`` setting and
        falls back to the default when the option or the setting is missing.
        """
        config1 = Config(settings=self._settings)
        config2 = Config(settings={})

        assert config1.experiment_option("fraction") == 0.05
        assert config1.experiment_option("algo") == ["str"]
        assert config1.experiment_option("seed", default=0) == 0
        assert config2.experiment_option("fraction") is None
