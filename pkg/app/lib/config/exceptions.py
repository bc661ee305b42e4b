from app.core import SNBenchException


class ConfigurationError(SNBenchException):
    """A benchmark session could not be configured."""

    def __init__(self, message: str | None = None):
        super().__init__(
            message=message or "The benchmark could not be configured.",
        )


class ImproperlyConfiguredError(ConfigurationError):
    """A setting or experiment option holds an invalid value."""


class MissingSettingError(ConfigurationError, LookupError):
    """A setting that was never configured was read."""

    def __init__(self, setting: str, message: str | None = None):
        """
        :param setting: The name of the missing setting.
        :param message: An optional message; one naming the setting is
            generated otherwise.
        """
        self._setting: str = setting
        ConfigurationError.__init__(
            self,
            message=message or 'Setting "%s" does not exist.' % setting,
        )

    @property
    def setting(self) -> str:
        """The name of the missing setting."""
        return self._setting
