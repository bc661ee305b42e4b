"""The run CSV schema.

A run file is a block of ``# key=value`` header lines followed by one row
per :class:`~app.core.IterationRecord`. The header always carries
``schema_version``; readers refuse files written under another version.
"""

from collections.abc import Mapping, Sequence
from logging import getLogger
from pathlib import Path
from typing import Any, Final

import pandas as pd

from app.core import ExperimentError, RunTrace

from .types import RunHeader

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

SCHEMA_VERSION: Final[int] = 1

HEADER_PREFIX: Final[str] = "# "

RUN_COLUMNS: Final[Sequence[str]] = (
    "iter",
    "cum_props",
    "train_loss",
    "test_error",
    "rho_tilde",
    "rho_hat",
    "accepted",
    "delta_or_sigma",
    "step_norm",
    "gamma",
    "size_h",
    "size_g",
    "size_b",
    "coupled",
    "grad_norm",
    "theta",
    "kind",
    "props",
    "wall_ms",
)

SUMMARY_COLUMNS: Final[Sequence[str]] = (
    "run_file",
    "dataset",
    "algorithm",
    "variant",
    "fraction",
    "radius_or_penalty",
    "seed",
    "iterations",
    "cum_props",
    "train_loss",
    "test_error",
    "termination",
)


# =============================================================================
# FRAMES
# =============================================================================


def trace_frame(
    trace: RunTrace,
    include_test_error: bool = True,
) -> pd.DataFrame:
    """Return the records of a trace as a frame with the run columns.

    :param trace: The run trace.
    :param include_test_error: Keep the ``test_error`` column; dropped for
        datasets without a test split.
    """
    frame = pd.DataFrame(
        [_record.to_mapping() for _record in trace.records],
        columns=list(RUN_COLUMNS),
    )
    if not include_test_error:
        frame = frame.drop(columns=["test_error"])
    return frame


# =============================================================================
# FILES
# =============================================================================


def write_run_csv(
    path: Path,
    trace: RunTrace,
    header: RunHeader,
    include_test_error: bool = True,
) -> Path:
    """Write a run trace with its header lines and return the path.

    Header values must not contain line breaks. Float columns are written
    with pandas' round-trip representation, so a value read back compares
    equal to the recorded one.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = trace_frame(trace, include_test_error=include_test_error)
    with path.open("w", encoding="utf-8", newline="") as stream:
        for key, value in _header_items(header):
            stream.write("%s%s=%s\n" % (HEADER_PREFIX, key, value))
        frame.to_csv(stream, index=False, lineterminator="\n")
    _LOGGER.debug("Wrote %d records to %s.", len(frame), path)
    return path


def read_run_header(path: Path) -> dict[str, str]:
    """Return the ``# key=value`` header of a run file as strings."""
    header: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as stream:
        for line in stream:
            if not line.startswith(HEADER_PREFIX):
                break
            key, _, value = line[len(HEADER_PREFIX) :].rstrip("\n").partition(
                "=",
            )
            header[key] = value
    return header


def read_run_csv(path: Path) -> tuple[dict[str, str], pd.DataFrame]:
    """Read a run file back into its header and records.

    :raise ExperimentError: If the file cannot be read or was written under
        a different schema version.
    """
    try:
        header = read_run_header(path)
        frame = pd.read_csv(
            path,
            comment="#",
            float_precision="round_trip",
        )
    except (OSError, pd.errors.ParserError) as exp:
        raise ExperimentError(
            message='Could not read run file "%s": %s' % (path, exp),
        ) from exp
    version = header.get("schema_version")
    if version != str(SCHEMA_VERSION):
        raise ExperimentError(
            message='Run file "%s" has schema version %s, expected %d.'
            % (path, version, SCHEMA_VERSION),
        )
    return header, frame


def write_summary_csv(
    path: Path,
    rows: Sequence[Mapping[str, Any]],
) -> Path:
    """Write one summary row per grid point, in the given order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(SUMMARY_COLUMNS))
    frame.to_csv(path, index=False, lineterminator="\n")
    _LOGGER.info("Wrote the summary of %d runs to %s.", len(frame), path)
    return path


def _header_items(header: RunHeader) -> Sequence[tuple[str, Any]]:
    items = [("schema_version", SCHEMA_VERSION)]
    items.extend(
        (_k, _v) for _k, _v in header.items() if _k != "schema_version"
    )
    return items
