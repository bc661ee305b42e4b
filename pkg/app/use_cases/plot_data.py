import math
from collections.abc import Sequence
from logging import getLogger
from pathlib import Path
from typing import Final

import numpy as np
import pandas as pd

from app.core import ExperimentError

from .telemetry import read_run_csv

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)

PLOT_METRICS: Final[Sequence[str]] = ("train_loss", "test_error")

PLOT_COLUMNS: Final[Sequence[str]] = (
    "variant",
    "algorithm",
    "fraction",
    "radius_or_penalty",
    "seed",
    "cum_props",
    "value",
)


# =============================================================================
# HELPERS
# =============================================================================


def _header_float(header: dict[str, str], key: str) -> float:
    value = header.get(key)
    return math.nan if value in (None, "") else float(value)


def downsample_rows(frame: pd.DataFrame, max_rows: int) -> pd.DataFrame:
    """Keep at most ``max_rows`` evenly spaced rows, always including the
    first and the last one."""
    if max_rows < 2:
        raise ExperimentError(message="Downsampling keeps at least 2 rows.")
    if len(frame) <= max_rows:
        return frame
    positions = np.unique(
        np.linspace(0, len(frame) - 1, max_rows).round().astype(int),
    )
    return frame.iloc[positions]


# =============================================================================
# PLOT DATA
# =============================================================================


def emit_plot_data(
    paths: Sequence[Path],
    metric: str,
    downsample: int | None = None,
) -> pd.DataFrame:
    """Combine run files into one long table of ``metric`` against the
    cumulative propagation count.

    :param paths: The run CSV files; all must belong to the same dataset.
    :param metric: ``train_loss`` or ``test_error``.
    :param downsample: Keep at most this many rows per run.

    :return: A frame with the columns ``variant``, ``algorithm``,
        ``fraction``, ``radius_or_penalty``, ``seed``, ``cum_props`` and
        ``value``, one series per run in ``paths`` order. Runs that differ
        only in their sample fraction or start radius (penalty) stay apart.
        Keys missing from a header read as NaN.

    :raise ExperimentError: If no file is given, the metric is unknown, the
        runs are of different datasets or a run has no ``metric`` column.
    """
    if metric not in PLOT_METRICS:
        raise ExperimentError(
            message='Unknown metric "%s", expected one of %s.'
            % (metric, ", ".join(PLOT_METRICS)),
        )
    if not paths:
        raise ExperimentError(message="No run files were given.")

    series: list[pd.DataFrame] = []
    datasets: set[str] = set()
    for path in paths:
        header, frame = read_run_csv(Path(path))
        datasets.add(header.get("dataset", ""))
        if len(datasets) > 1:
            raise ExperimentError(
                message="Refusing to combine runs of the datasets %s."
                % ", ".join(sorted(datasets)),
            )
        if metric not in frame.columns:
            raise ExperimentError(
                message='Run file "%s" has no "%s" column.' % (path, metric),
            )
        if downsample is not None:
            frame = downsample_rows(frame, downsample)
        series.append(
            pd.DataFrame(
                {
                    "variant": header.get("variant"),
                    "algorithm": header.get("algorithm"),
                    "fraction": _header_float(header, "fraction"),
                    "radius_or_penalty": _header_float(
                        header,
                        "radius_or_penalty",
                    ),
                    "seed": int(header.get("seed", 0)),
                    "cum_props": frame["cum_props"].to_numpy(),
                    "value": frame[metric].to_numpy(),
                },
                columns=list(PLOT_COLUMNS),
            ),
        )
    _LOGGER.debug("Combined %d runs for %s.", len(series), metric)
    return pd.concat(series, ignore_index=True)


def write_plot_data(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    _LOGGER.info("Wrote %d plot rows to %s.", len(frame), path)
    return path
