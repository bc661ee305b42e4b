from collections.abc import Mapping
from typing import Any

RunHeader = Mapping[str, Any]

SummaryRow = Mapping[str, Any]
