import io
import json
import math
import os
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from src.config import Config
from src.exceptions import DomainError
from src.utils.logger import get_logger

logger = get_logger(__name__)

OUTPUT_FORMATS = ("json", "csv", "text")

Document = Union[Dict[str, Any], List[Dict[str, Any]]]


def clean_value(value: Any) -> Any:
    """JSON-safe scalar: non-finite floats become 'inf'/'-inf'/'nan'."""
    if isinstance(value, bool) or value is None:
        return value
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return "nan"
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {str(k): clean_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean_value(v) for v in value]
    return value


class OutputGenerator:
    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()

    def generate_output(
        self,
        document: Document,
        format_type: str = "text",
        columns: Optional[Sequence[str]] = None,
    ) -> str:
        format_type = format_type.lower()
        if format_type not in OUTPUT_FORMATS:
            raise DomainError(f"Unknown output format: {format_type}")
        document = clean_value(document)

        if format_type == "json":
            return self._generate_json_output(document)
        if format_type == "csv":
            return self._generate_csv_output(document, columns)
        return self._generate_text_output(document, columns)

    def _generate_json_output(self, document: Document) -> str:
        return json.dumps(document, indent=2, sort_keys=True) + "\n"

    def _frame(
        self, document: Document, columns: Optional[Sequence[str]]
    ) -> pd.DataFrame:
        rows = document if isinstance(document, list) else [document]
        rows = [
            {
                key: "; ".join(map(str, value))
                if isinstance(value, list)
                else value
                for key, value in row.items()
            }
            for row in rows
        ]
        return pd.DataFrame(rows, columns=list(columns) if columns else None)

    def _generate_csv_output(
        self, document: Document, columns: Optional[Sequence[str]]
    ) -> str:
        buffer = io.StringIO()
        self._frame(document, columns).to_csv(
            buffer, index=False, lineterminator="\n"
        )
        return buffer.getvalue()

    def _generate_text_output(
        self, document: Document, columns: Optional[Sequence[str]]
    ) -> str:
        if isinstance(document, list):
            if not document:
                return "(no rows)\n"
            frame = self._frame(document, columns)
            return frame.to_string(index=False, na_rep="-") + "\n"

        width = max((len(key) for key in document), default=0)
        lines = []
        for key in columns or document.keys():
            value = document.get(key)
            if isinstance(value, list):
                value = ", ".join(map(str, value)) or "-"
            elif value is None:
                value = "-"
            elif isinstance(value, float):
                value = f"{value:.6g}"
            lines.append(f"{key.ljust(width)}  {value}")
        return "\n".join(lines) + "\n"

    def write_output(self, content: str, output_path: str) -> str:
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output_path, "w", encoding="utf-8") as f:
            f.write(content)
        logger.info(f"Wrote {output_path}")
        return output_path
