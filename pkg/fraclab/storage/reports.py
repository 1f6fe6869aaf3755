import json
import logging
import platform
from pathlib import Path

import numpy as np
import pydantic
import scipy

from fraclab import __version__
from fraclab.schemas.report import Provenance, ReportDocument

logger = logging.getLogger(__name__)

SCHEMA_FILENAME = "report.schema.json"


def provenance() -> Provenance:
    return Provenance(
        package="fraclab",
        version=__version__,
        python=platform.python_version(),
        numpy=np.__version__,
        scipy=scipy.__version__,
        pydantic=pydantic.VERSION,
    )


def report_schema() -> dict:
    return ReportDocument.model_json_schema()


def write_report(path: Path, document: ReportDocument) -> Path:
    """Write the report and its JSON schema side by side."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.model_dump_json(indent=2) + "\n")
    schema_path = path.parent / SCHEMA_FILENAME
    schema_path.write_text(json.dumps(report_schema(), indent=2, sort_keys=True) + "\n")
    logger.info(f"Wrote report to {path}")
    return path


def read_report(path: Path) -> ReportDocument:
    return ReportDocument.model_validate_json(path.read_text())
