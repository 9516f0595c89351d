"""JSON-lines protocol trace."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

from ..models.core import TraceError


logger = logging.getLogger(__name__)

TRACE_FILE = "trace.jsonl"


def encode_record(record: Dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class TraceWriter:
    """Collects trace records in memory and writes them as JSON lines"""

    def __init__(self) -> None:
        self.records: List[Dict[str, Any]] = []

    def add(self, t: float, kind: str, agent: Optional[str] = None, **detail: Any) -> None:
        self.records.append({"t": t, "kind": kind, "agent": agent, "detail": detail})

    def extend(self, records: List[Dict[str, Any]]) -> None:
        self.records.extend(records)

    def __len__(self) -> int:
        return len(self.records)

    def of_kind(self, kind: str) -> List[Dict[str, Any]]:
        return [r for r in self.records if r["kind"] == kind]

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        if path.is_dir():
            path = path / TRACE_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in self.records:
                f.write(encode_record(record))
                f.write("\n")
        logger.info(f"Wrote {len(self.records)} trace records to {path}")
        return path


def iter_trace(path: Union[str, Path]) -> Iterator[Dict[str, Any]]:
    """Trace records from a trace file or a run directory"""
    path = Path(path)
    if path.is_dir():
        path = path / TRACE_FILE
    if not path.exists():
        raise TraceError(f"trace file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceError(f"{path}:{line_number}: invalid JSON ({e})") from e
            if not isinstance(record, dict) or not {"t", "kind", "agent", "detail"} <= set(record):
                raise TraceError(f"{path}:{line_number}: record lacks t/kind/agent/detail")
            yield record


def read_trace(path: Union[str, Path]) -> List[Dict[str, Any]]:
    return list(iter_trace(path))
