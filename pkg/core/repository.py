"Persistent store for fitted Bryant–Salamon normalization constants."

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List

import orjson

from core.config import get_settings

logger = logging.getLogger(__name__)


class ConstantsRepository:
    """A flat JSON list of ``{spec_id, constants, residual, panel_seed}`` records."""

    def __init__(self, path: Path | None = None) -> None:
        self.path = Path(path) if path is not None else get_settings().constants_path

    def _json_path(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not self.path.exists():
            self.path.write_bytes(b"[]")
        return self.path

    def _read_json(self) -> List[Dict[str, Any]]:
        try:
            data = orjson.loads(self._json_path().read_bytes())
        except orjson.JSONDecodeError:
            logger.warning("constants manifest %s is unreadable; starting empty", self.path)
            return []
        return data if isinstance(data, list) else []

    def _write_json(self, data: List[Dict[str, Any]]) -> None:
        self._json_path().write_bytes(orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS))

    def insert(self, record: Dict[str, Any]) -> None:
        """Add a record, replacing any earlier one for the same spec and panel seed."""

        data = [
            r
            for r in self._read_json()
            if (r.get("spec_id"), r.get("panel_seed")) != (record.get("spec_id"), record.get("panel_seed"))
        ]
        data.append(record)
        self._write_json(data)

    def find(self, spec_id: str, panel_seed: int | None = None) -> Dict[str, Any] | None:
        for record in reversed(self._read_json()):
            if record.get("spec_id") != spec_id:
                continue
            if panel_seed is None or record.get("panel_seed") == panel_seed:
                return record
        return None

    def list_recent(self, limit: int = 20) -> List[Dict[str, Any]]:
        return self._read_json()[-limit:]
