from typing import Any, Optional

from pydantic import BaseModel

from app import __version__


class RunManifest(BaseModel):
    """Manifiesto de reproducibilidad escrito junto a cada salida"""
    subcommand: str
    inputs: list[str] = []
    output: Optional[str] = None
    model: Optional[str] = None
    method: Optional[str] = None
    seed: Optional[int] = None
    overrides: dict[str, Any] = {}
    tool_version: str = __version__
