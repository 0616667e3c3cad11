import logging

from rich.console import Console
from rich.logging import RichHandler

from app.config import settings

_configured = False


def configure_logging(level: str | None = None) -> None:
    """Configurar el logging raíz con RichHandler (idempotente)"""
    global _configured
    level_name = (level or settings.log_level).upper()
    root = logging.getLogger()
    root.setLevel(level_name)
    if _configured:
        return
    # stdout queda libre para la salida CSV de la CLI
    handler = RichHandler(console=Console(stderr=True), rich_tracebacks=settings.debug, show_path=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    _configured = True
