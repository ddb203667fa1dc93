import hashlib
import logging

from rich.console import Console
from rich.logging import RichHandler

from app.config import settings


def setup_logging():
    """
    Setup logging configuration.
    """
    logger = logging.getLogger()
    logger.handlers = []  # Clear any existing handlers
    logging.basicConfig(
        level=logging.DEBUG if settings.ENVIRONMENT == "development" else logging.INFO,
        # stderr keeps stdout free for --json documents
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
    )


def content_hash(payload: str) -> str:
    """Short sha256 digest used to tag reports with the config they came from."""
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
