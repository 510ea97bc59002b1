from mqpsh.core.config import settings, get_settings
from mqpsh.core.logger import logger, configure_logging

__all__ = ["logger", "configure_logging", "settings", "get_settings"]
