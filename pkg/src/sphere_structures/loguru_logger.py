from loguru import logger

from sphere_structures import config

logger.remove()
logger.add("sphere_structures.log", rotation="10 MB", level="DEBUG" if config.DEBUG else "INFO")
