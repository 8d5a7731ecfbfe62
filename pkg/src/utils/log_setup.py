import logging
import os
from typing import Optional

LOG_FORMAT = "[%(asctime)s] - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y/%m/%d %H:%M:%S"


def configure_logging(output_dir: Optional[str] = None, level: int = logging.INFO) -> None:
    """
    Configure root logging with a stream handler and, optionally, a run log file.

    Args:
        output_dir: Directory receiving ``run.log``; no file handler when None
        level: Root logging level
    """
    handlers = [logging.StreamHandler()]
    if output_dir is not None:
        os.makedirs(output_dir, exist_ok=True)
        handlers.append(logging.FileHandler(os.path.join(output_dir, "run.log")))

    logging.basicConfig(
        format=LOG_FORMAT, datefmt=DATE_FORMAT, level=level, handlers=handlers, force=True
    )
