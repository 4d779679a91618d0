import logging

LOGGER = logging.getLogger("PySSKLab")
LOGGER.setLevel(logging.DEBUG)
formatter = logging.Formatter("%(asctime)s\t%(levelname)s\t%(message)s")

stream_handler = logging.StreamHandler()
stream_handler.setLevel(logging.INFO)
stream_handler.setFormatter(formatter)
LOGGER.addHandler(stream_handler)


def log_to_file(filename: str, mode: str = "w") -> logging.FileHandler:
    """Attach a file handler to the package logger.

    Args:
        filename (str): path of the log file.
        mode (str, optional): file mode. Defaults to "w".

    Returns:
        logging.FileHandler: the attached handler, so callers can detach it.
    """
    file_handler = logging.FileHandler(filename=filename, mode=mode)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)
    LOGGER.addHandler(file_handler)
    return file_handler
