"""
Functions for reading and writing result files

All writes are atomic: the payload goes to a temporary file in the
destination directory, which is then renamed over the target.
"""

import json
import logging
import os
import tempfile

import pandas as pd

import config

logger = logging.getLogger(__name__)


def resolve_output_path(path):
    """
    Resolve a relative output path against BETHE_VQE_OUTPUT_DIR when it is set

    Parameters:
    path (str): requested path

    Returns:
    str: path to write to
    """
    if path is None:
        return None
    if not os.path.isabs(path) and config.OUTPUT_DIR:
        return os.path.join(config.OUTPUT_DIR, path)
    return path


def _atomic_write(path, write):
    target = resolve_output_path(path)
    directory = os.path.dirname(os.path.abspath(target))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline='') as handle:
            write(handle)
        os.replace(tmp_path, target)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    logger.info("Saved %s", target)
    return target


def save_json(payload, path):
    """
    Save a JSON document

    Parameters:
    payload (dict): JSON-serializable data
    path (str): destination

    Returns:
    str: the path written
    """
    return _atomic_write(path, lambda handle: json.dump(payload, handle, indent=2))


def save_csv(frame, path):
    """
    Save a DataFrame to CSV without the index

    Parameters:
    frame (pandas.DataFrame): table to save
    path (str): destination

    Returns:
    str: the path written
    """
    return _atomic_write(path, lambda handle: frame.to_csv(handle, index=False, float_format='%.17g'))


def save_text(text, path):
    return _atomic_write(path, lambda handle: handle.write(text))


def load_json(path):
    with open(path) as handle:
        return json.load(handle)


def load_csv(path):
    return pd.read_csv(path)


def load_text(path):
    """
    Load a text file, e.g. an emitted circuit

    Parameters:
    path (str): file to read

    Returns:
    str: file contents
    """
    try:
        with open(path) as handle:
            return handle.read()
    except FileNotFoundError:
        raise ValueError(f"{path} not found") from None
