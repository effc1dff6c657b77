"""
Module containing utilities used by mddc analytics
"""

# core python dependencies
from enum import Enum
import logging
import os

# external dependencies
import numpy as np
import pandas as pd

logger = logging.getLogger('mddc_analytics')

class MessageLevel(str, Enum):
    """
    Severity of a message attached to a result
    """
    ERROR = "Error"
    INFO = "Info"
    WARNING = "Warning"

class Message:
    """Message fragment attached by mddc analytics to its results.

    Attributes:
        level (MessageLevel): Severity of this message.
        msg (str): Human readable message string.
    """

    def __init__(self, level, msg):
        """
        Args:
            level (MessageLevel): Severity of this message.
            msg (str): Human readable message string.
        """

        self.level = level
        self.msg = msg

    def __repr__(self):
        return f"Message({self.level.value}, {self.msg!r})"

    @staticmethod
    def warn(msgs, text):
        """Log a warning and append it to msgs"""
        logger.warning(text)
        msgs.append(Message(MessageLevel.WARNING, text))

    @staticmethod
    def join_messages(msgs):
        """Group messages by level and join them; levels without messages are left out.

        Args:
            msgs (Sequence[Message]): a sequence of messages

        Returns:
            str or None: e.g. "Warning: a, b; Info: c"; None when msgs is empty
        """
        parts = []
        for level in (MessageLevel.ERROR, MessageLevel.WARNING, MessageLevel.INFO):
            texts = [x.msg for x in msgs if x.level == level]
            if texts:
                parts.append(f"{level.value}: " + ', '.join(texts))
        return '; '.join(parts) if parts else None

def like(values, frame: pd.DataFrame):
    """Wrap a 2-d array in a DataFrame carrying the labels of frame"""
    return pd.DataFrame(np.asarray(values), index=frame.index.copy(), \
        columns=frame.columns.copy())

def resolve_threads(threads):
    """Worker count for joblib: explicit value, else MDDC_THREADS, else all cores"""
    if threads is not None:
        return max(1, int(threads))
    # imported lazily so that tests can patch the environment before use
    from mddc_analytics.config import env_config
    from mddc_analytics import constants
    return env_config.get(constants.THREADS, os.cpu_count() or 1)

def chunk_ranges(total, threads):
    """Split range(total) into contiguous chunks, a few per worker"""
    n_chunks = max(1, min(total, 4 * threads))
    bounds = np.linspace(0, total, n_chunks + 1).astype(int)
    return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
