"""
Duration parsing for trimming the start of sampled curves.
Accepts a plain sample count ('18') or a duration ('180s', '3min', '0.05h').
"""

import math
import re
from typing import Optional

from core.errors import ConfigError


DURATION_PATTERN = re.compile(r'^(\d+(?:\.\d+)?)\s*(s|sec|secs|m|min|mins|h|hr|hrs)?$')

UNIT_SECONDS = {
    's': 1.0, 'sec': 1.0, 'secs': 1.0,
    'm': 60.0, 'min': 60.0, 'mins': 60.0,
    'h': 3600.0, 'hr': 3600.0, 'hrs': 3600.0,
}


def parse_duration_seconds(text: str) -> Optional[float]:
    """
    Parse '<number><unit>' into seconds.

    Returns:
        Seconds, or None if text carries no unit or does not match
    """
    if not isinstance(text, str):
        return None

    match = DURATION_PATTERN.match(text.strip().lower())
    if not match or match.group(2) is None:
        return None

    return float(match.group(1)) * UNIT_SECONDS[match.group(2)]


def parse_trim(text: str, sampling_interval: float = 10.0) -> int:
    """
    Number of leading samples to drop.

    Args:
        text: Sample count or duration
        sampling_interval: Seconds between samples

    Returns:
        Sample count; durations are rounded up to whole samples

    Raises:
        ConfigError: If text is neither a count nor a duration
    """
    text = str(text).strip()

    if text.isdigit():
        return int(text)

    seconds = parse_duration_seconds(text)
    if seconds is None:
        raise ConfigError(f"Trim must be a sample count or a duration like '3min', got '{text}'")
    if sampling_interval <= 0:
        raise ConfigError(f"Sampling interval must be > 0, got {sampling_interval}")

    return int(math.ceil(seconds / sampling_interval - 1e-9))
