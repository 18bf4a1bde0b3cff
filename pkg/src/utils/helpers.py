"""
Helper utilities for dtembed
Formatting and small conversions used by the pipeline
"""

from typing import List, Optional, Sequence

TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


def format_duration(seconds: float) -> str:
    """
    Format duration in seconds to clock format
    Examples: 0:07, 3:45, 1:02:30
    """
    seconds = int(round(seconds))
    if seconds < 0:
        return "0:00"

    hours = seconds // 3600
    minutes = (seconds % 3600) // 60
    seconds = seconds % 60

    if hours > 0:
        return f"{hours}:{minutes:02d}:{seconds:02d}"
    else:
        return f"{minutes}:{seconds:02d}"


def truncate_string(text: str, max_length: int, suffix: str = "...") -> str:
    """
    Truncate string to specified length
    """
    if len(text) <= max_length:
        return text

    return text[:max_length - len(suffix)] + suffix


def parse_bool(text: str) -> bool:
    """Parse a config-file boolean"""
    lowered = text.strip().lower()
    if lowered in TRUE_WORDS:
        return True
    if lowered in FALSE_WORDS:
        return False
    raise ValueError(f"'{text}' is not a boolean (use one of {TRUE_WORDS + FALSE_WORDS})")


def parse_float_list(text: str) -> List[float]:
    """'0,0.2,0.4' -> [0.0, 0.2, 0.4]"""
    values = [part.strip() for part in text.split(",")]
    if not values or any(not v for v in values):
        raise ValueError(f"'{text}' is not a comma-separated list of numbers")
    return [float(v) for v in values]


def resolve_workers(cap: int, deterministic: bool, requested: Optional[int] = None) -> int:
    """Worker count: 1 in deterministic mode, otherwise min(requested, cap)"""
    if deterministic:
        return 1
    if requested is None:
        return max(1, cap)
    return max(1, min(requested, cap))


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]], max_width: int = 24) -> str:
    """
    Plain fixed-width table for log output
    """
    cells = [[truncate_string(str(c), max_width) for c in row] for row in [headers, *rows]]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for n, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
