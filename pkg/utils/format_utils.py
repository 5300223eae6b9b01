"""
Number formatting for progress output
"""

_FLOP_UNITS = [(1e15, "PFLOP"), (1e12, "TFLOP"), (1e9, "GFLOP"), (1e6, "MFLOP"), (1e3, "kFLOP")]


def format_flops(value: float) -> str:
    """Human readable FLOP count"""
    for scale, unit in _FLOP_UNITS:
        if abs(value) >= scale:
            return f"{value / scale:.2f} {unit}"
    return f"{value:g} FLOP"


def format_ms(value: float) -> str:
    if value >= 1000.0:
        return f"{value / 1000.0:.2f}s"
    return f"{value:.1f}ms"
