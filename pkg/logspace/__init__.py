"""Log-space number representation"""
from .log_value import LogValue, BIG, LN_BIG

__all__ = [
    "LogValue",
    "BIG",
    "LN_BIG"
]
