"""Cavity-EIT / vacuum-induced-transparency modeling toolkit.

Subpackages are importable directly; nothing heavy happens at import time.
All internal frequencies are angular (rad/s). Command-line and file I/O
use MHz / um / us instead; the conversion lives in vitlab.config only.
"""

from vitlab.errors import BandCoverageError, ConvergenceError, RankDeficientError

__all__ = ["BandCoverageError", "ConvergenceError", "RankDeficientError"]
__version__ = "0.1.0"
