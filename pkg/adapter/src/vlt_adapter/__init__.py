"""Scoring adapter speaking the JSONL request/reply wire protocol.

Reads {id, src, hyp, ref} requests from stdin and writes {id, score}
replies to stdout, one JSON object per line.
"""

from .serve import serve

__version__ = "0.1.0"
__all__ = ["serve", "__version__"]
