"""JSON/CSV text with 17-significant-digit floats.

``json.dumps`` prints the shortest round-trip repr; the output contract
here is a fixed ``%.17g`` so files diff cleanly across platforms. Infinite
values are written as the string ``"inf"`` (JSON has no infinity literal).
"""

import json
import math

import numpy as np


def fmt(x):
    """Format one number: ``inf``/``-inf`` or ``%.17g``."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("NaN is never a valid output value")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def parse_number(tok):
    if isinstance(tok, str):
        t = tok.strip().lower()
        if t in ("inf", "+inf", "infinity"):
            return math.inf
        if t in ("-inf", "-infinity"):
            return -math.inf
        return float(t)
    return float(tok)


def _enc(obj, indent, level):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = "," if indent is None else ","
    colon = ":" if indent is None else ": "
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt(obj)
        return json.dumps(s) if "inf" in s else s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + colon + _enc(v, indent, level + 1)
                 for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _enc(v, indent, level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    if hasattr(obj, "to_dict"):
        return _enc(obj.to_dict(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=None):
    return _enc(obj, indent, 0)
