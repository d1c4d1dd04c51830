"""Deterministic JSON emission with 17-significant-digit floats.

The stock json module formats floats with repr, which is shortest-roundtrip
rather than fixed-width. Reports here promise 17 significant digits so text
diffs stay bit-meaningful, hence this small emitter. Output is ASCII, keys
keep insertion order, and NaN/Inf are rejected (they are not JSON).
"""

import math


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize {x!r} as JSON")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        elif ord(ch) < 0x7F:
            out.append(ch)
        else:
            out.append(f"\\u{ord(ch):04x}")
    return "".join(out)


def dumps(obj, indent: int | None = None) -> str:
    """Serialize nested dicts/lists/scalars; floats get 17 significant digits."""
    pieces: list[str] = []
    _write(obj, pieces, indent, 0)
    return "".join(pieces)


def _write(obj, pieces, indent, depth):
    pad = "" if indent is None else "\n" + " " * (indent * (depth + 1))
    close_pad = "" if indent is None else "\n" + " " * (indent * depth)
    if obj is None:
        pieces.append("null")
    elif obj is True:
        pieces.append("true")
    elif obj is False:
        pieces.append("false")
    elif isinstance(obj, int):
        pieces.append(str(obj))
    elif isinstance(obj, float):
        pieces.append(_fmt_float(obj))
    elif isinstance(obj, str):
        pieces.append('"' + _escape(obj) + '"')
    elif isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                pieces.append(",")
            pieces.append(pad)
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            pieces.append('"' + _escape(key) + ('": ' if indent else '":'))
            _write(value, pieces, indent, depth + 1)
        pieces.append(close_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            pieces.append("[]")
            return
        pieces.append("[")
        for i, value in enumerate(obj):
            if i:
                pieces.append(",")
            pieces.append(pad)
            _write(value, pieces, indent, depth + 1)
        pieces.append(close_pad + "]")
    else:
        try:
            import numpy as np

            if isinstance(obj, np.bool_):
                pieces.append("true" if obj else "false")
                return
            if isinstance(obj, np.integer):
                pieces.append(str(int(obj)))
                return
            if isinstance(obj, np.floating):
                pieces.append(_fmt_float(float(obj)))
                return
            if isinstance(obj, np.ndarray):
                _write(obj.tolist(), pieces, indent, depth)
                return
        except ImportError:
            pass
        raise TypeError(f"cannot serialize {type(obj).__name__} as JSON")
