"""JSON codecs for register values, trace fields, and dumps.

Scalars are 64-bit unsigned ints, the bottom sentinel encodes as the string
"bot", sets and timestamped pair sets get tagged wrappers so that round
trips are exact.
"""

from byzreg.engine import impl as _impl

BOTTOM = _impl.BOTTOM


def encode_value(v):
    if v is BOTTOM:
        return "bot"
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, (frozenset, set)):
        pairs = [x for x in v if isinstance(x, tuple)]
        if pairs and len(pairs) == len(v):
            return {"pairs": sorted([list(p) for p in pairs])}
        return {"set": sorted(v, key=repr)}
    if isinstance(v, tuple) and len(v) == 2:
        return {"tup": [encode_value(v[0]), encode_value(v[1])]}
    raise TypeError(f"cannot encode value {v!r}")


def decode_value(v):
    if v == "bot":
        return BOTTOM
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, dict):
        if "set" in v:
            return frozenset(v["set"])
        if "pairs" in v:
            return frozenset(tuple(p) for p in v["pairs"])
        if "tup" in v:
            return (decode_value(v["tup"][0]), decode_value(v["tup"][1]))
    if isinstance(v, list) and len(v) == 2:
        return (decode_value(v[0]), decode_value(v[1]))
    raise TypeError(f"cannot decode value {v!r}")
