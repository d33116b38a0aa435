"""Report envelopes and their published JSON schemas."""
import datetime as _dt
import json
from importlib import resources

SCHEMA_VERSION = "1.0.0"
REPORT_KINDS = ("check", "solve", "verify", "git-classify", "git-minimize", "config")


def report_schema_version():
    return SCHEMA_VERSION


def envelope(kind, body, timestamp=True):
    out = {"schema": SCHEMA_VERSION, "kind": kind}
    if timestamp:
        out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    out.update(body)
    return out


def dumps(obj):
    """Deterministic JSON: sorted keys, shortest round-trip floats, no NaN."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_schema(kind):
    if kind not in REPORT_KINDS:
        raise ValueError(f"no schema for {kind!r}")
    text = resources.files("gkw").joinpath("schemas", f"{kind}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
