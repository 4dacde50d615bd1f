"""Experiment configuration: a single JSON document validated against a schema."""
import copy
import hashlib
import json

import jsonschema

SCHEMA_VERSION = 1

_OBJ = {"type": "object"}
_NUM = {"type": "number"}
_INT = {"type": "integer"}

_MODEL_PARAMS = {
    "ising": {
        "dim": {"type": "integer", "minimum": 1},
        "box_side": {"type": "integer", "minimum": 2},
        "beta": {"type": "number", "minimum": 0},
        "h": _NUM,
        "J": {"type": "number", "minimum": 0},
        "boundary": {"enum": ["free", "plus", "minus"]},
        "sweeps_burnin": {"type": "integer", "minimum": 0},
        "sweeps_between": {"type": "integer", "minimum": 1},
        "chains": {"type": "integer", "minimum": 1},
        "max_lag": {"type": "integer", "minimum": 3},
    },
    "percolation": {
        "dim": {"type": "integer", "minimum": 2},
        "box_side": {"type": "integer", "minimum": 2},
        "theta": {"type": "number", "minimum": 0, "maximum": 1},
        "max_lag": {"type": "integer", "minimum": 3},
    },
    "voter": {
        "dim": {"type": "integer", "minimum": 1},
        "torus_side": {"type": "integer", "minimum": 2},
        "theta": {"type": "number", "minimum": 0, "maximum": 1},
        "s": {"type": "number", "minimum": 0},
        "method": {"enum": ["graphical", "forward"]},
        "walk_replicates": {"type": "integer", "minimum": 100},
    },
    "contact": {
        "infection_rate": {"type": "number", "minimum": 0},
        "interval_radius": {"type": "integer", "minimum": 1},
        "burnin_time": {"type": "number", "exclusiveMinimum": 0},
        "s": {"type": "number", "minimum": 0},
        "base_sets": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _INT}},
        "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "lag_step": {"type": "number", "exclusiveMinimum": 0},
        "max_lag": {"type": "number", "exclusiveMinimum": 0},
    },
    "synthetic": {
        "B": {"type": "number", "exclusiveMinimum": 0},
        "rho": {"type": "number", "minimum": 0},
        "tau": {"type": "number", "minimum": 0},
        "p": {"type": "integer", "minimum": 1},
    },
}

_GRID_MEANING = {
    "ising": "n",
    "percolation": "n",
    "voter": "t",
    "contact": "t",
    "synthetic": "m",
}


def _schema_for(model):
    props = {
        "schema_version": {"const": SCHEMA_VERSION},
        "model": {"enum": sorted(_MODEL_PARAMS)},
        "params": {"type": "object", "properties": _MODEL_PARAMS[model], "additionalProperties": False},
        "grid": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
        "replicates": {"type": "integer", "minimum": 30},
        "seed": {"type": "integer", "minimum": 0},
        "anchors": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _INT}},
        "starts": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "segments": {"type": "integer", "minimum": 1},
        "noise_sigmas": {"type": "number", "exclusiveMinimum": 0},
        "output": {
            "type": "object",
            "properties": {
                "dir": {"type": "string"},
                "stem": {"type": "string"},
                "plot": {"type": "boolean"},
                "samples": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    }
    return {
        "type": "object",
        "required": ["schema_version", "model", "grid", "replicates"],
        "properties": props,
        "additionalProperties": False,
    }


class ConfigError(ValueError):
    """Schema or consistency violation; ``errors`` lists ``(path, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.errors))


def _locate(text, path):
    """Best-effort line number of the last key in ``path`` within the raw JSON text."""
    if text is None:
        return None
    for key in reversed(path):
        if isinstance(key, str):
            needle = json.dumps(key) + ":"
            idx = text.find(needle)
            if idx < 0:
                needle = json.dumps(key)
                idx = text.find(needle)
            if idx >= 0:
                return text.count("\n", 0, idx) + 1
    return None


def validate(config, text=None):
    """Validate a parsed config, raising :class:`ConfigError` with field paths."""
    if not isinstance(config, dict):
        raise ConfigError([("$", "config must be a JSON object")])
    model = config.get("model")
    if model not in _MODEL_PARAMS:
        raise ConfigError([("$.model", f"must be one of {sorted(_MODEL_PARAMS)}, got {model!r}")])
    validator = jsonschema.Draft202012Validator(_schema_for(model))
    errors = []
    for err in sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path))):
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        line = _locate(text, [k for k in list(err.absolute_path) + [_unknown_key(err)] if k != ""])
        where = f"{path} (line {line})" if line else path
        errors.append((where, err.message))
    if errors:
        raise ConfigError(errors)
    grid = config["grid"]
    if model in ("ising", "percolation", "synthetic") and any(float(g) != int(g) for g in grid):
        errors.append(("$.grid", f"{_GRID_MEANING[model]} values must be integers"))
    if len(set(grid)) != len(grid):
        errors.append(("$.grid", "grid values must be distinct"))
    multi = config.get("anchors") or config.get("starts")
    if multi and len(multi) > 1 and "alpha" not in config:
        errors.append(("$.alpha", "multivariate runs need alpha"))
    if config.get("anchors") and model not in ("ising", "percolation"):
        errors.append(("$.anchors", "anchors apply to lattice models only"))
    if config.get("starts") and model not in ("voter", "contact"):
        errors.append(("$.starts", "starts apply to particle models only"))
    if errors:
        raise ConfigError(errors)
    return config


def _unknown_key(err):
    # additionalProperties errors carry the offending name only in the message
    if err.validator == "additionalProperties":
        msg = err.message
        start = msg.find("'")
        end = msg.find("'", start + 1)
        if start >= 0 and end > start:
            return msg[start + 1 : end]
    return ""


def load(path):
    """Read and validate a config file; JSON syntax errors become :class:`ConfigError`."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([(f"line {exc.lineno}, column {exc.colno}", exc.msg)]) from None
    return validate(config, text)


def apply_overrides(config, quick=False, seed=None, out=None):
    """Return a copy with CLI overrides applied; ``quick`` divides N by 10 (floor 30)."""
    cfg = copy.deepcopy(config)
    if quick:
        cfg["replicates"] = max(30, cfg["replicates"] // 10)
        cfg["quick"] = True
    if seed is not None:
        cfg["seed"] = int(seed)
    if out is not None:
        cfg.setdefault("output", {})["dir"] = str(out)
    return cfg


def config_hash(config):
    """SHA-256 of the canonical JSON form (sorted keys, no whitespace), ignoring output paths."""
    body = {k: v for k, v in config.items() if k != "output"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def grid_meaning(model):
    return _GRID_MEANING[model]
