"""Containers for simulated replicates and trajectories, with their file formats.

CSV files start with one ``#``-prefixed JSON line carrying the parameter
record, followed by a mandatory header row. The binary format is a 16-byte
magic ``STEINPA-SAMPLES1``, a little-endian uint64 header length, a UTF-8
JSON header and then the data as column-major little-endian float64.
"""
import csv
import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"STEINPA-SAMPLES1"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass
class SampleMatrix:
    """``N`` replicates of ``p`` block (or window) sums.

    ``segments`` optionally holds the per-replicate pieces whose sum is the
    first column (shape ``(N, m)``), used by the segment-covariance checks.
    ``lag_cov`` optionally carries field lag covariances measured alongside
    and ``trajectories`` the per-replicate observable paths. None of these
    are serialised.
    """

    values: np.ndarray
    model: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    columns: list = None
    metadata: dict = field(default_factory=dict)
    segments: np.ndarray = None
    lag_cov: object = None
    trajectories: list = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("values must be a non-empty N x p array")
        if not np.all(np.isfinite(v)):
            raise ValueError("values contain non-finite entries")
        self.values = v
        if self.columns is None:
            self.columns = [f"S{j}" for j in range(v.shape[1])]
        if len(self.columns) != v.shape[1]:
            raise ValueError("one column name per coordinate required")

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def column(self, j=0):
        return self.values[:, j]

    def header(self):
        return _jsonable(
            {
                "model": self.model,
                "params": self.params,
                "seed": self.seed,
                "columns": self.columns,
                "metadata": self.metadata,
            }
        )

    def equals(self, other):
        """Bit-level equality of values and provenance."""
        return (
            self.header() == other.header()
            and self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
        )

    # -- CSV -----------------------------------------------------------------
    def to_csv(self, path_or_buf):
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.values:
            w.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)

    @classmethod
    def from_csv(cls, path_or_buf):
        if hasattr(path_or_buf, "read"):
            text = path_or_buf.read()
        else:
            with open(path_or_buf, encoding="utf-8") as fh:
                text = fh.read()
        lines = text.splitlines()
        header = {}
        if lines and lines[0].startswith("#"):
            header = json.loads(lines[0][1:].strip() or "{}")
            lines = lines[1:]
        rows = list(csv.reader(lines))
        if not rows:
            raise ValueError("CSV has no header row")
        columns = rows[0]
        try:
            data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise ValueError(f"non-numeric CSV entry: {exc}") from None
        if data.size == 0:
            raise ValueError("CSV has no data rows")
        return cls(
            values=data.reshape(-1, len(columns)),
            model=header.get("model", "unknown"),
            params=header.get("params", {}),
            seed=header.get("seed", 0),
            columns=columns,
            metadata=header.get("metadata", {}),
        )

    # -- binary --------------------------------------------------------------
    def to_bytes(self):
        head = dict(self.header(), N=self.N, p=self.p)
        hb = json.dumps(head, sort_keys=True).encode("utf-8")
        data = np.asfortranarray(self.values).astype("<f8").tobytes(order="F")
        return MAGIC + struct.pack("<Q", len(hb)) + hb + data

    @classmethod
    def from_bytes(cls, blob):
        if blob[:16] != MAGIC:
            raise ValueError("not a STEINPA-SAMPLES1 file")
        (hlen,) = struct.unpack("<Q", blob[16:24])
        head = json.loads(blob[24 : 24 + hlen].decode("utf-8"))
        N, p = head["N"], head["p"]
        data = np.frombuffer(blob[24 + hlen :], dtype="<f8")
        if data.size != N * p:
            raise ValueError(f"expected {N * p} values, found {data.size}")
        return cls(
            values=data.reshape((N, p), order="F").astype(float),
            model=head["model"],
            params=head["params"],
            seed=head["seed"],
            columns=head["columns"],
            metadata=head["metadata"],
        )

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def read_samples(path):
    """Load a sample file, detecting the binary format by its magic."""
    with open(path, "rb") as fh:
        start = fh.read(16)
    if start == MAGIC:
        return SampleMatrix.load(path)
    return SampleMatrix.from_csv(path)


class Trajectory:
    """Piecewise-constant path: ``values[i]`` holds on ``[times[i], times[i+1])``.

    The last value holds until ``end``.
    """

    def __init__(self, times, values, end):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.end = float(end)
        if self.times.shape != self.values.shape or self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("times and values must be equal-length 1-d arrays")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("event times must be strictly increasing")
        if self.end < self.times[-1]:
            raise ValueError("end precedes the last event")

    def value_at(self, u):
        i = np.searchsorted(self.times, u, side="right") - 1
        if np.any(i < 0):
            raise ValueError("time before trajectory start")
        return self.values[i]

    def integrate(self, a, b):
        """Exact integral over ``[a, b]`` within ``[times[0], end]``."""
        if not self.times[0] <= a <= b <= self.end:
            raise ValueError(f"[{a}, {b}] outside [{self.times[0]}, {self.end}]")
        edges = np.append(self.times, self.end)
        lo = np.clip(edges[:-1], a, b)
        hi = np.clip(edges[1:], a, b)
        return float(np.dot(self.values, hi - lo))

    def to_csv(self, path_or_buf):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "value"])
        for t, v in zip(self.times, self.values):
            w.writerow([repr(float(t)), repr(float(v))])
        w.writerow([repr(self.end), repr(float(self.values[-1]))])
        text = buf.getvalue()
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)

    @classmethod
    def from_csv(cls, path_or_buf):
        if hasattr(path_or_buf, "read"):
            rows = list(csv.reader(path_or_buf.read().splitlines()))
        else:
            with open(path_or_buf, encoding="utf-8") as fh:
                rows = list(csv.reader(fh))
        if rows[0] != ["time", "value"]:
            raise ValueError("expected header 'time,value'")
        arr = np.array([[float(a), float(b)] for a, b in rows[1:]])
        # the final row only marks the end of the observation window
        return cls(arr[:-1, 0], arr[:-1, 1], arr[-1, 0])
