"""``MeasureSeries`` container and its CSV round trip."""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import ContractError, check_grid

MEASURE_IDS = ("OTOC", "LE", "GE", "OE")
FLOAT_FMT = "{:.15g}"


def format_float(x):
    return FLOAT_FMT.format(float(x))


@dataclass
class MeasureSeries:
    """Ordered ``(axis, value)`` pairs plus everything needed to regenerate them."""

    measure_id: str
    axis_name: str
    axis: np.ndarray
    values: np.ndarray
    fixed_params: dict = field(default_factory=dict)
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.measure_id not in MEASURE_IDS:
            raise ContractError(f"measure_id must be one of {MEASURE_IDS}, got {self.measure_id!r}")
        self.axis = check_grid(self.axis, self.axis_name)
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.shape != self.axis.shape:
            raise ContractError(f"{self.axis.size} axis points but {self.values.size} values")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("series values must be finite")

    def __len__(self):
        return self.axis.size

    def metadata(self):
        meta = {"measure": self.measure_id, "axis": self.axis_name, "seed": self.seed}
        meta.update(self.fixed_params)
        meta.update(self.extra)
        return meta


def _meta_lines(meta):
    for key, val in meta.items():
        yield f"# {key} = {json.dumps(val, default=_jsonable)}"


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def write_table(stream, columns, rows, meta=None):
    """Write a '#' metadata block, a header line, then rows with 15 significant digits."""
    for line in _meta_lines(meta or {}):
        stream.write(line + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_table(stream):
    """Inverse of :func:`write_table`: returns ``(meta, columns, rows as float arrays)``."""
    meta, body = {}, []
    for line in stream:
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            try:
                meta[key.strip()] = json.loads(val)
            except json.JSONDecodeError:
                meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    try:
        columns = next(reader)
    except StopIteration:
        raise ContractError("CSV input has no header line") from None
    try:
        rows = [[float(x) for x in row] for row in reader]
    except ValueError as exc:
        raise ContractError(f"malformed CSV row: {exc}") from None
    data = np.array(rows, dtype=float).reshape(-1, len(columns))
    return meta, columns, data


def series_to_csv(series, stream=None):
    own = stream is None
    stream = io.StringIO() if own else stream
    write_table(stream, [series.axis_name, "value"], zip(series.axis, series.values), series.metadata())
    return stream.getvalue() if own else None


def series_from_csv(stream):
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    meta, columns, data = read_table(stream)
    if len(columns) != 2:
        raise ContractError(f"series CSV needs exactly two columns, got {columns}")
    meta = dict(meta)
    measure = meta.pop("measure", "OTOC")
    meta.pop("axis", None)
    seed = meta.pop("seed", None)
    return MeasureSeries(
        measure_id=measure,
        axis_name=columns[0],
        axis=data[:, 0],
        values=data[:, 1],
        fixed_params=meta,
        seed=seed,
    )
