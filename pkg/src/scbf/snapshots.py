"""Stable on-disk formats: field snapshots, ledger CSV, run manifests.

Snapshot layout (version 1): one UTF-8 JSON header line terminated by a
newline, then the raw little-endian complex128 coefficient bytes in C
order over (component, axis_0, ..., axis_{dim-1}) with numpy fftfreq mode
ordering along every axis.  The header records {magic, version, dim,
grid_n, box_len, n_components, dtype, time, step}; time and step are
optional trajectory metadata.
"""

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .domain import ConfigurationError, DomainSpec
from .fields import SpectralField
from .solver import LEDGER_COLUMNS, EnergyLedger

SNAPSHOT_MAGIC = "scbf-field"
SNAPSHOT_VERSION = 1
REPORT_SCHEMA_VERSION = 1


def write_snapshot(path, field: SpectralField, time: Optional[float] = None,
                   step: Optional[int] = None) -> None:
    dom = field.domain
    header = {
        "magic": SNAPSHOT_MAGIC,
        "version": SNAPSHOT_VERSION,
        "dim": dom.dim,
        "grid_n": dom.grid_n,
        "box_len": dom.box_len,
        "n_components": dom.dim,
        "dtype": "complex128-le",
    }
    if time is not None:
        header["time"] = time
    if step is not None:
        header["step"] = step
    payload = np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def read_snapshot(path, domain: Optional[DomainSpec] = None):
    """Return (SpectralField, header).  When a domain is supplied the header
    must match it; otherwise the domain is rebuilt from the header."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"not a field snapshot: {path}") from exc
    if header.get("magic") != SNAPSHOT_MAGIC:
        raise ConfigurationError(f"bad snapshot magic in {path}")
    if header.get("version") != SNAPSHOT_VERSION:
        raise ConfigurationError(
            f"unsupported snapshot version {header.get('version')} in {path}"
        )
    if domain is None:
        domain = DomainSpec(dim=header["dim"], grid_n=header["grid_n"],
                            box_len=header["box_len"])
    else:
        for key, val in (("dim", domain.dim), ("grid_n", domain.grid_n),
                         ("box_len", domain.box_len)):
            if header[key] != val:
                raise ConfigurationError(
                    f"snapshot {key}={header[key]} does not match domain {val}"
                )
    coeffs = np.frombuffer(payload, dtype="<c16").reshape(domain.field_shape)
    return SpectralField(domain, coeffs.astype(np.complex128)), header


def write_ledger_csv(path, ledger: EnergyLedger) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEDGER_COLUMNS)
        for row in ledger.rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def read_ledger_csv(path) -> EnergyLedger:
    ledger = EnergyLedger()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != LEDGER_COLUMNS:
            raise ConfigurationError(f"unexpected ledger columns in {path}")
        for raw in reader:
            row = {"step": int(raw[0])}
            for name, val in zip(LEDGER_COLUMNS[1:], raw[1:]):
                row[name] = float(val)
            ledger.append(row)
    return ledger


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def content_hash(data) -> str:
    """Hex digest identifying a config (or any JSON-serializable payload)."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def write_manifest(path, config_data: dict, extra: Optional[dict] = None) -> None:
    manifest = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config_data,
        "config_hash": content_hash(config_data),
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def write_report(path, config_data: dict, checks: list) -> bool:
    """Write the machine-readable report; returns overall pass/fail."""
    passed = all(c.get("passed", False) for c in checks)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config_hash": content_hash(config_data),
        "passed": passed,
        "checks": checks,
    }
    Path(path).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return passed


def write_table_csv(path, columns, rows) -> None:
    """Plot-ready CSV with deterministic float formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    Path(path).write_text(buf.getvalue())
