"""Machine-first report emission with reproducible payloads.

Report payloads are canonical JSON (sorted keys, round-trip float repr) and
contain only values derivable from (pools, config, master seed); wall-clock
metadata lives in a separate sidecar file excluded from the payload hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from datetime import datetime, timezone
from pathlib import Path

from probmut.pools import InstancePool


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def pool_fingerprint(path, pool: InstancePool) -> dict:
    raw = Path(path).read_bytes()
    return {"path": Path(path).name, "rows": len(pool), "sha256": sha256_hex(raw)}


def write_report(out_dir, payload: dict, started: float, extra_meta: dict | None = None) -> Path:
    """Write report.json (deterministic payload) and run_meta.json (timing,
    timestamp, payload hash). Returns the report path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text = canonical_json(payload)
    report_path = out_dir / "report.json"
    report_path.write_text(text, encoding="utf-8")
    meta = {
        "written_at": datetime.now(timezone.utc).isoformat(),
        "elapsed_s": time.monotonic() - started,
        "payload_sha256": sha256_hex(text.encode("utf-8")),
    }
    if extra_meta:
        meta.update(extra_meta)
    (out_dir / "run_meta.json").write_text(canonical_json(meta), encoding="utf-8")
    return report_path


def write_density_csv(path, xs, density) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "density"])
        for x, d in zip(xs, density):
            writer.writerow([repr(float(x)), repr(float(d))])


def write_rows_csv(path, rows: list[dict]) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
