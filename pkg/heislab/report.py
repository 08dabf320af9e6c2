"""
CSV reports and JSON run manifests.

Every subcommand writes <outdir>/<command>.csv and
<outdir>/<command>.manifest.json. The manifest's result_digest is the
sha256 of the canonical JSON of the report rows, so it ignores wall-clock
time and paths.
"""
import json
import os
import sys
from dataclasses import dataclass, field, asdict
from typing import Optional

import pandas as pd

import logging

from .util import canonical_json, digest, to_jsonable
from .version import version

logger = logging.getLogger(__name__)

MANIFEST_SCHEMA = 1


def result_digest(rows):
    return digest(rows)


@dataclass
class RunManifest:
    command: str
    argv: list
    result_digest: str
    passed: bool
    model: Optional[dict] = None
    seeds: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    version: str = version
    wall_clock: float = 0.0
    warnings: list = field(default_factory=list)
    schema: int = MANIFEST_SCHEMA

    def to_dict(self):
        return json.loads(canonical_json(asdict(self)))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("schema", MANIFEST_SCHEMA) != MANIFEST_SCHEMA:
            raise ValueError("unsupported manifest schema %r" % d.get("schema"))
        return cls(**d)

    def dump(self, path):
        with open(path, "wt") as f:
            json.dump(self.to_dict(), f, sort_keys=True, indent=4)

    @classmethod
    def load(cls, path):
        with open(path, "rt") as f:
            return cls.from_dict(json.load(f))


def report_paths(outdir, command):
    return (os.path.join(outdir, "%s.csv" % command),
            os.path.join(outdir, "%s.manifest.json" % command))


def write_report(outdir, command, rows, manifest: RunManifest):
    csv_path, manifest_path = report_paths(outdir, command)
    pd.DataFrame(rows).to_csv(csv_path, index=False)
    manifest.dump(manifest_path)
    logger.debug("wrote %s and %s", csv_path, manifest_path)
    return csv_path, manifest_path


def print_rows(rows, fmt, stream=None):
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(json.dumps(rows, sort_keys=True, indent=4, default=to_jsonable) + "\n")
    elif fmt == "csv":
        pd.DataFrame(rows).to_csv(stream, index=False)
    else:
        raise ValueError("unknown format %r" % fmt)
