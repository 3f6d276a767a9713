"""
Reading configurations from, and writing results to, the local file system.

Every CSV written by the command-line interface is accompanied by a JSON manifest
(``<name>.manifest.json``) recording the configuration hash, the seeds and the versions
of the code and of its numerical dependencies.
"""

import csv
import hashlib
import json
import logging
import platform
from pathlib import Path

import numpy
import scipy

from . import ConfigurationError
from .versioning import code_version

logger = logging.getLogger(__name__)


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of a configuration mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def manifest_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".manifest.json")


class FileSystemDataStore(object):
    """
    A class for interacting with the local file system
    """

    def __init__(self, base_folder=".", **kwargs):
        self.base_folder = Path(base_folder)

    def _resolve(self, path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_folder / path

    def load_data(self, local_path):
        """Load a JSON document (e.g. a run configuration)."""
        path = self._resolve(local_path)
        try:
            with open(path) as fp:
                return json.load(fp)
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"{path} is not valid JSON: {err}") from err
        except OSError as err:
            raise ConfigurationError(f"Cannot read {path}: {err.strerror}") from err

    def write_csv(self, local_path, rows):
        """Write rows (the first being the header) as UTF-8 CSV with '\\n' line endings."""
        path = self._resolve(local_path)
        with open(path, "w", newline="", encoding="utf-8") as fp:
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerows(rows)
        logger.info("Wrote %d rows to %s", len(rows) - 1, path)
        return path

    def write_manifest(self, csv_path, config: dict, seeds=()):
        """Write the JSON sidecar of a CSV result."""
        path = manifest_path(self._resolve(csv_path))
        manifest = {
            "output": Path(csv_path).name,
            "config_hash": config_hash(config),
            "config": config,
            "seeds": [int(s) for s in seeds],
            "versions": {
                "comb_transversal": code_version(),
                "numpy": numpy.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
        }
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(manifest, fp, indent=2, sort_keys=True, default=str)
            fp.write("\n")
        logger.info("Wrote manifest %s", path)
        return path
