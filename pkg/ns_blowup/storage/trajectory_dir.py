"""Trajectory directories: per-node field files, series, config and manifest.

    <output>/
        fields/node_0000.bnsf ...
        series.csv
        config.ini
        manifest.csv       file,bytes,hash of every other file
"""

import logging
import os
from pathlib import Path

from ns_blowup.config import CONFIG_FILE, FIELDS_DIR, MANIFEST_FILE, SERIES_FILE
from ns_blowup.storage.field_file import read_field, write_field
from ns_blowup.storage.series_csv import write_series, write_table
from ns_blowup.utils import get_file_hash

logger = logging.getLogger('ns_blowup.storage.trajectory_dir')


def node_filename(index):
    return f"node_{index:04d}.bnsf"


class TrajectoryDirectory:
    """Writer and reader for one output directory."""

    def __init__(self, path):
        self.path = Path(path)

    @property
    def fields_path(self):
        return self.path / FIELDS_DIR

    @property
    def series_path(self):
        return self.path / SERIES_FILE

    @property
    def config_path(self):
        return self.path / CONFIG_FILE

    @property
    def manifest_path(self):
        return self.path / MANIFEST_FILE

    def prepare(self):
        """Create the directory tree and drop field files of an earlier run."""
        self.fields_path.mkdir(parents=True, exist_ok=True)
        for stale in self.fields_path.glob('node_*.bnsf'):
            stale.unlink()

    def write_config(self, config):
        self.config_path.write_text(config.to_ini(), encoding='utf-8')

    def write_states(self, traj):
        """Write one field file per node; returns the number of bytes written."""
        total = 0
        for index, state in enumerate(traj.states):
            total += write_field(self.fields_path / node_filename(index), state)
        logger.debug(f"Wrote {len(traj)} field files to {self.fields_path}")
        return total

    def write_series(self, series):
        write_series(self.series_path, series)

    def write_manifest(self):
        """Hash every file under the directory (except the manifest) into manifest.csv."""
        rows = []
        for root, _, files in os.walk(self.path):
            for name in files:
                full = Path(root) / name
                if full == self.manifest_path:
                    continue
                relative = full.relative_to(self.path).as_posix()
                rows.append([relative, full.stat().st_size, get_file_hash(full)])
        rows.sort(key=lambda row: row[0])
        write_table(self.manifest_path, ['file', 'bytes', 'hash'], rows)
        return rows

    def write(self, traj, series, config):
        """Write a complete trajectory directory.

        Returns:
            list of manifest rows
        """
        self.prepare()
        self.write_config(config)
        self.write_states(traj)
        self.write_series(series)
        rows = self.write_manifest()
        logger.info(f"Trajectory written to {self.path} ({len(rows)} files)")
        return rows

    def read_states(self):
        """Read the node field files back in order."""
        paths = sorted(self.fields_path.glob('node_*.bnsf'))
        return [read_field(p) for p in paths]
