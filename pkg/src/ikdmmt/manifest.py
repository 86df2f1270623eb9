from dataclasses import asdict, dataclass, field
import json
import logging
import os
import time
from typing import Dict, Optional

LOG = logging.getLogger(__name__)

MANIFEST_SUFFIX = '.run.json'


@dataclass
class RunManifest:
    """What a command read, what it wrote and how it was configured."""
    command: str
    config: Optional[dict] = None
    inputs: Dict[str, Optional[str]] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None
    version: str = ''
    start_time: float = field(default_factory=time.time)
    wall_clock: float = 0.0

    def write(self, directory) -> str:
        # pylint: disable=import-outside-toplevel,cyclic-import
        from . import __version__

        self.version = __version__
        self.wall_clock = round(time.time() - self.start_time, 3)
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, self.command + MANIFEST_SUFFIX)
        with open(path, 'w', encoding='utf8') as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True)
            f.write('\n')
        LOG.debug('run manifest written: %s', path)
        return path


def output_directory(path) -> str:
    """Directory that holds the manifest for an output file or directory."""
    if os.path.isdir(path):
        return path
    return os.path.dirname(os.path.abspath(path))
