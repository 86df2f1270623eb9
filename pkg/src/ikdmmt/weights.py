"""Named tensors as a directory of TNSR files plus ``manifest.json``."""

import json
import logging
import os
from typing import Dict, Optional, Tuple

import torch

from .engine import tnsr
from .errors import ConfigurationError, FormatError

LOG = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
FORMAT_VERSION = 1


def file_name(name: str) -> str:
    return name + '.tnsr'


def write_manifest(directory, manifest: dict):
    with open(os.path.join(directory, MANIFEST), 'w', encoding='utf8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write('\n')


def read_manifest(directory) -> dict:
    path = os.path.join(directory, MANIFEST)
    try:
        with open(path, 'r', encoding='utf8') as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError('{}: corrupt manifest: {}'.format(path, e)) from e
    if not isinstance(manifest, dict):
        raise FormatError('{}: manifest is not an object'.format(path))
    if manifest.get('format_version') != FORMAT_VERSION:
        raise FormatError('{}: format version {} is not supported (expected {})'.format(
            path, manifest.get('format_version'), FORMAT_VERSION))
    return manifest


def write_tensors(directory, tensors: Dict[str, torch.Tensor], *,
                  extra: Optional[dict] = None) -> dict:
    """Write every tensor in float64 and a manifest mapping names to files and shapes."""
    os.makedirs(directory, exist_ok=True)
    entries = {}
    for name, tensor in sorted(tensors.items()):
        tnsr.write(os.path.join(directory, file_name(name)), tensor, version=2)
        entries[name] = {'file': file_name(name), 'shape': list(tensor.shape)}
    manifest = dict(extra or {})
    manifest['format_version'] = FORMAT_VERSION
    manifest['tensors'] = entries
    write_manifest(directory, manifest)
    LOG.debug('written %d tensors to %s', len(entries), directory)
    return manifest


def read_tensors(directory) -> Tuple[Dict[str, torch.Tensor], dict]:
    manifest = read_manifest(directory)
    tensors = {}
    for name, entry in manifest.get('tensors', {}).items():
        tensor = tnsr.read(os.path.join(directory, entry['file']))
        if list(tensor.shape) != entry['shape']:
            raise FormatError('{}: tensor {} has shape {}, manifest says {}'.format(
                directory, name, list(tensor.shape), entry['shape']))
        tensors[name] = tensor
    return tensors, manifest


def load_state(module: torch.nn.Module, tensors: Dict[str, torch.Tensor]):
    """Copy tensors into a module, all or nothing.

    Names and shapes must match the module's state exactly; nothing is copied
    when any of them differs.
    """
    state = module.state_dict()
    missing = sorted(set(state) - set(tensors))
    unexpected = sorted(set(tensors) - set(state))
    if missing or unexpected:
        raise ConfigurationError('state mismatch: missing {}, unexpected {}'.format(
            missing, unexpected))
    for name, value in state.items():
        if value.shape != tensors[name].shape:
            raise ConfigurationError('state mismatch: {} has shape {}, stored {}'.format(
                name, tuple(value.shape), tuple(tensors[name].shape)))

    with torch.no_grad():
        for name, value in state.items():
            value.copy_(tensors[name])


def export_module(module: torch.nn.Module, directory, *, extra=None) -> dict:
    return write_tensors(directory, dict(module.state_dict()), extra=extra)


def import_module(module: torch.nn.Module, directory):
    tensors, _ = read_tensors(directory)
    load_state(module, tensors)
    LOG.info('imported %d tensors from %s', len(tensors), directory)
