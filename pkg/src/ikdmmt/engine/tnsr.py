"""Binary tensor files.

Layout: magic ``TNSR``, u8 version, u32 rank, rank x u32 dims, then the
row-major little-endian payload. Version 1 stores float32 (images, features),
version 2 stores float64 (checkpoints, where round trips must be bit-exact).
"""

import logging
import struct

import numpy as np
import torch

from ..errors import FormatError

LOG = logging.getLogger(__name__)

MAGIC = b'TNSR'
PAYLOAD_DTYPES = {
    1: np.dtype('<f4'),
    2: np.dtype('<f8'),
}


def encode(tensor, version=1) -> bytes:
    if version not in PAYLOAD_DTYPES:
        raise FormatError('unknown TNSR version {}'.format(version))
    if isinstance(tensor, torch.Tensor):
        tensor = tensor.detach().cpu().numpy()
    # keeps rank 0
    array = np.asarray(tensor, dtype=PAYLOAD_DTYPES[version]).copy(order='C')
    header = MAGIC + struct.pack('<BI', version, array.ndim)
    header += struct.pack('<{}I'.format(array.ndim), *array.shape)
    return header + array.tobytes()


def decode(data: bytes, *, source='<bytes>') -> torch.Tensor:
    if data[:4] != MAGIC:
        raise FormatError('{}: missing TNSR magic'.format(source))
    if len(data) < 9:
        raise FormatError('{}: truncated header'.format(source))
    version, rank = struct.unpack_from('<BI', data, 4)
    if version not in PAYLOAD_DTYPES:
        raise FormatError('{}: unsupported TNSR version {}'.format(source, version))
    offset = 9 + 4 * rank
    if len(data) < offset:
        raise FormatError('{}: truncated dims'.format(source))
    shape = struct.unpack_from('<{}I'.format(rank), data, 9)
    dtype = PAYLOAD_DTYPES[version]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(data) - offset != expected:
        raise FormatError('{}: payload has {} bytes, expected {} for shape {}'.format(
            source, len(data) - offset, expected, shape))
    array = np.frombuffer(data, dtype=dtype, offset=offset).reshape(shape)
    return torch.from_numpy(array.astype(np.float64))


def write(path, tensor, version=1):
    with open(path, 'wb') as f:
        f.write(encode(tensor, version=version))
    LOG.debug('written %s', path)


def read(path) -> torch.Tensor:
    with open(path, 'rb') as f:
        return decode(f.read(), source=str(path))
