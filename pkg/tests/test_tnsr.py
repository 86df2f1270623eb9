import json
import struct

import numpy as np
import pytest
import torch

from ikdmmt import weights
from ikdmmt.engine import tnsr
from ikdmmt.errors import ConfigurationError, FormatError


def test_header_layout():
    data = tnsr.encode(torch.zeros(2, 3))
    assert data[:4] == b'TNSR'
    assert struct.unpack_from('<BI', data, 4) == (1, 2)
    assert struct.unpack_from('<2I', data, 9) == (2, 3)
    assert len(data) == 4 + 1 + 4 + 2 * 4 + 6 * 4


def test_float32_values():
    x = torch.tensor([[0.5], [1.25]])
    decoded = tnsr.decode(tnsr.encode(x))
    assert decoded.dtype == torch.float64
    assert decoded.shape == (2, 1)
    np.testing.assert_array_equal(decoded.numpy(), [[0.5], [1.25]])


def test_version2_bit_exact():
    x = torch.randn(3, 4, 5, dtype=torch.float64)
    assert torch.equal(tnsr.decode(tnsr.encode(x, version=2)), x)


def test_scalar(tmp_path):
    path = tmp_path / 'scalar.tnsr'
    tnsr.write(path, torch.tensor(3.0, dtype=torch.float64), version=2)
    value = tnsr.read(path)
    assert value.shape == ()
    assert float(value) == 3.0


@pytest.mark.parametrize('data', [
    b'NOPE' + bytes(20),
    b'TNSR',
    tnsr.encode(torch.zeros(2, 2))[:-1],
    b'TNSR' + struct.pack('<BI', 7, 0),
])
def test_corrupt(data):
    with pytest.raises(FormatError):
        tnsr.decode(data)


def test_unknown_version():
    with pytest.raises(FormatError):
        tnsr.encode(torch.zeros(1), version=3)


def test_named_tensors(tmp_path):
    tensors = {'a.weight': torch.randn(2, 3, dtype=torch.float64),
               'b': torch.randn(4, dtype=torch.float64)}
    manifest = weights.write_tensors(tmp_path, tensors, extra={'kind': 'test'})
    assert manifest['tensors']['a.weight'] == {'file': 'a.weight.tnsr', 'shape': [2, 3]}

    loaded, read_manifest = weights.read_tensors(tmp_path)
    assert read_manifest['kind'] == 'test'
    assert set(loaded) == set(tensors)
    for name, value in tensors.items():
        assert torch.equal(loaded[name], value)


def test_corrupt_manifest(tmp_path):
    (tmp_path / weights.MANIFEST).write_text('{not json')
    with pytest.raises(FormatError):
        weights.read_tensors(tmp_path)


def test_manifest_version(tmp_path):
    weights.write_tensors(tmp_path, {'a': torch.zeros(1, dtype=torch.float64)})
    manifest = json.loads((tmp_path / weights.MANIFEST).read_text())
    manifest['format_version'] = 99
    (tmp_path / weights.MANIFEST).write_text(json.dumps(manifest))
    with pytest.raises(FormatError):
        weights.read_tensors(tmp_path)


def test_manifest_shape_disagrees(tmp_path):
    weights.write_tensors(tmp_path, {'a': torch.zeros(2, dtype=torch.float64)})
    manifest = json.loads((tmp_path / weights.MANIFEST).read_text())
    manifest['tensors']['a']['shape'] = [3]
    (tmp_path / weights.MANIFEST).write_text(json.dumps(manifest))
    with pytest.raises(FormatError):
        weights.read_tensors(tmp_path)


def test_module_import_all_or_nothing(tmp_path):
    source = torch.nn.Linear(3, 2).double()
    weights.export_module(source, tmp_path / 'linear')

    target = torch.nn.Linear(3, 2).double()
    weights.import_module(target, tmp_path / 'linear')
    assert torch.equal(target.weight, source.weight)
    assert torch.equal(target.bias, source.bias)

    wrong = torch.nn.Linear(4, 2).double()
    before = {k: v.clone() for k, v in wrong.state_dict().items()}
    with pytest.raises(ConfigurationError):
        weights.import_module(wrong, tmp_path / 'linear')
    for name, value in wrong.state_dict().items():
        assert torch.equal(value, before[name])
