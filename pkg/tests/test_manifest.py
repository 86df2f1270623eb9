import json

import pytest

import ikdmmt
from ikdmmt import manifest


def test_wall_clock_spans_the_run(tmp_path, monkeypatch):
    now = [1000.0]
    monkeypatch.setattr(manifest.time, 'time', lambda: now[0])
    run = manifest.RunManifest('translate', seed=3)
    now[0] += 12.5
    run.outputs = {'hypotheses': 'hyp.txt'}
    path = run.write(str(tmp_path))

    with open(path, encoding='utf8') as f:
        data = json.load(f)
    assert data['start_time'] == 1000.0
    assert data['wall_clock'] == pytest.approx(12.5)
    assert data['version'] == ikdmmt.__version__
    assert data['outputs'] == {'hypotheses': 'hyp.txt'}
    assert path.endswith('translate.run.json')


def test_output_directory(tmp_path):
    assert manifest.output_directory(str(tmp_path)) == str(tmp_path)
    assert manifest.output_directory(str(tmp_path / 'hyp.txt')) == str(tmp_path)
