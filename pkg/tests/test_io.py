import json

import numpy as np
import pytest

from uqmlab import cpmap, io, qstate
from uqmlab.errors import NotHermitianError
from uqmlab.experiment import DiscreteExperiment, random_experiment


def test_state_roundtrip_is_bitwise(tmp_path, rng):
    w = qstate.random_density(3, rng=rng)
    path = tmp_path / "w.json"
    io.save_state(w, path)
    assert np.array_equal(io.load_state(path), w)
    obj = json.loads(path.read_text())
    assert obj["dim"] == 3 and len(obj["matrix"][0][0]) == 2


def test_state_validation(tmp_path):
    path = tmp_path / "bad.json"
    io.write_json({"dim": 2, "matrix": io.matrix_to_json([[1, 1], [0, 0]])}, path)
    with pytest.raises(NotHermitianError):
        io.load_state(path)
    with pytest.raises(io.FormatError):
        io.state_from_json({"dim": 3, "matrix": io.matrix_to_json(np.eye(2) / 2)})
    with pytest.raises(io.FormatError):
        io.state_from_json({"matrix": [[1]]})
    with pytest.raises(io.FormatError):
        io.matrix_from_json([[1, 2], [3, 4]])
    path.write_text("{not json")
    with pytest.raises(io.FormatError):
        io.load_state(path)


def test_map_roundtrip(tmp_path, rng):
    K = cpmap.random_kraus(2, 3, rng)
    io.save_map(K, tmp_path / "k.json")
    kind, K2 = io.load_map(tmp_path / "k.json")
    assert kind == "kraus" and np.array_equal(K, K2)
    C = cpmap.transpose_choi(2)
    io.save_map(C, tmp_path / "c.json", kind="choi")
    kind, C2 = io.load_map(tmp_path / "c.json")
    assert kind == "choi" and np.array_equal(C, C2)


@pytest.mark.parametrize(
    "obj",
    [{"kraus": []}, {"dim": 2, "kraus": []}, {"dim": 0, "choi": []},
     {"dim": 2, "choi": io.matrix_to_json(np.eye(3))},
     {"dim": 3, "kraus": [io.matrix_to_json(np.eye(2))]}, {"dim": 2}],
)
def test_map_format_errors(obj):
    with pytest.raises(io.FormatError):
        io.map_from_json(obj)


def test_experiment_roundtrip(tmp_path, rng):
    exp = random_experiment(2, 3, rng)
    mixed = DiscreteExperiment(["a", "b", "c"], [exp.kraus[0], exp.chois[1], exp.kraus[2]])
    io.save_experiment(mixed, tmp_path / "e.json")
    back = io.load_experiment(tmp_path / "e.json")
    assert back.labels == ["a", "b", "c"] or list(back.labels) == ["a", "b", "c"]
    assert np.allclose(back.chois, mixed.chois, atol=1e-15)
    w = qstate.random_density(2, rng=rng)
    assert np.allclose(back.probabilities(w), exp.probabilities(w))
    with pytest.raises(io.FormatError):
        io.experiment_from_json({"outcomes": ["a"]})


def test_samples_csv_roundtrip(tmp_path, rng):
    pts = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    dens = rng.random(5)
    io.write_samples_csv(tmp_path / "s.csv", pts, dens, factor_dims=(2, 2), start_index=10)
    idx, pts2, dens2 = io.read_samples_csv(tmp_path / "s.csv")
    assert list(idx) == list(range(10, 15))
    assert np.array_equal(pts, pts2) and np.array_equal(dens, dens2)
    header = (tmp_path / "s.csv").read_text().splitlines()[0].split(",")
    assert header[:3] == ["trial_index", "f0_re0", "f0_im0"] and header[-1] == "density"
    io.write_samples_csv(tmp_path / "e.csv", np.zeros((0, 3)), [])
    idx, p, d = io.read_samples_csv(tmp_path / "e.csv")
    assert p.shape == (0, 3) and len(idx) == 0
