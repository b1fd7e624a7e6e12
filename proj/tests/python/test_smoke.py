import json

import numpy as np
import pytest

import randcheck as rc


def test_version():
    assert rc.__version__ == "0.1.0"


def test_splitmix_reference():
    assert rc.splitmix64_mix(0) == 0xE220A8397B1DCDAF


def test_streams_are_pure():
    s = rc.derive_stream(7, [("datapoint", 3)])
    assert s == rc.derive_stream(7, [("datapoint", 3)])
    assert rc.uniforms(s, 5) == rc.uniforms(s, 5)
    assert rc.child(s, "restart", 0) != rc.child(s, "restart", 1)


def test_grid_counts():
    assert rc.grid_count(2, 3, 1.0, "l2") == 5
    assert rc.grid_count(3, 9, 0.5, "linf") == 9**3
    coords = rc.grid_coords(2, 5, 0.5, "l2")
    assert np.all(np.linalg.norm(coords, axis=1) <= 0.5 + 1e-12)


def test_basis_orthonormal():
    q = rc.make_basis(rc.derive_stream(1), 4, 20)
    assert q.shape == (4, 20)
    assert np.allclose(q @ q.T, np.eye(4), atol=1e-12)


def test_kwta():
    out = rc.kwta_activate(np.array([2.0, 7.0, 7.0, 7.0]), 0.5)
    assert list(out) == [0.0, 7.0, 7.0, 0.0]


def test_train_then_attack():
    data = rc.gen_dataset("blobs", d=6, classes=2, n_per_class=60, noise=0.05, spread=1.0, stream=3)
    net, history = rc.train([6, 16, 2], "relu", data=data, epochs=15, stream=4)
    assert len(history) == 15
    assert rc.accuracy(net, data) >= 0.95
    x = np.asarray(data.points[0])
    y = data.labels[0]
    out = rc.pgd_attack(net, x, y, epsilon=2.0, steps=20, stream=5)
    assert out["found"]
    assert net.predict(out["adversarial_point"]) != y
    assert out["distance"] <= 2.0 + 1e-9


def test_network_save_load(tmp_path):
    net = rc.network_from_weights([np.eye(3)], [np.zeros(3)])
    path = tmp_path / "m.bin"
    net.save(str(path), "meta")
    loaded, meta = rc.load_network(str(path))
    assert loaded == net
    assert meta == "meta"


def test_nag_curve_law():
    acc, ci = rc.nag_curve([(0, 0.99)], [1, 100])
    assert acc[1] == pytest.approx(0.99**100, abs=1e-15)


def test_sweep_shapes():
    data = rc.gen_dataset("blobs", d=6, classes=3, n_per_class=10, stream=2, split="test")
    net, _ = rc.train([6, 12, 3], "kwta", 0.25, data=data, epochs=3, stream=1)
    cells, summary, verdict, csv = rc.sweep(net, data, [0, 5, 10], dims_bins=[(1, 21), (2, 11)])
    assert len(cells) == 3 * 2 * 5
    assert set(summary) == {"grid", "random", "pgd1", "pgd10", "pgd20"}
    assert csv.splitlines()[0] == "Dims,Bins,Grid-sweep,Rand-sample,PGD1,PGD10,PGD20"
    assert verdict in {"gradients unhindered", "suspected obfuscated gradients", "inconclusive"}


def test_run_command_exit_codes(tmp_path):
    code, _, err = rc.run_command("train", "", ["data.train_csv=/nonexistent.csv"])
    assert code == 2 and "nonexistent" in err
    cfg = "seed = 1\n[data]\nd = 4\nclasses = 2\nn_per_class = 20\nn_test_per_class = 5\n[model]\nhidden = [4]\n"
    code, log, err = rc.run_command("gen-data", cfg, [f"out={tmp_path}"])
    assert code == 0, err
    resolved = json.loads((tmp_path / "config.resolved.json").read_text())
    assert resolved["seed"] == 1


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        rc.parse_seed("not-a-seed")
