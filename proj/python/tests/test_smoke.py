import json

import numpy as np
import pytest

import qfno


def unitary_dft(n):
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def rand_state(rng, rows, cols):
    a = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return a / np.linalg.norm(a)


def test_dft_matrix_matches_numpy():
    for n in (2, 8, 32):
        assert np.allclose(qfno.dft_matrix(n) / np.sqrt(n), unitary_dft(n), atol=1e-12)


def test_uqft_realises_unitary_dft():
    for n in (2, 4, 16, 64):
        u = qfno.uqft_matrix(n)
        perm = qfno.bit_reversal_permutation(n)
        realised = np.empty_like(u)
        realised[:, perm] = u
        assert np.abs(realised - unitary_dft(n)).max() < 1e-10
        assert np.allclose(qfno.uqft_matrix(n, inverse=True) @ u, np.eye(n), atol=1e-10)


def test_unary_weight_is_orthogonal():
    rng = np.random.default_rng(1)
    n = 8
    theta = rng.uniform(-np.pi, np.pi, qfno.slot_count("butterfly", n)).tolist()
    w = qfno.unary_weight("butterfly", n, theta)
    assert w.shape == (n, n)
    assert np.allclose(w.T @ w, np.eye(n), atol=1e-12)


def test_pyramid_hw2_is_compound():
    rng = np.random.default_rng(2)
    n = 5
    theta = rng.uniform(-np.pi, np.pi, qfno.slot_count("pyramid", n)).tolist()
    w = qfno.param_circuit_matrix("pyramid", n, theta, 1)
    hw2 = qfno.param_circuit_matrix("pyramid", n, theta, 2)
    assert np.abs(hw2 - qfno.compound_order2(w.real)).max() < 1e-12


def test_classical_layer_against_numpy():
    rng = np.random.default_rng(3)
    n_c, n_s, k = 4, 16, 3
    a = rand_state(rng, n_c, n_s)
    ws = [rng.standard_normal((n_c, n_c)) for _ in range(k)]
    f = unitary_dft(n_s)
    for policy in ("keep", "crop"):
        hat = a @ f
        if policy == "crop":
            hat[:, k:] = 0
        for m in range(k):
            hat[:, m] = ws[m] @ hat[:, m]
        expected = hat @ f.conj().T
        got = qfno.classical_fourier_layer(a, ws, k, policy)
        assert np.abs(got - expected).max() < 1e-12


def test_quantum_variants_agree_with_classical_keep():
    rng = np.random.default_rng(4)
    n_c, n_s, k = 4, 8, 2
    a = rand_state(rng, n_c, n_s)
    slots = qfno.slot_count("butterfly", n_c)
    thetas = [rng.uniform(-np.pi, np.pi, slots).tolist() for _ in range(k)]
    ws = [qfno.unary_weight("butterfly", n_c, th) for th in thetas]
    seq = qfno.apply_layer(a, [], thetas, k, "sequential")
    par = qfno.apply_layer(a, [], thetas, k, "parallel", aggregation="linear")
    assert np.abs(seq - qfno.classical_fourier_layer(a, ws, k, "keep")).max() < 1e-12
    assert np.abs(seq - par).max() < 1e-12
    assert np.isclose(np.linalg.norm(seq), 1.0)


def test_complexity_report():
    rows = {v: qfno.complexity_report(8, 64, 4, v) for v in qfno.VARIANTS}
    assert all(r["qubits"] == 72 for r in rows.values())
    assert rows["parallel"]["circuit_count"] == 4
    assert rows["composite"]["param_count"] == 20
    assert rows["classical"]["param_count"] == 4 * 8 * 8


def test_grf_and_burgers():
    a = qfno.grf_sample(64, seed=7, index=3)
    b = qfno.grf_sample(64, seed=7, index=3)
    assert a.shape == (64,)
    assert np.array_equal(a, b)
    assert abs(a.mean()) < 1e-10
    u = qfno.burgers_solve(a, nu=0.1, t_end=0.1, fine_resolution=512)
    assert abs(u.mean() - a.mean()) < 1e-10
    assert np.linalg.norm(u) < np.linalg.norm(a)


def test_dataset_roundtrip(tmp_path):
    d = qfno.make_dataset(3, resolution=32, seed=1, t_end=0.05, fine_resolution=256)
    assert d["inputs"].shape == (3, 32)
    assert np.allclose(d["grid"], np.arange(32) / 32)
    path = tmp_path / "d.bin"
    qfno.write_dataset(d["inputs"], d["targets"], str(path))
    back = qfno.read_dataset(str(path))
    assert np.array_equal(back["inputs"], d["inputs"])
    assert np.array_equal(back["targets"], d["targets"])


def test_model_train_save_load(tmp_path):
    d = qfno.make_dataset(12, resolution=32, seed=2, t_end=0.05, fine_resolution=256)
    x, y = d["inputs"], d["targets"]
    cfg = {"variant": "sequential", "n_c": 4, "n_s": 32, "k": 2, "t_layers": 1, "epochs": 3, "batch_size": 4}
    m = qfno.Model(cfg)
    assert m.config["variant"] == "sequential"
    pred, imag = m.forward(x[0])
    assert pred.shape == (32,)
    assert imag >= 0
    before = m.evaluate(x[8:], y[8:])
    report = m.train(x[:8], y[:8], x[8:], y[8:], timing=False)
    assert len(report["epochs"]) == 3
    assert np.isclose(report["final_test_rel_err"], m.evaluate(x[8:], y[8:]), atol=1e-12)
    assert report["final_test_rel_err"] != before

    path = tmp_path / "model.json"
    m.save(path)
    again = qfno.Model.load(path)
    assert again.params == m.params
    assert np.array_equal(again.forward(x[0])[0], m.forward(x[0])[0])
    assert qfno.Model.from_json(m.to_json()).params == m.params


def test_gradient_matches_finite_difference():
    d = qfno.make_dataset(2, resolution=16, seed=3, t_end=0.05, fine_resolution=256)
    m = qfno.Model({"variant": "composite", "n_c": 2, "n_s": 16, "k": 2, "t_layers": 1})
    loss, g = m.grad(d["inputs"], d["targets"])
    x0 = m.params
    h = 1e-6
    for i in range(0, len(x0), max(1, len(x0) // 6)):
        xp, xm = list(x0), list(x0)
        xp[i] += h
        xm[i] -= h
        m.params = xp
        lp, _ = m.grad(d["inputs"], d["targets"])
        m.params = xm
        lm, _ = m.grad(d["inputs"], d["targets"])
        assert abs((lp - lm) / (2 * h) - g[i]) <= 1e-5 * max(1.0, abs(g[i]))
    m.params = x0
    assert m.grad(d["inputs"], d["targets"])[0] == loss


def test_errors_are_raised():
    with pytest.raises(qfno.QfnoError, match="power of two"):
        qfno.grf_sample(48)
    with pytest.raises(qfno.QfnoError):
        qfno.Model({"variant": "nope"})
    with pytest.raises(qfno.QfnoError):
        qfno.verify("nope")


def test_verify_suite():
    report = qfno.verify("uqft")
    assert report["pass"] is True
    names = [p["name"] for p in report["properties"]]
    assert any("F_n" in n for n in names)
    json.dumps(report)
