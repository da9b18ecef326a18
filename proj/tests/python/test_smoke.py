import json

import numpy as np
import pytest

import pcsft


def test_version():
    assert pcsft.__version__ == "0.1.0"


def test_gaussian_roundtrip():
    b = np.diag([1.0, 3.0]).astype(complex)
    ens = pcsft.sample_gaussian_field(pcsft.HermitianOperator(b), 50000, 1)
    assert ens.samples.shape == (2, 50000)
    stats = pcsft.ensemble_stats(ens)
    img = pcsft.to_epistemic(stats.covariance)
    assert np.linalg.norm(img.rho.matrix - b / 4.0) < 0.05
    assert stats.dispersion == stats.covariance.trace()


def test_same_seed_same_samples():
    psi = pcsft.StateVector(np.array([0.6, 0.8j]))
    a = pcsft.sample_pure_field(psi, 1.0, 1000, 7).samples
    b = pcsft.sample_pure_field(psi, 1.0, 1000, 7).samples
    assert np.array_equal(a, b)


def test_eig_and_sqrt():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = x @ x.conj().T
    values, vectors = pcsft.hermitian_eig(b)
    assert np.all(np.diff(values) <= 0)
    assert np.allclose(vectors @ np.diag(values) @ vectors.conj().T, b)
    s = pcsft.psd_sqrt(pcsft.HermitianOperator(b)).matrix
    assert np.allclose(s @ s, b)


def test_errors_map_to_python():
    with pytest.raises(pcsft.ZeroFieldError):
        pcsft.to_epistemic(pcsft.HermitianOperator.zero(2))
    with pytest.raises(pcsft.NotPsdError):
        pcsft.psd_sqrt(pcsft.HermitianOperator(np.diag([1.0, -1.0]).astype(complex)))
    with pytest.raises(ValueError):
        pcsft.HermitianOperator(np.array([[1, 2], [0, 1]], dtype=complex))
    with pytest.raises(pcsft.ConfigError):
        pcsft.run_experiment('{"experiment": "nope"}')


def test_superposition_and_decoherence():
    c = np.array([1, 1]) / np.sqrt(2)
    ens, signals = pcsft.superpose_max_correlated(c, 1.0, 20000, 3)
    cor = pcsft.correlation_matrix(signals)
    assert abs(abs(cor.values[0, 1]) - 1.0) < 1e-12
    noisy = pcsft.decohere(signals, 1.0, 5)
    assert abs(abs(pcsft.correlation_matrix(noisy).values[0, 1]) - np.exp(-1.0)) < 0.03


def test_detection():
    spec = pcsft.FieldSpec.superposition(np.array([1, 1]) / np.sqrt(2))
    basis = pcsft.OrthonormalBasis.standard(2)
    cfg = pcsft.DetectorConfig(basis, threshold=10.0, background_kappa=0.1)
    stats = pcsft.run_threshold_trials(spec, cfg, 500, 1)
    assert stats.partition_holds()
    assert stats.trials == 500
    assert stats.to_json() == pcsft.run_threshold_trials(spec, cfg, 500, 1).to_json()


def test_run_experiment_is_deterministic():
    cfg = json.loads(pcsft.default_config("superposition"))
    cfg["n_samples"] = 100000
    cfg["seeds"] = [1, 2]
    a = json.loads(pcsft.run_experiment(json.dumps(cfg)))
    b = json.loads(pcsft.run_experiment(json.dumps(cfg)))
    a.pop("timings")
    b.pop("timings")
    assert a == b
    assert all(v["pass"] for v in a["verdicts"])
