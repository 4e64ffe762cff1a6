import numpy as np
import pytest

from nomadic.channel import (
    ChannelEnsemble,
    CovarianceQ,
    SystemConfig,
    db_to_linear,
    linear_to_db,
    load_ensemble,
    make_ensemble,
    sample_channel,
    sample_stream,
    save_ensemble,
)
from nomadic.errors import BadRange, SpecError


def test_config_validation():
    cfg = SystemConfig.from_db(3, 2, 10.0, 2.0)
    assert cfg.capacities == (2.0, 2.0, 2.0)
    assert cfg.P == pytest.approx(10.0)
    assert cfg.P_dB == pytest.approx(10.0)
    assert cfg.symmetric and cfg.rows == 3
    with pytest.raises(SpecError):
        SystemConfig(0, 2, 1.0, 1.0)
    with pytest.raises(SpecError):
        SystemConfig(2, 2, -1.0, 1.0)
    with pytest.raises(SpecError):
        SystemConfig(2, 2, 1.0, (1.0, -1.0))
    with pytest.raises(SpecError):
        SystemConfig(2, 2, 1.0, 1.0, agent_antennas=(1, 0))
    assert SystemConfig(2, 2, 1.0, 1.0, agent_antennas=(2, 3)).rows == 5


def test_db_round_trip():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert linear_to_db(db_to_linear(7.3)) == pytest.approx(7.3)


def test_covariance():
    Q = CovarianceQ.isotropic(4, 8.0)
    assert Q.diag == (2.0, 2.0, 2.0, 2.0) and Q.total == 8.0
    Q.check(8.0)
    with pytest.raises(BadRange):
        Q.check(7.0)
    with pytest.raises(BadRange):
        CovarianceQ((1.0, -0.5))


def test_sample_channel_determinism():
    cfg = SystemConfig(2, 3, 1.0, 1.0)
    a = sample_channel(cfg, sample_stream(5, 0))
    b = sample_channel(cfg, sample_stream(5, 0))
    assert np.array_equal(a.array, b.array)
    assert a.shape == (2, 3)


def test_sample_statistics():
    cfg = SystemConfig(10, 10, 1.0, 1.0)
    ens = make_ensemble(cfg, 1000, seed=3)
    x = ens.H.ravel()
    assert abs(np.mean(x)) < 0.02
    assert 0.97 <= np.var(x) <= 1.03
    assert np.var(x.real) == pytest.approx(0.5, rel=0.03)
    assert np.var(x.imag) == pytest.approx(0.5, rel=0.03)


def test_ensemble_worker_independence():
    cfg = SystemConfig(2, 2, 1.0, 1.0)
    a = make_ensemble(cfg, 100, seed=9, workers=1)
    b = make_ensemble(cfg, 100, seed=9, workers=8)
    assert a == b
    assert len(make_ensemble(cfg, 1, seed=9)) == 1
    # sample k does not depend on the ensemble size
    c = make_ensemble(cfg, 10, seed=9)
    assert np.array_equal(c.H, a.H[:10])
    with pytest.raises(BadRange):
        make_ensemble(cfg, 0, seed=1)


def test_ensemble_is_read_only():
    ens = make_ensemble(SystemConfig(2, 2, 1.0, 1.0), 4, seed=1)
    with pytest.raises(ValueError):
        ens.H[0, 0, 0] = 1.0


def test_ergodic_capacity_oracle():
    # independent re-implementation with a separate generator
    P = db_to_linear(5.0)
    cfg = SystemConfig(2, 2, float(P), 1.0)
    ens = make_ensemble(cfg, 10_000, seed=4)
    ours = np.mean([np.log2(np.linalg.det(np.eye(2) + P / 2 * h @ h.conj().T).real)
                    for h in ens.H])
    rng = np.random.default_rng(77)
    H = (rng.standard_normal((10_000, 2, 2)) + 1j * rng.standard_normal((10_000, 2, 2))) / np.sqrt(2)
    ref = np.mean(np.log2(np.linalg.det(np.eye(2) + P / 2 * H @ np.conj(np.swapaxes(H, 1, 2))).real))
    assert ours == pytest.approx(ref, rel=0.02)


def test_standard_error_halves_with_quadrupled_samples():
    cfg = SystemConfig(2, 2, 1.0, 1.0)

    def spread(n):
        means = [np.mean(np.abs(make_ensemble(cfg, n, seed=s).H[:, 0, 0]) ** 2)
                 for s in range(40)]
        return np.std(means)

    ratio = spread(100) / spread(400)
    assert 1.4 < ratio < 2.9


def test_save_load_round_trip(tmp_path):
    cfg = SystemConfig(2, 3, 1.0, 1.0, agent_antennas=(1, 2))
    ens = make_ensemble(cfg, 17, seed=123)
    path = tmp_path / "ens.bin"
    save_ensemble(ens, path)
    back = load_ensemble(path)
    assert back == ens
    assert back.config.antennas == (1, 2)
    head = path.read_bytes().split(b"\n", 1)[0].decode()
    assert head.startswith("NOMADIC-ENSEMBLE 1 r=2 t=3 n=17 seed=123")


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"hello\n")
    with pytest.raises(SpecError):
        load_ensemble(p)


def test_compatible_and_agent_rows():
    cfg = SystemConfig(2, 2, 1.0, 1.0, agent_antennas=(2, 1))
    ens = make_ensemble(cfg, 3, seed=1)
    assert ens[0].agent(0).shape == (2, 2)
    assert ens[0].agent(1).shape == (1, 2)
    with pytest.raises(BadRange):
        ens.compatible(SystemConfig(2, 2, 1.0, 1.0))
    with pytest.raises(BadRange):
        ChannelEnsemble(cfg, 1, np.zeros((2, 2, 2)))
