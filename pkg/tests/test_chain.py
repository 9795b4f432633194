import json

import numpy as np
import pytest

from sawdilate.chain import ChainConfig, CheckpointError, PivotChain, run_chain
from sawdilate.walk import FULL_PLANE, HALF_PLANE, check_self_avoiding


def test_sample_count_equals_equilibration_gives_zero():
    cfg = ChainConfig(n_steps=20, sample_interval=100, equilibration=500, seed=1)
    seen = []
    stats = run_chain(cfg, lambda ch: seen.append(ch.samples_emitted), attempts=500)
    assert stats.samples == 0
    assert seen == []
    assert stats.attempted == 500


def test_sample_count_arithmetic():
    cfg = ChainConfig(n_steps=20, sample_interval=100, equilibration=500, seed=1)
    stats = run_chain(cfg, None, attempts=1500)
    assert stats.samples == 10
    # non-multiples floor
    cfg2 = ChainConfig(n_steps=20, sample_interval=100, equilibration=500, seed=1)
    stats2 = run_chain(cfg2, None, attempts=1599)
    assert stats2.samples == 10


def test_kernel_and_python_engines_produce_identical_chains():
    for constraint in (FULL_PLANE, HALF_PLANE):
        cfg = ChainConfig(n_steps=24, constraint=constraint, sample_interval=10,
                          equilibration=0, seed=2024)
        a = PivotChain(cfg, engine="kernel")
        b = PivotChain(cfg, engine="python")
        for _ in range(150):
            a.advance(11)
            b.advance(11)
            assert np.array_equal(a.xs, b.xs)
            assert np.array_equal(a.ys, b.ys)
            assert a.accepted == b.accepted


def test_determinism_identical_sample_streams():
    def stream():
        cfg = ChainConfig(n_steps=30, constraint=HALF_PLANE, sample_interval=25, seed=99)
        out = []
        run_chain(cfg, lambda ch: out.append((int(ch.xs[-1]), int(ch.ys[-1]))), attempts=20000)
        return out

    s1 = stream()
    s2 = stream()
    assert s1 == s2
    assert len(s1) > 0


def test_half_plane_samples_stay_in_half_plane_and_self_avoiding():
    cfg = ChainConfig(n_steps=40, constraint=HALF_PLANE, sample_interval=20, seed=7)

    def visitor(ch):
        assert ch.ys.min() >= 0
        assert check_self_avoiding(list(zip(ch.xs.tolist(), ch.ys.tolist())))
        assert ch.xs[0] == 0 and ch.ys[0] == 0

    stats = run_chain(cfg, visitor, attempts=30000)
    assert stats.samples > 0


def test_acceptance_fraction_strictly_between_zero_and_one():
    cfg = ChainConfig(n_steps=100, constraint=FULL_PLANE, sample_interval=100, seed=5)
    chain = PivotChain(cfg)
    chain.equilibrate()
    base = chain.accepted
    chain.advance(100_000)
    frac = (chain.accepted - base) / 100_000
    assert 0.0 < frac < 1.0


def test_checkpoint_roundtrip_identity(tmp_path):
    cfg = ChainConfig(n_steps=25, constraint=HALF_PLANE, sample_interval=10, seed=77)
    chain = PivotChain(cfg)
    chain.run(5000, None)
    path = tmp_path / "chain.checkpoint"
    chain.save(path)
    loaded = PivotChain.load(path)
    assert loaded.state_dict() == chain.state_dict()


def test_checkpoint_resume_matches_straight_run(tmp_path):
    cfg = ChainConfig(n_steps=30, constraint=FULL_PLANE, sample_interval=10, seed=13)

    straight = []
    run_chain(cfg, lambda ch: straight.append((int(ch.xs[-1]), int(ch.ys[-1]))), attempts=8000)

    first = []
    chain = PivotChain(cfg)
    chain.run(4000, lambda ch: first.append((int(ch.xs[-1]), int(ch.ys[-1]))))
    path = tmp_path / "mid.checkpoint"
    chain.save(path)

    resumed = PivotChain.load(path)
    second = []
    resumed.run(8000, lambda ch: second.append((int(ch.xs[-1]), int(ch.ys[-1]))))

    assert first + second == straight


def test_checkpoint_truncated_file_errors(tmp_path):
    cfg = ChainConfig(n_steps=25, seed=3)
    chain = PivotChain(cfg)
    chain.run(2000, None)
    path = tmp_path / "chain.checkpoint"
    chain.save(path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(CheckpointError):
        PivotChain.load(path)


def test_checkpoint_version_mismatch_errors(tmp_path):
    cfg = ChainConfig(n_steps=10, seed=3)
    chain = PivotChain(cfg)
    state = chain.state_dict()
    state["version"] = 999
    path = tmp_path / "chain.checkpoint"
    path.write_text(json.dumps(state))
    with pytest.raises(CheckpointError):
        PivotChain.load(path)


def test_checkpoint_corrupted_walk_errors(tmp_path):
    cfg = ChainConfig(n_steps=4, seed=3)
    chain = PivotChain(cfg)
    state = chain.state_dict()
    state["xs"] = [0, 1, 1, 0, 0]
    state["ys"] = [0, 0, 1, 1, 0]  # revisits the origin
    path = tmp_path / "chain.checkpoint"
    path.write_text(json.dumps(state))
    with pytest.raises(CheckpointError):
        PivotChain.load(path)


def test_every_retained_sample_is_self_avoiding_full_plane():
    cfg = ChainConfig(n_steps=60, constraint=FULL_PLANE, sample_interval=50, seed=21)

    def visitor(ch):
        assert check_self_avoiding(list(zip(ch.xs.tolist(), ch.ys.tolist())))
        assert len(ch.xs) == 61

    stats = run_chain(cfg, visitor, attempts=40000)
    assert stats.samples > 0


def test_adaptive_equilibration_is_deterministic():
    cfg = ChainConfig(n_steps=50, constraint=FULL_PLANE, sample_interval=10, seed=4)
    a = PivotChain(cfg)
    b = PivotChain(cfg)
    assert a.equilibrate() == b.equilibrate()
    assert a.accepted == b.accepted >= 10 * 50
