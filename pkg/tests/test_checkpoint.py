import numpy as np
import pytest

from policyspace.checkpoint import load_checkpoint, save_checkpoint
from policyspace.errors import IntegrityError
from policyspace.generator import PolicyGenerator, sample_latents
from policyspace.optim import Adam


def make_gen(seed, arch="multiplicative"):
    return PolicyGenerator(5, 4, np.random.default_rng(seed), architecture=arch,
                           hidden_dim=8)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("arch", ["concat", "multiplicative"])
def test_round_trip_is_bit_exact(tmp_path, seed, arch):
    gen = make_gen(seed, arch)
    opt = Adam(gen.parameters(), lr=1e-3)
    # take a few optimizer steps so the moments are nontrivial
    rng = np.random.default_rng(seed + 50)
    for _ in range(3):
        for p in gen.parameters():
            p.grad = rng.standard_normal(p.data.shape)
        opt.step()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, gen, opt, step=17, env_name="multigoal",
                    env_config={"name": "multigoal"})
    loaded = load_checkpoint(path)
    assert np.array_equal(loaded.generator.get_flat(), gen.get_flat())
    assert loaded.step == 17
    assert loaded.env_name == "multigoal"
    for a, b in zip(loaded.moments, opt.state_arrays()):
        assert np.array_equal(a, b)

    opt2 = Adam(loaded.generator.parameters(), lr=1e-3)
    loaded.restore_optimizer(opt2)
    assert opt2.t == opt.t
    # save again: the two files must be byte-identical
    path2 = tmp_path / "model2.ckpt"
    save_checkpoint(path2, loaded.generator, opt2, step=17, env_name="multigoal",
                    env_config={"name": "multigoal"})
    assert path.read_bytes() == path2.read_bytes()


def test_checksum_mismatch_refuses_to_load(tmp_path):
    gen = make_gen(1)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, gen, None, step=0, env_name="multigoal")
    blob = bytearray(path.read_bytes())
    blob[-40] ^= 0x01  # flip a payload bit
    path.write_bytes(bytes(blob))
    with pytest.raises(IntegrityError, match="checksum"):
        load_checkpoint(path)


def test_garbage_file_rejected(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"not a checkpoint at all")
    with pytest.raises(IntegrityError):
        load_checkpoint(path)


def test_truncated_file_rejected(tmp_path):
    gen = make_gen(2)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, gen, None)
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(IntegrityError):
        load_checkpoint(path)


def test_loaded_generator_behaves_identically(tmp_path):
    gen = make_gen(3)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, gen, None)
    loaded = load_checkpoint(path).generator
    rng = np.random.default_rng(4)
    obs = rng.random((6, 5))
    z = sample_latents(rng, 6)
    assert np.array_equal(gen.probs_np(obs, z), loaded.probs_np(obs, z))
    assert np.array_equal(gen.value_np(obs, z), loaded.value_np(obs, z))


def test_checkpoint_without_optimizer(tmp_path):
    gen = make_gen(5)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, gen, None, step=3)
    loaded = load_checkpoint(path)
    assert loaded.moments == []
    assert loaded.step == 3
