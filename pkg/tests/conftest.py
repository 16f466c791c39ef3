"""Shared fixtures: a tiny end-to-end universe built through the CLI."""

from dataclasses import dataclass
from pathlib import Path

import pytest

TINY_CONFIG = """\
data.count = 3
data.resolution = 16
data.chunks_per_model = 2
vqgan.base_channels = 8
vqgan.codebook_size = 16
vqgan.embed_dim = 8
vqgan.epochs = 2
vqgan.batch_size = 2
prior.layers = 2
prior.heads = 2
prior.width = 32
prior.epochs = 2
prior.batch_size = 4
upsampler.base_channels = 8
upsampler.epochs = 1
upsampler.batch_size = 4
upsampler.T = 50
sample.top_k = 8
sample.temperature = 1.0
"""


@dataclass
class Universe:
    root: Path
    config: Path
    data_dir: Path
    ckpt_dir: Path
    samples_dir: Path

    def args(self, *extra) -> list:
        return [*extra, "--config", str(self.config),
                "--data-dir", str(self.data_dir), "--ckpt-dir", str(self.ckpt_dir)]


@pytest.fixture(scope="session")
def universe(tmp_path_factory) -> Universe:
    """Dataset plus tiny trained checkpoints for every stage."""
    from voxarch.cli import main

    root = tmp_path_factory.mktemp("universe")
    u = Universe(
        root=root,
        config=root / "tiny.cfg",
        data_dir=root / "data",
        ckpt_dir=root / "ckpt",
        samples_dir=root / "samples",
    )
    u.config.write_text(TINY_CONFIG)
    assert main(u.args("prep")) == 0
    assert main(u.args("train", "vqgan")) == 0
    assert main(u.args("train", "prior")) == 0
    assert main(u.args("train", "upsampler", "--level", "1")) == 0
    assert main(u.args("sample", "--count", "2", "--out", str(u.samples_dir))) == 0
    return u
