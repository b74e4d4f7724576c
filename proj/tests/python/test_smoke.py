"""Smoke test for the python bindings: synthesize, train, evaluate, generate."""

import math
import tempfile

import numpy as np

import _thermogen as tg


def main():
    assert isinstance(tg.version(), str) and tg.version()

    with tempfile.TemporaryDirectory() as tmp:
        root = f"{tmp}/data"
        n = tg.generate_dataset(root, subjects=1, samples=20, side=16, seed=4)
        assert n == 20, n

        ck = f"{tmp}/model.tgck"
        tg.train(f"{root}/index.tsv", ck, arch="pix2pix", style="front",
                 iterations=3, subject=0, side=16, base_width=8, levels=3, seed=9)

        report = tg.evaluate(ck, f"{root}/index.tsv")
        assert 0.0 <= report["mean"] <= 1.0, report
        assert math.isfinite(report["stddev"])
        assert list(report["per_subject"].keys()) == [0]
        assert report["seed"] == 9

        rng = np.random.default_rng(0)
        cond = rng.random((3, 16, 16), dtype=np.float32)
        out = tg.generate(ck, cond)
        assert out.shape == (1, 16, 16), out.shape
        assert out.min() >= 0.0 and out.max() <= 1.0

    views = [np.full((3, 8, 8), v, dtype=np.float32) for v in (0.1, 0.2, 0.3, 0.4)]
    tess = tg.compose_collage(views, "tessellated")
    assert tess.shape == (3, 16, 16)
    assert tess[0, 0, 0] == np.float32(0.1) and tess[0, 0, 15] == np.float32(0.2)
    stack = tg.compose_collage(views, "stacked")
    assert stack.shape == (3, 32, 8)

    rgb_ts = [round(i * 1000 / 30) for i in range(15)]
    thermal_ts = [round(j * 1000 / 6) for j in range(3)]
    entries = tg.detect_gaps(rgb_ts, thermal_ts, 25)
    assert len(entries) == 15
    assert [e[3] for e in entries] == [i % 5 != 0 for i in range(15)]

    print("python smoke ok")


if __name__ == "__main__":
    main()
