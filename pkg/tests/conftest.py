from pathlib import Path

import numpy as np
import pytest

from icrics.imagecore import Image, save_pgm

CORPUS = Path(__file__).parent / "data" / "corpus"


def smooth_image(seed, h=64, w=64):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    fx, fy = rng.uniform(4, 12, 2)
    px = 128 + 70 * np.sin(xx / fx + seed) * np.cos(yy / fy) + rng.normal(0, 4, (h, w))
    return Image(np.clip(np.floor(px + 0.5), 0, 255))


@pytest.fixture
def small_dataset(tmp_path):
    d = tmp_path / "toy"
    d.mkdir()
    for i, name in enumerate(["b_img", "a_img"]):
        save_pgm(smooth_image(i), d / f"{name}.pgm")
    (d / "readme.txt").write_text("not an image")
    return d


@pytest.fixture(scope="session")
def corpus_dir():
    assert CORPUS.is_dir(), "tests/data/corpus missing; run tools/make_corpus.py"
    return CORPUS


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(number, ok, detail):
        _ACCEPTANCE[number] = (bool(ok), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
