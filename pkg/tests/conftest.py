from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from metricbias import GrayImage

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
CORPUS = DATA / "corpus"
GOLDEN = DATA / "golden"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_image(rng, shape=(24, 32), levels=256) -> GrayImage:
    return GrayImage(rng.integers(0, levels, size=shape, dtype=np.int64).astype(np.uint8))


def smooth_image(rng, shape=(48, 64)) -> GrayImage:
    """Piecewise-smooth test image; closer to natural content than white noise."""
    yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
    base = 90 + 60 * np.sin(xx / rng.uniform(5, 15)) + 50 * (yy > shape[0] * rng.uniform(0.3, 0.7))
    base += rng.normal(0, rng.uniform(2, 20), shape)
    return GrayImage(np.clip(base.round(), 0, 255).astype(np.uint8))


# Acceptance criteria record their sub-checks here; a one-line verdict per
# criterion is printed at the end of the session.
ACCEPTANCE: dict[str, dict] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[name]
        failed = [k for k, ok in entry["checks"].items() if ok is False]
        skipped = [k for k, ok in entry["checks"].items() if ok is None]
        if failed:
            verdict = f"FAIL ({', '.join(failed)})"
        elif skipped and len(skipped) == len(entry["checks"]):
            verdict = f"SKIPPED ({entry.get('reason', 'not run')})"
        else:
            verdict = "PASS"
        extra = f" in {entry['seconds']:.1f}s" if "seconds" in entry else ""
        terminalreporter.write_line(f"{name}: {verdict}{extra} - {entry['title']}")
