from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def report(criterion: str, detail: str = "") -> None:
    """One pass line per acceptance criterion (visible with pytest -s)."""
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {criterion}: PASS{suffix}", flush=True)
