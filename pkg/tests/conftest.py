import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def golden():
    return json.loads((GOLDEN / "n8_codewords.json").read_text())


def kron_generator(n: int) -> np.ndarray:
    """Independent ``G_n``: bit-reversal rows of the Kronecker power of F."""
    f = np.array([[1, 0], [1, 1]], dtype=np.int64)
    g = np.array([[1]], dtype=np.int64)
    levels = n.bit_length() - 1
    for _ in range(levels):
        g = np.kron(g, f)
    rev = [int(format(i, f"0{levels}b")[::-1], 2) for i in range(n)]
    return g[rev]


def transform_oracle(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    return (u @ kron_generator(u.shape[-1])) % 2


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
