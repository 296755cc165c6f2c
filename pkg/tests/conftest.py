from dataclasses import replace

import numpy as np
import pytest

from d2dsched.channel import ChannelRealization, NetworkConfig, geometric_drop


def make_real(gains, noise_over_power=1.0):
    return ChannelRealization(np.asarray(gains, dtype=float), noise_power_w=noise_over_power, tx_power_w=1.0)


@pytest.fixture
def geo_real():
    """A dense 120-pair geometric drop."""
    cfg = replace(NetworkConfig(), num_pairs=120, area_side_m=300.0)
    return geometric_drop(cfg, 0)[1]


# ---------------------------------------------------------------- acceptance report

_CRITERIA: dict[int, list[bool]] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # a failing fixture counts against the criterion as well
    if call.when == "setup" and call.excinfo is None:
        return
    if call.when == "teardown":
        return
    _CRITERIA.setdefault(marker.args[0], []).append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status = "PASS" if all(_CRITERIA[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}")
