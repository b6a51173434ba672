"""Shared tiny fixtures: scenarios small enough for exhaustive search."""
from __future__ import annotations

import pytest

from uavsched.channel import RadioConfig
from uavsched.scenario import Scenario
from uavsched.trace import ChannelTrace


@pytest.fixture(scope="session")
def one_cluster() -> Scenario:
    """Two users, two slots per frame, four frames: every solver finishes in
    milliseconds and the demands fit comfortably."""
    return Scenario(
        demands_bits=((1.2e5, 0.8e5),),
        radio=RadioConfig(slots_per_frame=2),
        t_max=4,
    )


@pytest.fixture(scope="session")
def one_cluster_trace(one_cluster: Scenario) -> ChannelTrace:
    return ChannelTrace.generate(one_cluster, seed=11)


@pytest.fixture(scope="session")
def two_cluster() -> Scenario:
    """Two clusters (2 users + 1 user), the exact-solver unit fixture."""
    return Scenario(
        demands_bits=((1.0e5, 2.0e5), (1.5e5,)),
        radio=RadioConfig(slots_per_frame=2),
        t_max=4,
    )


@pytest.fixture(scope="session")
def two_cluster_trace(two_cluster: Scenario) -> ChannelTrace:
    return ChannelTrace.generate(two_cluster, seed=7)


@pytest.fixture(scope="session")
def micro() -> Scenario:
    """Single user, three frames: the smallest end-to-end mission."""
    return Scenario(
        demands_bits=((2.0e5,),),
        radio=RadioConfig(slots_per_frame=2),
        t_max=3,
    )


@pytest.fixture(scope="session")
def micro_trace(micro: Scenario) -> ChannelTrace:
    return ChannelTrace.generate(micro, seed=3)


MICRO_INI = """\
[clusters]
cluster1 = 0.2

[limits]
t_max = 3
slots_per_frame = 2
name = micro
"""


@pytest.fixture()
def micro_ini_file(tmp_path):
    path = tmp_path / "micro.ini"
    path.write_text(MICRO_INI)
    return path
