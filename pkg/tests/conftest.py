import copy

import pytest

from atticsim import scenarios


@pytest.fixture
def flat_scene_doc():
    return scenarios.base_scene()


@pytest.fixture
def step_scene_doc():
    return scenarios.step_scene()


@pytest.fixture
def four_fixture_doc():
    return scenarios.four_fixture_scene()


@pytest.fixture
def tagged_scene_doc():
    return scenarios.tagged_scene()


@pytest.fixture
def seal_scenario_doc():
    return copy.deepcopy(scenarios.seal_scenario())
