import json

import numpy as np
import pytest

from src.application.inputs.experiment import ExperimentConfig
from src.application.services.synthdata import generate_corpus
from src.core.models.corpus import Corpus
from tests.helpers import tiny_config_dict


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    return ExperimentConfig.from_json(json.dumps(tiny_config_dict()))


@pytest.fixture
def tiny_corpus(tiny_config: ExperimentConfig) -> Corpus:
    return generate_corpus(tiny_config.synth)
