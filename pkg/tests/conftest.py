from pathlib import Path

import pytest

from avmkit.dsl import parse_model

REPO_ROOT = Path(__file__).resolve().parent.parent
MODEL_FILE = REPO_ROOT / "models" / "antivirus.avm"
CORPUS_DIR = Path(__file__).resolve().parent / "corpus"


@pytest.fixture(scope="session")
def bundled_doc():
    return parse_model(MODEL_FILE.read_text(encoding="utf-8"), name="antivirus")


@pytest.fixture(scope="session")
def coupled(bundled_doc):
    return bundled_doc.coupled


@pytest.fixture(scope="session")
def control(bundled_doc):
    return bundled_doc.coupled.control.base


@pytest.fixture(scope="session")
def preventive(bundled_doc):
    return bundled_doc.coupled.preventive.base
