import os
from pathlib import Path

import pytest

DATA = Path(os.environ.get("COAPLAN_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def kb():
    import coaplan

    return coaplan.KnowledgeBase.load([DATA / "kb" / "base.yaml", DATA / "kb" / "nation-b.yaml"])
