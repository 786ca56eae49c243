import json
from pathlib import Path

import pytest

from citywall import ingest_structure, read_trace_records

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def petclinic_model():
    return ingest_structure(DATA.joinpath("petclinic_structure.json").read_bytes())


@pytest.fixture(scope="session")
def petclinic_records():
    return read_trace_records(DATA.joinpath("petclinic_traces.jsonl").read_text())


@pytest.fixture(scope="session")
def petclinic_raw():
    return json.loads(DATA.joinpath("petclinic_structure.json").read_text())
