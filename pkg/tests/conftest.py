import json
from importlib import resources

import numpy as np
import pytest

from pocbounds import dataset_from_counts, validate_dataset

MEDICAL_EXP = [[46, 23, 231], [270, 8, 22], [40, 223, 37]]
MEDICAL_OBS = [[131, 68, 1], [45, 22, 51], [38, 483, 61]]
EDUCATION_EXP = [[195, 51, 54], [11, 266, 23], [80, 198, 22], [100, 147, 53]]
EDUCATION_OBS = [[67, 129, 193], [11, 17, 87], [53, 53, 70], [46, 436, 38]]


@pytest.fixture(scope="session")
def medical():
    return dataset_from_counts(MEDICAL_EXP, MEDICAL_OBS)


@pytest.fixture(scope="session")
def education():
    return dataset_from_counts(EDUCATION_EXP, EDUCATION_OBS)


def uniform_dataset(n: int):
    exp = np.full((n, n), 1.0 / n)
    obs = np.full((n, n), 1.0 / n**2)
    return validate_dataset(exp, obs)


@pytest.fixture
def uniform3():
    return uniform_dataset(3)


def fixture_file(tmp_path, name: str) -> str:
    """Copy a packaged fixture into tmp_path and return its path."""
    doc = json.loads(
        resources.files("pocbounds.fixtures").joinpath(f"{name}.json").read_text()
    )
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc))
    return str(path)


def tian_pearl_binary(ds):
    """Classical binary bound formulas, used as the algebraic oracle.

    Conventions: x = x1, x' = x2, y = y1, y' = y2.  Returns ((pns_lo, pns_hi),
    (pn_lo, pn_hi), (ps_lo, ps_hi)); the conditional pairs are None when the
    conditioning event has probability zero.
    """
    e, o = ds.exp, ds.obs
    p_y = o[0, 0] + o[1, 0]
    pns_lo = max(0.0, e[0, 0] - e[1, 0], p_y - e[1, 0], e[0, 0] - p_y)
    pns_hi = min(
        e[0, 0], e[1, 1], o[0, 0] + o[1, 1], e[0, 0] - e[1, 0] + o[0, 1] + o[1, 0]
    )
    pn = ps = None
    if o[0, 0] > 0:
        pn = (
            max(0.0, (p_y - e[1, 0]) / o[0, 0]),
            min(1.0, (e[1, 1] - o[1, 1]) / o[0, 0]),
        )
    p_y2 = o[0, 1] + o[1, 1]
    if o[1, 1] > 0:
        ps = (
            max(0.0, (p_y2 - e[0, 1]) / o[1, 1]),
            min(1.0, (e[0, 0] - o[0, 0]) / o[1, 1]),
        )
    return (pns_lo, pns_hi), pn, ps
