import copy
import json
from importlib import resources

import pytest

from falqon_factor.cli import EXIT_CLAIM, main
from falqon_factor.verify import check_daqc, format_table, run_suite


@pytest.fixture(scope="module")
def raw_catalog():
    return json.loads(resources.files("falqon_factor").joinpath("data/catalog.json").read_text())


def test_pristine_catalog_passes():
    checks = run_suite()
    assert all(c.passed for c in checks), format_table(checks)
    names = [c.name for c in checks]
    assert any(n.startswith("ground set") for n in names) and "daqc round trip" in names
    assert any(n.startswith("truncation") for n in names)


@pytest.mark.parametrize("term", [0, 1, 2])
@pytest.mark.parametrize("delta", [-0.5, 0.5])
def test_perturbed_551_coefficient_fails(raw_catalog, tmp_path, term, delta):
    data = copy.deepcopy(raw_catalog)
    entry = next(e for e in data["entries"] if e["n"] == 551)
    entry["terms"][term]["coeff"] += delta
    path = tmp_path / "cat.json"
    path.write_text(json.dumps(data))
    failed = [c.name for c in run_suite(path) if not c.passed]
    assert "ground set 551:full" in failed
    assert main(["verify", "--catalog", str(path)]) == EXIT_CLAIM


def test_daqc_check_reports_worst_case():
    check = check_daqc(trials=3)
    assert check.passed and "worst infidelity" in check.detail
