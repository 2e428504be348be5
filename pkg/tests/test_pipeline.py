import json

import pytest

from prym61 import cli
from prym61 import pipeline as pl


def test_default_coeff_bound():
    assert pl.default_coeff_bound(300) == 7213
    assert pl.default_coeff_bound(1000) == 24043
    assert pl.default_coeff_bound(300, margin=1.5) == 9016
    assert pl.default_coeff_bound(300, margin=1.0) == 6011


def test_canonical_bytes_order_independent():
    a = {"b": [1, 2], "a": {"y": 1, "x": 2}}
    b = {"a": {"x": 2, "y": 1}, "b": [1, 2]}
    assert pl.canonical_bytes(a) == pl.canonical_bytes(b)
    assert pl.payload_hash(a) == pl.payload_hash(b)


def test_config_snapshot():
    cfg = pl.Config(digits=300, coeffs=None)
    assert cfg.coeff_bound == 7213
    assert cfg.snapshot(pl.CONFIG_KEYS["qexp"]) == {"coeffs": 7213, "digits": 300}


def test_verify_without_qexp_is_a_dependency_error(tmp_path):
    cfg = pl.Config(digits=100, work_dir=str(tmp_path))
    with pytest.raises(pl.DependencyError):
        pl.run_stage("verify", cfg)
    assert cli.main(["run", "verify", "--work-dir", str(tmp_path)]) == 2
    assert cli.main(["report", "--work-dir", str(tmp_path)]) == 2


def test_cli_needs_a_stage(capsys):
    assert cli.main(["run"]) == 2


@pytest.fixture(scope="module")
def modsym_dir(tmp_path_factory):
    work = tmp_path_factory.mktemp("work")
    assert cli.main(["run", "modsym", "--digits", "100", "--work-dir", str(work)]) == 0
    return work


def test_stage_cache_hit(modsym_dir):
    cfg = pl.Config(digits=100, work_dir=str(modsym_dir))
    art = pl.run_stage("modsym", cfg)
    assert art.cache_hit
    assert art.ok
    assert art.payload["kernel_rank"] == 8
    # modsym does not depend on digits, so a different precision still hits the cache
    assert pl.run_stage("modsym", pl.Config(digits=300, work_dir=str(modsym_dir))).cache_hit
    timing = json.loads((modsym_dir / "modsym.timing.json").read_text())
    assert timing["hash"] == art.hash


def test_tampered_artifact_is_rejected(modsym_dir, tmp_path):
    obj = json.loads((modsym_dir / "modsym.json").read_text())
    obj["payload"]["kernel_rank"] = 7
    (tmp_path / "modsym.json").write_text(json.dumps(obj))
    with pytest.raises(pl.SchemaMismatchError):
        pl.load_artifact(tmp_path, "modsym")
    obj = json.loads((modsym_dir / "modsym.json").read_text())
    obj["schema_version"] = 99
    (tmp_path / "modsym.json").write_text(json.dumps(obj))
    with pytest.raises(pl.SchemaMismatchError):
        pl.load_artifact(tmp_path, "modsym")


def test_cli_prints_stage_line(modsym_dir, capsys):
    assert cli.main(["run", "modsym", "--work-dir", str(modsym_dir)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("modsym")
    assert "cached" in out and "3/3 checks pass" in out
