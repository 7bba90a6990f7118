import pytest

import nsp


def test_domains():
    assert set(nsp.domains()) == {"balance", "blocks", "coffee", "cover", "cover_heavy"}


def test_oracle_eval_solves_blocks():
    report = nsp.evaluate("blocks", "oracle", seed=0, eval_tasks=10)
    assert report["solve_rate"] == 1.0
    assert report["invalid_plans"] == 0


def test_run_cover_is_deterministic():
    a, model_a = nsp.run("cover", seed=0, eval_tasks=10)
    b, model_b = nsp.run("cover", seed=0, eval_tasks=10)
    assert a == b
    assert model_a == model_b
    assert a["eval"]["solve_rate"] >= 0.95
    assert a["trace"][-1]["nu"] == 0


def test_learned_model_round_trips(tmp_path):
    _, model = nsp.run("cover", seed=1, eval_tasks=5)
    assert nsp.parse_model("cover", model) == model
    path = tmp_path / "model.txt"
    path.write_text(model)
    report = nsp.evaluate("cover", f"learned:{path}", seed=1, eval_tasks=5)
    assert report["tasks"] == 5


def test_model_listing_format():
    text = nsp.model_text("blocks", "oracle")
    assert "NSRT-Op0:" in text
    assert "Preconditions:" in text


def test_pddl_export():
    domain, problem = nsp.export_pddl("balance")
    assert "(:derived" in domain
    assert "(:init" in problem


def test_errors():
    with pytest.raises(nsp.NspError):
        nsp.evaluate("nope")
    with pytest.raises(nsp.NspError):
        nsp.run("cover", bogus=1)
    with pytest.raises(nsp.NspError):
        nsp.evaluate("cover", "learned:/nonexistent/model.txt")
