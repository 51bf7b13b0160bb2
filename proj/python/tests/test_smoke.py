import pytest

import graphparse as gp


def test_canonical_form_ignores_variable_names():
    a = "SELECT x0 WHERE { x0 direct M0 . x1 write x0 }"
    b = "SELECT x1 WHERE { x1 direct M0 . x0 write x1 }"
    assert gp.canonical_form(a) == gp.canonical_form(b)
    assert gp.iso_equal(a, b)
    assert not gp.iso_equal(a, "SELECT x0 WHERE { x0 direct M0 }")


def test_parse_error_is_raised():
    with pytest.raises(gp.ParseError):
        gp.canonical_form("SELECT x0 WHERE { x0 direct }")


def test_generate_is_deterministic():
    a = gp.generate(50, seed=3)
    assert a == gp.generate(50, seed=3)
    assert len(a) == 50
    assert {"question", "query", "derivation"} <= set(a[0])


def test_mcd_split_respects_atom_target():
    ex = gp.generate(400, seed=0)
    s = gp.split(ex, "mcd", seed=1)
    assert len(s["train"]) + len(s["test"]) == 400
    assert s["atom_divergence"] <= 0.02 + 1e-12
    r = gp.split(ex, "random", seed=1)
    assert s["compound_divergence"] > r["compound_divergence"]


def test_train_evaluate_predict(tmp_path):
    ex = gp.generate(120, seed=0)
    s = gp.split(ex, "random", seed=0)
    cfg = {"model": {"mode": "grounded", "d": 16}, "epochs": 3, "lr": 5e-3, "seed": 0}
    ckpt = tmp_path / "best.ckpt"
    out = gp.train(ex, s, cfg, ckpt)
    assert ckpt.exists()
    assert out["parameters"] > 0
    losses = [r["loss"] for r in out["history"] if r["split"] == "train"]
    assert losses and losses[-1] < losses[0]
    rep = gp.evaluate(ckpt, ex, s["test"])
    assert rep["n"] == len(s["test"])
    assert 0.0 <= rep["exact_match"] <= 1.0
    pred = gp.predict(ckpt, ex[0]["question"])
    assert pred["question"] == ex[0]["question"]
    assert pred["predicted"].split()[0] in ("SELECT", "ASK")


def test_gradcheck_passes():
    r = gp.gradcheck("grounded", d=4)
    assert r["pass"]
