from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from taxokg.cli import main
from taxokg.data import Triple, Vocabulary
from taxokg.models import save_checkpoint

from conftest import DATA, table_model

LOC = DATA / "location"
SPORT = DATA / "sport"


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_train_writes_artifacts_and_is_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        code = run_cli(
            "train", "--train", LOC / "train.tsv", "--test", LOC / "test.tsv",
            "--rules", LOC / "rules.tsv", "--model", "simple-plus",
            "--epochs", 3, "--out-dir", out,
        )
        assert code == 0
        assert (out / "checkpoint.npz").is_file()
        assert (out / "loss.csv").is_file()
        assert (out / "manifest.txt").is_file()
    assert (out1 / "loss.csv").read_bytes() == (out2 / "loss.csv").read_bytes()
    manifest = (out1 / "manifest.txt").read_text()
    assert "command=train" in manifest
    assert "input.train.sha1=" in manifest


def test_train_checkpoint_satisfies_constraints(tmp_path):
    from taxokg.data import Direction
    from taxokg.models import effective_relation, load_checkpoint

    out = tmp_path / "run"
    assert run_cli(
        "train", "--train", SPORT / "train.tsv", "--test", SPORT / "test.tsv",
        "--rules", SPORT / "rules.tsv", "--model", "simple-plus",
        "--epochs", 2, "--out-dir", out,
    ) == 0
    model, _ = load_checkpoint(out / "checkpoint.npz")
    for rule in model.rules:
        if rule.direction is Direction.DIRECT:
            pf, pb = effective_relation(model, rule.premise)
            cf, cb = effective_relation(model, rule.conclusion)
            assert np.all(pf <= cf + 1e-9) and np.all(pb <= cb + 1e-9)


def test_train_rules_require_simple_plus(tmp_path, capsys):
    code = run_cli(
        "train", "--train", LOC / "train.tsv", "--rules", LOC / "rules.tsv",
        "--model", "simple", "--out-dir", tmp_path,
    )
    assert code == 2
    assert "config-error" in capsys.readouterr().err


def test_train_missing_rules_file_immediate_error(tmp_path, capsys):
    code = run_cli(
        "train", "--train", LOC / "train.tsv", "--rules", tmp_path / "absent.tsv",
        "--model", "simple-plus", "--out-dir", tmp_path,
    )
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("config-error:")
    assert "absent.tsv" in err


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        f"train={LOC / 'train.tsv'}\ntest={LOC / 'test.tsv'}\n"
        f"rules={LOC / 'rules.tsv'}\nepochs=1\nseed=7\n"
    )
    out = tmp_path / "out"
    # CLI --epochs overrides the file; file seed overrides the default
    assert run_cli("train", "--config", cfg, "--epochs", 2, "--out-dir", out) == 0
    manifest = (out / "manifest.txt").read_text()
    assert "epochs=2" in manifest
    assert "seed=7" in manifest


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("nonsense=1\n")
    assert run_cli("train", "--config", cfg, "--out-dir", tmp_path) == 2
    assert "nonsense" in capsys.readouterr().err


def _perfect_checkpoint(tmp_path):
    """Checkpoint whose scores are maximal exactly on the toy test triples."""
    vocab = Vocabulary()
    for name in ("a", "b", "c", "d"):
        vocab.add_entity(name)
    vocab.add_relation("r")
    table = np.zeros((4, 4))
    test = [Triple(0, 0, 1), Triple(2, 0, 3)]
    for h, _, t in test:
        table[h, t] = 7.0
    model = table_model(table)
    path = tmp_path / "perfect.npz"
    save_checkpoint(model, vocab, path)
    train_file = tmp_path / "train.tsv"
    train_file.write_text("a\tr\tc\nb\tr\td\n")
    test_file = tmp_path / "test.tsv"
    test_file.write_text("a\tr\tb\nc\tr\td\n")
    return path, train_file, test_file


def test_evaluate_perfect_checkpoint(tmp_path):
    ckpt, train_file, test_file = _perfect_checkpoint(tmp_path)
    out = tmp_path / "out"
    assert run_cli(
        "evaluate", "--checkpoint", ckpt, "--train", train_file,
        "--test", test_file, "--out-dir", out,
    ) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["mrr"]["filtered"] == 1.0
    assert report["hits_filtered"]["1"] == 1.0
    table = (out / "report.txt").read_text()
    assert "MRR(filter)" in table and "hit@10" in table


def test_evaluate_both_tie_modes(tmp_path):
    ckpt, train_file, test_file = _perfect_checkpoint(tmp_path)
    out = tmp_path / "out"
    assert run_cli(
        "evaluate", "--checkpoint", ckpt, "--train", train_file,
        "--test", test_file, "--tie-mode", "both", "--ranks-csv", "--out-dir", out,
    ) == 0
    assert (out / "report.optimistic.json").is_file()
    assert (out / "report.expected.json").is_file()
    assert (out / "ranks.optimistic.csv").is_file()


def test_evaluate_vocab_mismatch_names_symbol(tmp_path, capsys):
    ckpt, train_file, test_file = _perfect_checkpoint(tmp_path)
    bad_test = tmp_path / "bad.tsv"
    bad_test.write_text("a\tr\tmystery\n")
    code = run_cli(
        "evaluate", "--checkpoint", ckpt, "--train", train_file,
        "--test", bad_test, "--out-dir", tmp_path / "o",
    )
    assert code == 2
    assert "mystery" in capsys.readouterr().err


def test_sweep_logical_only_matches_logical_hit1(tmp_path):
    from taxokg.data import load_dataset
    from taxokg.logic import forward_closure, logical_hit1

    out = tmp_path / "out"
    assert run_cli(
        "sweep-fraction", "--train", LOC / "train.tsv", "--test", LOC / "test.tsv",
        "--rules", LOC / "rules.tsv", "--fractions", "1.0", "--methods", "logical",
        "--out-dir", out,
    ) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "fraction,method,hit1"
    assert len(rows) == 2
    ds = load_dataset(LOC / "train.tsv", LOC / "test.tsv", rules_path=LOC / "rules.tsv")
    expected = logical_hit1(ds.store.test, forward_closure(ds.store.train, ds.rules))
    fraction, method, hit1 = rows[1].split(",")
    assert method == "logical"
    assert float(hit1) == pytest.approx(expected, abs=1e-12)


def test_sweep_row_count_is_grid_size(tmp_path):
    out = tmp_path / "out"
    assert run_cli(
        "sweep-fraction", "--train", LOC / "train.tsv", "--test", LOC / "test.tsv",
        "--rules", LOC / "rules.tsv", "--fractions", "0.5,1.0",
        "--methods", "logical,simple", "--epochs", 2, "--out-dir", out,
    ) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 2


def test_strip_location_and_idempotence(tmp_path):
    out1 = tmp_path / "first"
    assert run_cli(
        "strip-redundant", "--train", LOC / "train.tsv", "--rules", LOC / "rules.tsv",
        "--out-dir", out1,
    ) == 0
    removed = (out1 / "train-removed.tsv").read_text().splitlines()
    assert len(removed) == 4
    out2 = tmp_path / "second"
    assert run_cli(
        "strip-redundant", "--train", out1 / "train-reduced.tsv",
        "--rules", LOC / "rules.tsv", "--out-dir", out2,
    ) == 0
    assert (out2 / "train-removed.tsv").read_text() == ""


def test_strip_paris_toy(tmp_path):
    train = tmp_path / "train.tsv"
    train.write_text(
        "paris\tCapitalCityOfCountry\tfrance\n"
        "paris\tCityLocatedInCountry\tfrance\n"
    )
    rules = tmp_path / "rules.tsv"
    rules.write_text("CapitalCityOfCountry\tdirect\tCityLocatedInCountry\n")
    out = tmp_path / "out"
    assert run_cli("strip-redundant", "--train", train, "--rules", rules,
                   "--out-dir", out) == 0
    assert (out / "train-removed.tsv").read_text() == (
        "paris\tCityLocatedInCountry\tfrance\n"
    )


def test_infer_logical_reports_both(tmp_path, capsys):
    assert run_cli(
        "infer-logical", "--train", SPORT / "train.tsv", "--test", SPORT / "test.tsv",
        "--rules", SPORT / "rules.tsv", "--out-dir", tmp_path,
    ) == 0
    out = capsys.readouterr().out
    assert "train as given: 0.2866" in out
    assert "redundancy-stripped train: 0.2866" in out


def test_check_expressivity_passes(tmp_path, capsys):
    assert run_cli("check-expressivity", "--trials", 8, "--seed", 1,
                   "--out-dir", tmp_path) == 0
    out = capsys.readouterr().out
    assert "8/8 worlds passed" in out


def test_check_expressivity_sabotage_fails(tmp_path, capsys):
    code = run_cli("check-expressivity", "--trials", 8, "--seed", 1,
                   "--skip-repair", "--out-dir", tmp_path)
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out


def test_check_expressivity_bounds_guard(tmp_path, capsys):
    assert run_cli("check-expressivity", "--max-entities", 50,
                   "--max-relations", 10, "--out-dir", tmp_path) == 2
    assert "config-error" in capsys.readouterr().err


def test_parse_error_category(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("only_two\tfields\n")
    assert run_cli("train", "--train", bad, "--out-dir", tmp_path) == 2
    assert capsys.readouterr().err.startswith("parse-error:")
