"""Experiment drivers: train / evaluate / sweep-fraction / strip-redundant /
infer-logical / check-expressivity.

Settings resolve with precedence CLI flag > config file > built-in
default. Config files are flat ``key=value`` text (same keys as the long
CLI flags, underscores for dashes; ``#`` starts a comment). Every
command is deterministic under (config, seed) and writes a manifest
echoing the resolved settings plus a git-style content hash of each
input file, enough to reproduce the artifacts from scratch.

On failure the process exits nonzero after printing a single
``category: message`` line to stderr, with category one of
config-error, parse-error, data-error, training-error, internal-error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import presets
from .analysis import (
    check_world_separation,
    construct_block_model,
    construct_incremental_model,
    random_world,
)
from .data import (
    Dataset,
    ParseError,
    Triple,
    Vocabulary,
    load_dataset,
    parse_triple_file,
    rules_to_lines,
    subsample_train,
    triples_to_lines,
)
from .evaluation import evaluate, format_report_table, report_to_json, write_ranks_csv
from .logic import forward_closure, logical_hit1, strip_redundant
from .models import (
    EmbeddingModel,
    ModelKind,
    Nonlinearity,
    effective_relation,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .rng import substream
from .training import TrainConfig, TrainingError, train


class ConfigError(ValueError):
    pass


def _git_blob_sha1(path: Path) -> str:
    data = path.read_bytes()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _read_config_file(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


class Settings:
    """CLI > config file > defaults, with type conversion from the default."""

    def __init__(self, args: argparse.Namespace, defaults: dict):
        self.file_cfg = _read_config_file(args.config) if getattr(args, "config", None) else {}
        self.args = args
        self.defaults = defaults
        unknown = set(self.file_cfg) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        self.resolved: dict = {}
        for key, default in defaults.items():
            cli_val = getattr(args, key, None)
            if cli_val is not None:
                self.resolved[key] = cli_val
            elif key in self.file_cfg:
                self.resolved[key] = self._convert(key, self.file_cfg[key], default)
            else:
                self.resolved[key] = default

    @staticmethod
    def _convert(key: str, text: str, default):
        if isinstance(default, bool):
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ConfigError(f"{key}: expected a boolean, got {text!r}")
        try:
            if isinstance(default, int):
                return int(text)
            if isinstance(default, float):
                return float(text)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {text!r}") from None
        if isinstance(default, tuple):
            return tuple(item.strip() for item in text.split(",") if item.strip())
        return text

    def __getitem__(self, key: str):
        return self.resolved[key]

    def get(self, key: str, default=None):
        return self.resolved.get(key, default)

    def require_path(self, key: str) -> Path:
        value = self.resolved[key]
        if not value:
            raise ConfigError(f"missing required setting {key!r}")
        path = Path(value)
        if not path.is_file():
            raise ConfigError(f"{key}: no such file {value!r}")
        return path


def _write_manifest(out_dir: Path, command: str, settings: Settings,
                    inputs: dict[str, Path]) -> None:
    lines = [f"command={command}\n"]
    for key in sorted(settings.resolved):
        value = settings.resolved[key]
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key}={value}\n")
    for name in sorted(inputs):
        lines.append(f"input.{name}.sha1={_git_blob_sha1(inputs[name])}\n")
    (out_dir / "manifest.txt").write_text("".join(lines), encoding="utf-8")


def _out_dir(settings: Settings) -> Path:
    out = Path(settings["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


_DATA_KEYS = dict(train="", valid="", test="", rules="")


def _load_from_settings(settings: Settings, *, need_test: bool = False) -> Dataset:
    train = settings.require_path("train")
    valid = settings.require_path("valid") if settings.get("valid") else None
    test = settings.require_path("test") if settings.get("test") else None
    rules = settings.require_path("rules") if settings.get("rules") else None
    if need_test and test is None:
        raise ConfigError("missing required setting 'test'")
    try:
        return load_dataset(train, test, valid, rules)
    except FileNotFoundError as exc:  # pragma: no cover - require_path catches first
        raise ConfigError(str(exc)) from exc


def _model_kind(settings: Settings) -> ModelKind:
    try:
        return ModelKind(settings["model"])
    except ValueError:
        raise ConfigError(f"unknown model {settings['model']!r}") from None


def _phi(settings: Settings) -> Nonlinearity | None:
    name = settings["phi"]
    if not name:
        return None
    try:
        return Nonlinearity(name)
    except ValueError:
        raise ConfigError(f"unknown phi {name!r}") from None


def _train_config(settings: Settings) -> TrainConfig:
    try:
        return TrainConfig(
            epochs=settings["epochs"],
            batch_size=settings["batch_size"],
            neg_ratio=settings["neg_ratio"],
            learning_rate=settings["learning_rate"],
            l2_lambda=settings["l2_lambda"],
            optimizer=settings["optimizer"],
            seed=settings["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_TRAIN_DEFAULTS = dict(
    **_DATA_KEYS,
    model="simple-plus",
    phi="",
    dim=50,
    epochs=presets.SPORT["epochs"],
    batch_size=presets.SPORT["batch_size"],
    neg_ratio=presets.SPORT["neg_ratio"],
    learning_rate=presets.SPORT["learning_rate"],
    l2_lambda=presets.SPORT["l2_lambda"],
    optimizer="adagrad",
    seed=0,
    out_dir="taxokg-out",
    checkpoint_format="npz",
    loss_header=True,
)


def _assert_constraints_hold(model: EmbeddingModel) -> None:
    from .data import Direction

    for rule in model.rules:
        if rule.direction is not Direction.DIRECT:
            continue
        pf, pb = effective_relation(model, rule.premise)
        cf, cb = effective_relation(model, rule.conclusion)
        if not (np.all(pf <= cf + 1e-9) and np.all(pb <= cb + 1e-9)):
            raise TrainingError("constrained relation inequality violated at save time")


def cmd_train(settings: Settings) -> int:
    kind = _model_kind(settings)
    phi = _phi(settings)
    if settings["rules"] and kind is not ModelKind.SIMPLE_PLUS:
        raise ConfigError("a rules file requires --model simple-plus")
    dataset = _load_from_settings(settings)
    config = _train_config(settings)
    model = init_params(
        kind,
        dataset.vocab.n_entities,
        dataset.vocab.n_relations,
        settings["dim"],
        phi=phi,
        rules=dataset.rules,
        relation_names=dataset.vocab.relation_names,
        seed=config.seed,
    )
    trace = train(model, dataset.store, config)
    if model.rules:
        _assert_constraints_hold(model)
    out = _out_dir(settings)
    suffix = "json" if settings["checkpoint_format"] == "json" else "npz"
    save_checkpoint(model, dataset.vocab, out / f"checkpoint.{suffix}")
    trace.write_csv(out / "loss.csv", header=settings["loss_header"])
    inputs = {k: settings.require_path(k) for k in ("train", "valid", "test", "rules")
              if settings.get(k)}
    _write_manifest(out, "train", settings, inputs)
    print(f"trained {kind.value} for {config.epochs} epochs; artifacts in {out}")
    return 0


_EVAL_DEFAULTS = dict(
    **_DATA_KEYS,
    checkpoint="",
    tie_mode="optimistic",
    filtered=False,
    raw=False,
    ranks_csv=False,
    seed=0,
    out_dir="taxokg-out",
)


def _encode_with_checkpoint_vocab(dataset_vocab: Vocabulary, triples, vocab: Vocabulary):
    remapped = []
    for h, r, t in triples:
        for is_rel, name in ((False, dataset_vocab.entity_name(h)),
                             (True, dataset_vocab.relation_name(r)),
                             (False, dataset_vocab.entity_name(t))):
            known = vocab.has_relation(name) if is_rel else vocab.has_entity(name)
            if not known:
                raise ConfigError(f"checkpoint vocab does not contain {name!r}")
        remapped.append(Triple(
            vocab.entity_id(dataset_vocab.entity_name(h)),
            vocab.relation_id(dataset_vocab.relation_name(r)),
            vocab.entity_id(dataset_vocab.entity_name(t)),
        ))
    return remapped


def cmd_evaluate(settings: Settings) -> int:
    ckpt_path = settings.require_path("checkpoint")
    model, vocab = load_checkpoint(ckpt_path)
    dataset = _load_from_settings(settings, need_test=True)
    test = _encode_with_checkpoint_vocab(dataset.vocab, dataset.store.test, vocab)
    known = _encode_with_checkpoint_vocab(dataset.vocab, sorted(dataset.store.known), vocab)
    out = _out_dir(settings)
    tie_modes = (
        ("optimistic", "expected") if settings["tie_mode"] == "both"
        else (settings["tie_mode"],)
    )
    emit_filtered = settings["filtered"] or not settings["raw"]
    emit_raw = settings["raw"] or not settings["filtered"]
    for mode in tie_modes:
        report = evaluate(model, test, known, tie_mode=mode)
        tag = "" if len(tie_modes) == 1 else f".{mode}"
        (out / f"report{tag}.json").write_text(report_to_json(report), encoding="utf-8")
        table = format_report_table(report)
        (out / f"report{tag}.txt").write_text(table, encoding="utf-8")
        if settings["ranks_csv"]:
            write_ranks_csv(report, out / f"ranks{tag}.csv")
        print(f"tie mode {mode}:")
        if emit_filtered:
            print(f"  filtered MRR {report.mrr_filtered:.3f}  "
                  + "  ".join(f"hit@{k} {v:.3f}" for k, v in sorted(report.hits_filtered.items())))
        if emit_raw:
            print(f"  raw      MRR {report.mrr_raw:.3f}  "
                  + "  ".join(f"hit@{k} {v:.3f}" for k, v in sorted(report.hits_raw.items())))
    inputs = {k: settings.require_path(k) for k in ("train", "valid", "test", "rules")
              if settings.get(k)}
    inputs["checkpoint"] = ckpt_path
    _write_manifest(out, "evaluate", settings, inputs)
    return 0


_SWEEP_DEFAULTS = dict(
    **_DATA_KEYS,
    fractions=("0.2", "0.5", "1.0"),
    methods=("simple", "simple-plus", "logical"),
    phi="",
    dim=50,
    epochs=presets.SPORT["epochs"],
    batch_size=presets.SPORT["batch_size"],
    neg_ratio=presets.SPORT["neg_ratio"],
    learning_rate=presets.SPORT["learning_rate"],
    l2_lambda=presets.SPORT["l2_lambda"],
    optimizer="adagrad",
    seed=0,
    out_dir="taxokg-out",
)


def _derived_seed(seed: int, name: str) -> int:
    return int(substream(seed, name).integers(0, 2**31 - 1))


def cmd_sweep_fraction(settings: Settings) -> int:
    dataset = _load_from_settings(settings, need_test=True)
    try:
        fractions = sorted(float(f) for f in settings["fractions"])
    except ValueError:
        raise ConfigError(f"bad fractions {settings['fractions']!r}") from None
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise ConfigError("fractions must lie in (0, 1]")
    methods = sorted(settings["methods"])
    known_methods = {"simple", "simple-plus", "logical"}
    if not set(methods) <= known_methods:
        raise ConfigError(f"unknown methods: {set(methods) - known_methods}")
    if "simple-plus" in methods and not settings["rules"]:
        raise ConfigError("method simple-plus requires a rules file")

    out = _out_dir(settings)
    rows = []
    for fraction in fractions:
        sub = subsample_train(dataset.store, fraction, _derived_seed(settings["seed"], f"frac:{fraction}"))
        for method in methods:
            if method == "logical":
                closure = forward_closure(sub.train, dataset.rules)
                hit1 = logical_hit1(sub.test, closure)
            else:
                kind = ModelKind(method)
                rules = dataset.rules if method == "simple-plus" else ()
                cell_seed = _derived_seed(settings["seed"], f"cell:{fraction}:{method}")
                model = init_params(
                    kind, dataset.vocab.n_entities, dataset.vocab.n_relations,
                    settings["dim"], phi=_phi(settings), rules=rules,
                    relation_names=dataset.vocab.relation_names, seed=cell_seed,
                )
                config = _train_config(settings)
                config.seed = cell_seed
                train(model, sub, config)
                hit1 = evaluate(model, sub.test, sub.known).hits_filtered[1]
            rows.append((fraction, method, hit1))
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write("fraction,method,hit1\n")
        for fraction, method, hit1 in rows:
            fh.write(f"{fraction!r},{method},{hit1!r}\n")
    for fraction, method, hit1 in rows:
        print(f"fraction {fraction}: {method} hit@1 {hit1:.3f}")
    inputs = {k: settings.require_path(k) for k in ("train", "valid", "test", "rules")
              if settings.get(k)}
    _write_manifest(out, "sweep-fraction", settings, inputs)
    return 0


_STRIP_DEFAULTS = dict(train="", rules="", seed=0, out_dir="taxokg-out")


def cmd_strip_redundant(settings: Settings) -> int:
    dataset = _load_from_settings(settings)
    kept, removed = strip_redundant(dataset.store.train, dataset.rules)
    out = _out_dir(settings)
    with open(out / "train-reduced.tsv", "w", encoding="utf-8") as fh:
        fh.writelines(triples_to_lines(kept, dataset.vocab))
    with open(out / "train-removed.tsv", "w", encoding="utf-8") as fh:
        fh.writelines(triples_to_lines(removed, dataset.vocab))
    inputs = {k: settings.require_path(k) for k in ("train", "rules") if settings.get(k)}
    _write_manifest(out, "strip-redundant", settings, inputs)
    print(f"kept {len(kept)} triples, removed {len(removed)} redundant ones")
    return 0


_LOGICAL_DEFAULTS = dict(
    **_DATA_KEYS, strip=True, out_derived=False, seed=0, out_dir="taxokg-out"
)


def cmd_infer_logical(settings: Settings) -> int:
    dataset = _load_from_settings(settings, need_test=True)
    out = _out_dir(settings)
    train_triples = list(dataset.store.train)
    closure_full = forward_closure(train_triples, dataset.rules)
    hit_full = logical_hit1(dataset.store.test, closure_full)
    print(f"logical hit@1 on train as given: {hit_full:.4f}")
    if settings["strip"]:
        kept, _ = strip_redundant(train_triples, dataset.rules)
        closure_stripped = forward_closure(kept, dataset.rules)
        hit_stripped = logical_hit1(dataset.store.test, closure_stripped)
        print(f"logical hit@1 on redundancy-stripped train: {hit_stripped:.4f}")
    if settings["out_derived"]:
        derived = sorted(closure_full.derived)
        with open(out / "derived.tsv", "w", encoding="utf-8") as fh:
            fh.writelines(triples_to_lines(derived, dataset.vocab))
    inputs = {k: settings.require_path(k) for k in ("train", "test", "rules")
              if settings.get(k)}
    _write_manifest(out, "infer-logical", settings, inputs)
    return 0


_CHECK_DEFAULTS = dict(
    max_entities=4, max_relations=3, max_facts=6, trials=50,
    skip_repair=False, seed=0, out_dir="taxokg-out",
)


def cmd_check_expressivity(settings: Settings) -> int:
    nE, nR = settings["max_entities"], settings["max_relations"]
    if nE * nR * nE > 10_000:
        raise ConfigError("bounds too large to enumerate (|E|*|R|*|E| must be <= 10^4)")
    rng = substream(settings["seed"], "expressivity-worlds")
    failures = 0
    min_margin = np.inf
    for trial in range(settings["trials"]):
        world = random_world(
            int(rng.integers(1, nE + 1)),
            int(rng.integers(1, nR + 1)),
            int(rng.integers(0, settings["max_facts"] + 1)),
            rng,
        )
        block = construct_block_model(world, repair=not settings["skip_repair"])
        ok_b, margin_b = check_world_separation(block, world)
        incremental = construct_incremental_model(world)
        ok_i, margin_i = check_world_separation(incremental, world)
        ok = ok_b and ok_i and margin_b >= 0.1 and margin_i >= 0.1
        failures += 0 if ok else 1
        min_margin = min(min_margin, margin_b, margin_i)
        print(
            f"world {trial}: |E|={world.n_entities} |R|={world.n_relations} "
            f"|facts|={len(world.true_facts)} block(ok={ok_b}, margin={margin_b:.3f}) "
            f"incremental(ok={ok_i}, margin={margin_i:.3f}) -> {'pass' if ok else 'FAIL'}"
        )
    print(f"{settings['trials'] - failures}/{settings['trials']} worlds passed; "
          f"min margin {min_margin:.3f}")
    return 0 if failures == 0 else 1


def _add_common(parser: argparse.ArgumentParser, defaults: dict) -> None:
    parser.add_argument("--config", help="flat key=value settings file")
    for key, default in defaults.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(default, bool):
            parser.add_argument(flag, action="store_const", const=True, default=None)
        elif isinstance(default, int):
            parser.add_argument(flag, type=int, default=None)
        elif isinstance(default, float):
            parser.add_argument(flag, type=float, default=None)
        elif isinstance(default, tuple):
            parser.add_argument(flag, type=lambda s: tuple(x.strip() for x in s.split(",")),
                                default=None)
        else:
            parser.add_argument(flag, default=None)


_COMMANDS = {
    "train": (cmd_train, _TRAIN_DEFAULTS),
    "evaluate": (cmd_evaluate, _EVAL_DEFAULTS),
    "sweep-fraction": (cmd_sweep_fraction, _SWEEP_DEFAULTS),
    "strip-redundant": (cmd_strip_redundant, _STRIP_DEFAULTS),
    "infer-logical": (cmd_infer_logical, _LOGICAL_DEFAULTS),
    "check-expressivity": (cmd_check_expressivity, _CHECK_DEFAULTS),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxokg",
        description="knowledge-graph link prediction with taxonomy-constrained embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, defaults) in _COMMANDS.items():
        cmd_parser = sub.add_parser(name)
        _add_common(cmd_parser, defaults)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    func, defaults = _COMMANDS[args.command]
    try:
        settings = Settings(args, defaults)
        return func(settings)
    except ConfigError as exc:
        print(f"config-error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"parse-error: {exc}", file=sys.stderr)
        return 2
    except TrainingError as exc:
        print(f"training-error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"data-error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal-error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
