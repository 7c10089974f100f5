"""Command-line driver: ``sarclab induce | evaluate | sweep | predict``.

Progress and warnings go to standard error; data goes to files (or stdout
for ``predict`` without ``--output``).
"""

import argparse
import configparser
import json
import logging
import os
import re
import sys
import tempfile
import warnings
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import CLASSIFIERS, DEFAULT_HYPERPARAMETERS, make_classifier
from .corpus import DEFAULT_SEED, load_corpus
from .evaluation import (
    DEFAULT_RANK_GRID,
    ExperimentConfig,
    fold_space,
    reports_to_csv,
    run_holdout,
    run_in_corpus,
    run_inter_corpora_matrix,
    run_union,
    summarize,
    summary_json,
    summary_table,
)
from .exceptions import SarclabError, ValidationError
from .lsa import VARIANTS, append_star
from .model_io import load_model, save_model

logger = logging.getLogger("sarclab")

ENV_PREFIX = "SARCLAB_"
REGIMES = ("in_corpus", "inter_corpora", "union", "sweep")


class ManifestError(SarclabError):
    pass


@dataclass
class RunManifest:
    config: dict
    regime: str
    corpus_paths: dict
    test_paths: dict
    output_dir: str
    timestamp: str
    tool_version: str


# -- manifest parsing ------------------------------------------------------

def _key_line(path, section, key):
    """1-based line of ``key`` inside ``[section]`` of an INI file, if present."""
    current = None
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]", re.IGNORECASE)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            m = re.match(r"^\s*\[([^\]]+)\]", line)
            if m:
                current = m.group(1).strip()
            elif current == section and pattern.match(line):
                return lineno
    return None


class _Manifest:
    def __init__(self, path, section):
        self.path = Path(path)
        self.parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        self.parser.optionxform = str
        try:
            with open(self.path, encoding="utf-8") as fh:
                self.parser.read_file(fh)
        except FileNotFoundError:
            raise ManifestError(f"manifest not found: {self.path}") from None
        except configparser.Error as exc:
            raise ManifestError(f"{self.path}: {exc}") from None
        if self.parser.has_section(section):
            self.section = section
        elif self.parser.has_section("evaluate"):
            self.section = "evaluate"
        else:
            raise ManifestError(f"{self.path}: missing [{section}] section")

    def error(self, section, key, message):
        line = _key_line(self.path, section, key)
        where = f"{self.path}:{line}" if line else str(self.path)
        return ManifestError(f"{where}: [{section}] {key}: {message}")

    def get(self, key, default=None, section=None):
        section = section or self.section
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None and section == self.section:
            return env
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        return default

    def convert(self, key, func, default, section=None):
        raw = self.get(key, None, section)
        if raw is None:
            return default
        try:
            return func(raw)
        except (ValueError, ValidationError) as exc:
            raise self.error(section or self.section, key, f"invalid value {raw!r} ({exc})") from None

    def paths(self, section):
        if not self.parser.has_section(section):
            return {}
        out = {}
        for name, raw in self.parser.items(section):
            p = Path(raw)
            if not p.is_absolute():
                p = self.path.parent / p
            if not p.exists():
                raise self.error(section, name, f"corpus file not found: {p}")
            out[name] = p
        return out


def _split_list(raw):
    return [item.strip() for item in raw.split(",") if item.strip()]


def _bool(raw):
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _choices(allowed):
    def parse(raw):
        items = list(allowed) if raw.strip() == "all" else _split_list(raw)
        bad = [i for i in items if i not in allowed]
        if bad or not items:
            raise ValueError(f"expected items from {allowed}")
        return items
    return parse


def _typed(value, template):
    if isinstance(template, bool):
        return _bool(value)
    if value.strip().lower() == "none":
        return None
    if isinstance(template, int) or template is None and value.strip().isdigit():
        return int(value)
    if isinstance(template, float):
        return float(value)
    return value.strip()


def _hyperparameters(manifest):
    hyper = {}
    for name in CLASSIFIERS:
        if not manifest.parser.has_section(name):
            continue
        params = {}
        for key in manifest.parser.options(name):
            template = DEFAULT_HYPERPARAMETERS[name].get(key, "")
            params[key] = manifest.convert(key, lambda v, t=template: _typed(v, t), None, section=name)
        hyper[name] = params
    return hyper


def parse_manifest(path, section="evaluate", seed=None, jobs=1, output_dir=None, regime=None):
    m = _Manifest(path, section)
    regime = regime or m.get("regime", "in_corpus")
    if regime not in REGIMES:
        raise m.error(m.section, "regime", f"must be one of {REGIMES}, got {regime!r}")
    variants = m.convert("variant", _choices(VARIANTS), ["statistical"])
    classifiers = m.convert("classifier", _choices(CLASSIFIERS), ["logistic"])
    rank_grid = m.convert("rank_grid", lambda v: tuple(int(x) for x in _split_list(v)), DEFAULT_RANK_GRID)
    k_folds = m.convert("k_folds", int, 10)
    use_star = m.convert("use_star", _bool, False)
    seed = seed if seed is not None else m.convert("seed", int, DEFAULT_SEED)
    hyper = _hyperparameters(m)
    configs = []
    for variant in variants:
        try:
            configs.append(ExperimentConfig(variant=variant, classifier=classifiers[0], rank_grid=rank_grid,
                                            k_folds=k_folds, seed=seed, use_star=use_star,
                                            hyperparameters=hyper, n_jobs=jobs))
        except ValidationError as exc:
            raise m.error(m.section, "rank_grid" if "rank" in str(exc) else "k_folds", str(exc)) from None
    corpora = m.paths("corpora")
    tests = m.paths("test")
    if not corpora:
        raise ManifestError(f"{m.path}: [corpora] section must list at least one corpus")
    if regime == "inter_corpora" and len(corpora) < 2:
        raise m.error("corpora", next(iter(corpora)), "inter_corpora needs two corpora")
    if len(tests) > 1:
        raise m.error("test", list(tests)[1], "at most one test corpus is supported")
    if tests and (regime != "sweep" or len(corpora) != 1):
        raise m.error("test", next(iter(tests)), "a [test] corpus needs regime = sweep and exactly one corpus")
    out = output_dir or m.get("output_dir")
    if out is None:
        raise ManifestError(f"{m.path}: no output_dir in manifest and no --output-dir given")
    out = Path(out)
    if not out.is_absolute() and output_dir is None:
        out = m.path.parent / out
    return regime, configs, classifiers, corpora, tests, out


# -- output handling -------------------------------------------------------

class _AtomicOutputs:
    """Stage files in ``output_dir`` and publish them together; remove all on failure."""

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)
        self.staged = []

    def __enter__(self):
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self

    def write(self, name, text):
        fd, tmp = tempfile.mkstemp(dir=self.output_dir, prefix=f".{name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.staged.append((tmp, self.output_dir / name))

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            for tmp, final in self.staged:
                os.replace(tmp, final)
        else:
            for tmp, _ in self.staged:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        return False


# -- subcommands -----------------------------------------------------------

def cmd_induce(args):
    corpus = load_corpus(args.corpus, args.format)
    space, vectors = fold_space(corpus.texts, args.variant, args.rank, args.seed)
    classifier = None
    if args.classifier:
        X = vectors
        if args.use_star:
            if not corpus.has_stars:
                raise ValidationError(f"--use-star given but {args.corpus} lacks star ratings")
            X = append_star(X, corpus.stars)
        classifier = make_classifier(args.classifier, space.rank, args.seed).fit(X, corpus.labels)
    Path(args.model_out).parent.mkdir(parents=True, exist_ok=True)
    save_model(args.model_out, space, classifier, args.classifier, use_star=args.use_star and bool(args.classifier),
               metadata={"corpus": corpus.name, "n_docs": len(corpus), "tool_version": __version__,
                         "seed": args.seed})
    print(f"variant={space.variant} m={len(space.vocabulary)} n={len(corpus)} rank={space.rank}"
          + (f" classifier={args.classifier}" if args.classifier else ""))
    return 0


def _load_all(paths):
    return [load_corpus(p, name=name) for name, p in paths.items()]


def cmd_evaluate(args, regime=None):
    section = "sweep" if regime == "sweep" else "evaluate"
    regime, configs, classifiers, corpus_paths, test_paths, output_dir = parse_manifest(
        args.manifest, section, seed=args.seed, jobs=args.jobs, output_dir=args.output_dir, regime=regime)
    corpora = _load_all(corpus_paths)
    tests = _load_all(test_paths)
    reports = []
    for config in configs:
        logger.info("running %s / %s / %s", regime, config.variant, ",".join(classifiers))
        if regime == "in_corpus":
            for corpus in corpora:
                reports += run_in_corpus(corpus, config, classifiers)
        elif regime == "union":
            reports += run_union(corpora, config, classifiers)
        elif regime == "inter_corpora":
            reports += run_inter_corpora_matrix(corpora, config, classifiers)
        elif tests:
            best, sweep, holdout = run_holdout(corpora[0], tests[0], config, classifiers)
            logger.info("best ranks: %s", best)
            reports += sweep + holdout
        else:
            for corpus in corpora:
                reports += run_in_corpus(corpus, config, classifiers)

    rows = summarize(reports)
    manifest = RunManifest(
        config=asdict(configs[0]) | {"variants": [c.variant for c in configs], "classifiers": classifiers},
        regime=regime,
        corpus_paths={k: str(v) for k, v in corpus_paths.items()},
        test_paths={k: str(v) for k, v in test_paths.items()},
        output_dir=str(output_dir),
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        tool_version=__version__,
    )
    with _AtomicOutputs(output_dir) as out:
        out.write("results.csv", reports_to_csv(reports))
        out.write("summary.txt", summary_table(rows))
        out.write("summary.json", summary_json(rows))
        out.write("run.json", json.dumps(asdict(manifest), indent=2, sort_keys=True, default=str) + "\n")
    logger.info("wrote %d report(s) to %s", len(reports), output_dir)
    return 0


def _read_predict_input(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or not isinstance(rec.get("text", ""), str):
                raise ValidationError(f"{path}: line {lineno}: expected an object with a string 'text'")
            records.append((str(rec.get("id", lineno)), rec.get("text", ""), rec.get("star"), lineno))
    return records


def _scores(model, X):
    if hasattr(model, "predict_proba"):
        return model.predict_proba(X)[:, 1]
    return model.decision_function(X)


def cmd_predict(args):
    model = load_model(args.model)
    if model.classifier is None:
        raise ValidationError(f"{args.model}: model has no classifier section (induce with --classifier)")
    records = _read_predict_input(args.input)
    if not records:
        vectors, zero = np.zeros((0, model.space.rank)), np.zeros(0, dtype=bool)
    else:
        vectors, zero = model.space.fold_in([r[1] for r in records])
    if model.use_star:
        stars = []
        for doc_id, _, star, lineno in records:
            if star is None:
                raise ValidationError(f"{args.input}: line {lineno}: model uses star ratings but 'star' is missing")
            stars.append(star)
        vectors = append_star(vectors, stars)
    lines = []
    if records:
        labels = model.classifier.predict(vectors)
        scores = _scores(model.classifier, vectors)
        for (doc_id, *_), label, score, z in zip(records, labels, scores, zero):
            lines.append(f"{doc_id}\t{int(label)}\t{float(score)!r}\t{int(z)}\n")
    text = "".join(lines)
    if args.output:
        with _AtomicOutputs(Path(args.output).parent) as out:
            out.write(Path(args.output).name, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sarclab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="global seed (default: manifest or 42)")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="parallel fold jobs")
    parser.add_argument("--output-dir", default=None, help="override the manifest output_dir")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("induce", help="induce a semantic space (optionally train a classifier)")
    p.add_argument("corpus")
    p.add_argument("--variant", choices=VARIANTS, default="statistical")
    p.add_argument("--rank", type=int, default=100)
    p.add_argument("--model-out", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--classifier", choices=CLASSIFIERS, default=None)
    p.add_argument("--use-star", action="store_true")

    p = sub.add_parser("evaluate", help="run the experiment described by a manifest")
    p.add_argument("manifest")

    p = sub.add_parser("sweep", help="rank sweep (and optional holdout) from a manifest")
    p.add_argument("manifest")

    p = sub.add_parser("predict", help="label JSONL documents with a trained model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--output", default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s: %(message)s", force=True)
    logging.captureWarnings(True)
    warnings.simplefilter("default")
    warnings.formatwarning = lambda message, category, *_, **__: f"{category.__name__}: {message}"
    if args.command == "induce" and args.seed is None:
        args.seed = DEFAULT_SEED
    try:
        if args.command == "induce":
            return cmd_induce(args)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "sweep":
            return cmd_evaluate(args, regime="sweep")
        return cmd_predict(args)
    except (SarclabError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
