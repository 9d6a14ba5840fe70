"""
``regscope`` command line.

Exit status: 0 success, 1 usage error, 2 data error.  Nothing touches the
network unless ``--reputation-url`` is given.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import caro
from .catalog import Catalog, parse_manifest
from .dataset import Class, ClassSet, Dataset, load_dataset, save_dataset
from .datagen import default_profiles, fixture, generate, load_profiles, save_profiles
from .errors import RegscopeError
from .ingest import (
    DEFAULT_THRESHOLD,
    FileReputationSource,
    HttpReputationSource,
    extract_report,
    label_from_reputation,
    load_report,
)
from .ml import KINDS, TriageModel, evaluate, parse_ratio, run_grid, train_model
from .triage import triage

EXIT_USAGE = 1
EXIT_DATA = 2

HYPER_FLAGS = {
    "max_depth": int,
    "min_leaf": int,
    "n_trees": int,
    "feature_frac": float,
    "n_rounds": int,
    "learning_rate": float,
    "epochs": int,
    "step_size": float,
    "l2": float,
    "hidden": int,
}
KIND_HYPERS = {
    "logistic": ("epochs", "step_size", "l2"),
    "neural_net": ("hidden", "epochs", "step_size"),
    "decision_tree": ("max_depth", "min_leaf"),
    "random_forest": ("n_trees", "max_depth", "min_leaf", "feature_frac"),
    "boosted_tree": ("n_rounds", "learning_rate", "max_depth"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_bytes(path):
    return Path(path).read_bytes()


def _write(out, data):
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _catalog(args):
    manifest = getattr(args, "manifest", None)
    if manifest:
        return Catalog.from_manifest(Path(manifest).read_text(encoding="utf-8"))
    return Catalog.from_env()


def _hypers(args, kind):
    return {k: getattr(args, k) for k in KIND_HYPERS[kind] if getattr(args, k, None) is not None}


def _add_hyper_flags(p):
    for name, typ in HYPER_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)


def cmd_catalog(args):
    if args.action == "list":
        cat = _catalog(args)
        for loc in cat:
            note = f"\t# {loc.note}" if loc.note else ""
            print(f"{loc.label}\t{loc.raw}{note}")
        return 0
    if not args.target:
        raise UsageError("catalog check needs a manifest path")
    locs = parse_manifest(Path(args.target).read_text(encoding="utf-8"))
    print(f"ok: {len(locs)} locations (P1..P{max(l.id for l in locs)})")
    return 0


def cmd_caro(args):
    name = caro.parse_caro(args.name)
    doc = name.to_dict()
    cls = caro.coarse_class(name)
    doc["class"] = None if cls is None else cls.name.lower()
    print(json.dumps(doc, sort_keys=True))
    return 0


def _reputation_source(args):
    if args.reputation_url:
        return HttpReputationSource(args.reputation_url)
    if args.reputation:
        return FileReputationSource.from_file(args.reputation)
    return None


def _label_for(report, args, source):
    if args.label is not None:
        return Class.parse(args.label)
    family = None
    try:
        family = caro.coarse_class(caro.parse_caro(report.sample_name))
    except RegscopeError:
        pass
    if source is not None:
        verdict = source.lookup(report.sample_id)
        if verdict is None:
            raise RegscopeError(f"no reputation verdict for {report.sample_id}")
        label = label_from_reputation(verdict, args.threshold)
        if label is Class.MALWARE and family is not None:
            return family
        return label
    if family is None:
        raise RegscopeError(
            f"cannot infer a label for {report.sample_name!r}; pass --label or --reputation"
        )
    return family


def cmd_extract(args):
    target = Path(args.report)
    files = sorted(p for p in target.iterdir() if p.is_file()) if target.is_dir() else [target]
    catalog = _catalog(args)
    source = _reputation_source(args)

    def one(path):
        report = load_report(path.read_bytes(), args.format)
        return extract_report(report, _label_for(report, args, source), catalog).sample

    if args.jobs > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            samples = list(pool.map(one, files))
    else:
        samples = [one(p) for p in files]
    _write(args.out, save_dataset(Dataset.from_samples(samples)))
    return 0


def _load_dataset(path, class_set):
    ds = load_dataset(_read_bytes(path))
    return ds.with_class_set(class_set) if class_set is not ClassSet.FLAT5 else ds


def cmd_train(args):
    ds = _load_dataset(args.dataset, ClassSet.parse(args.class_set))
    extra = {"n_jobs": args.jobs} if args.kind == "random_forest" else {}
    model = train_model(args.kind, ds, args.seed, **_hypers(args, args.kind), **extra)
    _write(args.out, model.to_json() + "\n")
    return 0


def _load_model(path):
    try:
        return TriageModel.from_json(Path(path).read_text(encoding="utf-8"))
    except (ValueError, KeyError, TypeError) as exc:
        raise RegscopeError(f"bad model file {path}: {exc}") from exc


def cmd_predict(args):
    model = _load_model(args.model)
    report = load_report(_read_bytes(args.report), args.format)
    result = triage(model, report, _catalog(args))
    print(result.to_json() if args.json else result.to_text())
    return 0


def cmd_eval(args):
    model = _load_model(args.model)
    class_set = ClassSet.parse(model.hyperparameters.get("class_set", "Flat5"))
    metrics = evaluate(model, _load_dataset(args.dataset, class_set))
    if args.json:
        print(json.dumps(metrics.to_dict(), sort_keys=True))
    else:
        print(f"accuracy: {metrics.accuracy:.6f} (n={metrics.n_test})")
        print("confusion (rows true, cols predicted): " + " ".join(c.name.lower() for c in metrics.classes))
        for c, row in zip(metrics.classes, metrics.confusion):
            print(f"  {c.name.lower():<10} " + " ".join(f"{v:4d}" for v in row))
    return 0


def cmd_grid(args):
    class_set = ClassSet.parse(args.class_set)
    if args.fixture:
        fseed = args.seed if args.fixture_seed is None else args.fixture_seed
        ds = fixture(args.fixture, args.n, fseed, class_set)
    elif args.dataset:
        ds = _load_dataset(args.dataset, class_set)
    else:
        raise UsageError("grid needs a dataset path or --fixture")
    ratios = [parse_ratio(r) for r in args.ratios.split(",") if r.strip()]
    hypers = {k: _hypers(args, k) for k in KINDS}
    grid = run_grid(ds, ratios, args.seed, hyperparameters=hypers)
    _write(args.out, grid.to_csv())
    if args.confusion:
        _write(args.confusion, grid.confusion_json())
    return 0


def cmd_datagen(args):
    if args.profiles:
        profiles = load_profiles(_read_bytes(args.profiles))
    elif args.fixture:
        ds = fixture(args.fixture, args.n, args.seed)
        _write(args.out, save_dataset(ds))
        return 0
    else:
        profiles = default_profiles()
    if args.dump_profiles:
        _write(args.dump_profiles, save_profiles(profiles))
    _write(args.out, save_dataset(generate(profiles, args.n, args.seed)))
    return 0


def build_parser():
    parser = _Parser(prog="regscope", description="Registry/filesystem malware triage toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("catalog", help="list the location catalog or validate a manifest")
    p.add_argument("action", choices=("list", "check"))
    p.add_argument("target", nargs="?", help="manifest to check")
    p.add_argument("--manifest", help="list this manifest instead of the active catalog")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("caro", help="parse a malware name")
    p.add_argument("name")
    p.set_defaults(func=cmd_caro)

    p = sub.add_parser("extract", help="sandbox report(s) -> dataset rows")
    p.add_argument("report", help="report file or directory of reports")
    p.add_argument("--format", choices=("cuckoo", "native"))
    p.add_argument("--label", help="class name or code for every report")
    p.add_argument("--reputation", help="JSON file of reputation verdicts")
    p.add_argument("--reputation-url", help="reputation service base URL (network)")
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--manifest")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train one classifier")
    p.add_argument("dataset")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-set", default="Flat5")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify a sandbox report")
    p.add_argument("model")
    p.add_argument("report")
    p.add_argument("--format", choices=("cuckoo", "native"))
    p.add_argument("--manifest")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score a model on a dataset")
    p.add_argument("model")
    p.add_argument("dataset")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="ratio x classifier accuracy grid")
    p.add_argument("dataset", nargs="?")
    p.add_argument("--fixture", choices=("separable", "hard"))
    p.add_argument("--n", type=int, default=90, help="samples per class for --fixture")
    p.add_argument("--fixture-seed", type=int, help="fixture generation seed (default: --seed)")
    p.add_argument("--ratios", default="80/20,70/30,60/40,50/50")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--class-set", default="Flat5")
    p.add_argument("--out", default="-")
    p.add_argument("--confusion", help="write per-cell confusion matrices as JSON")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("datagen", help="generate a synthetic dataset")
    p.add_argument("--profiles", help="profile CSV (class,P1..P47)")
    p.add_argument("--fixture", choices=("separable", "hard"))
    p.add_argument("--n", type=int, default=90)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--dump-profiles", help="also write the profiles used")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_datagen)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"regscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RegscopeError, OSError) as exc:
        print(f"regscope: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
