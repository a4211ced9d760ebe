"""Command-line surface for batch experimentation.

Subcommands: fit, transform, eval, synth. Exit codes: 0 success, 1 bad
flags/configuration, 2 I/O or file-format failure, 3 numeric failure. Every
command prints one machine-parsable key=value summary line on stdout and is
deterministic given --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import data_io, evaluation, optimizer
from .errors import (
    ConfigError,
    DimensionError,
    EvalError,
    FormatError,
    GraphError,
    IoError,
    KmsaError,
    NumericError,
    VersionError,
)
from .types import GRAPH_KINDS, KmsaConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; remap onto the exit taxonomy
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def load_config_file(path) -> KmsaConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {p}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"{p}: config must be a JSON object")
    return KmsaConfig.from_dict(raw)


def summary_line(**kv) -> str:
    parts = []
    for key, value in kv.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        parts.append(f"{key}={value}")
    return " ".join(parts)


def format_alpha(alpha) -> str:
    return "|".join(f"{a:.6g}" for a in alpha)


def write_fit_outputs(out_dir: Path, model, data) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    data_io.save_model(model, out_dir / "model", train_data=data)
    trace_rows = np.column_stack(
        [np.arange(len(model.objective_trace)), np.asarray(model.objective_trace)]
    )
    data_io.write_matrix_csv(
        out_dir / "trace.csv", trace_rows, header=["iteration", "objective"]
    )
    weight_rows = np.column_stack(
        [np.arange(len(model.alpha)), np.asarray(model.alpha)]
    )
    data_io.write_matrix_csv(
        out_dir / "weights.csv", weight_rows, header=["view", "alpha"]
    )
    for v, Y in enumerate(model.embeddings, start=1):
        data_io.write_matrix_csv(out_dir / f"embeddings_{v}.csv", Y.T)
        # first two embedding dimensions, for external plotting
        data_io.write_matrix_csv(out_dir / f"plot2d_{v}.csv", Y[: min(2, Y.shape[0])].T)


def cmd_fit(args) -> int:
    cfg = load_config_file(args.config)
    if args.recipe:
        cfg = cfg.with_graph_kind(args.recipe)
    data = data_io.load_dataset(args.data)
    model = optimizer.fit(data, cfg)
    out_dir = Path(args.out)
    write_fit_outputs(out_dir, model, data)
    m = len(model.embeddings)
    divergences = [
        optimizer.gram_divergence(model.states[v].U, model.states[w].U)
        for v in range(m)
        for w in range(v + 1, m)
    ]
    print(
        summary_line(
            status="ok",
            command="fit",
            views=data.n_views,
            samples=data.n_samples,
            d=cfg.d,
            sweeps=len(model.objective_trace) - 1,
            objective=model.objective_trace[-1],
            alpha=format_alpha(model.alpha),
            mean_divergence=float(np.mean(divergences)) if divergences else 0.0,
            out=out_dir,
        )
    )
    return EXIT_OK


def cmd_transform(args) -> int:
    model = data_io.load_model(Path(args.model))
    train = data_io.load_training_data(Path(args.model))
    new = data_io.load_dataset(args.data)
    embedded = optimizer.transform(model, new.views, train)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for v, Y in enumerate(embedded, start=1):
        data_io.write_matrix_csv(out_dir / f"embeddings_{v}.csv", Y.T)
    print(
        summary_line(
            status="ok",
            command="transform",
            views=len(embedded),
            points=new.n_samples,
            d=embedded[0].shape[0] if embedded else 0,
            out=out_dir,
        )
    )
    return EXIT_OK


def split_indices(n: int, train_frac: float, rng) -> tuple:
    n_train = int(round(train_frac * n))
    n_train = min(max(n_train, 1), n - 1)
    perm = rng.permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def evaluate_repeat(data, cfg, task, train_idx, test_idx, cutoffs):
    train = data.subset(train_idx)
    test = data.subset(test_idx)
    model = optimizer.fit(train, cfg)
    test_embedded = optimizer.transform(model, test.views, train)
    per_view = []
    details = []
    for v in range(data.n_views):
        if task == "classification":
            acc = evaluation.knn_classify(
                model.embeddings[v], train.labels, test_embedded[v], test.labels
            )
            per_view.append({"accuracy": acc})
        else:
            rep = evaluation.retrieval_metrics(
                test_embedded[v], model.embeddings[v], test.labels, train.labels, cutoffs
            )
            per_view.append(rep.per_view[0])
            details.append(rep.details[0])
    return evaluation.build_report(task, per_view, details), model


def cmd_eval(args) -> int:
    cfg = load_config_file(args.config)
    if args.recipe:
        cfg = cfg.with_graph_kind(args.recipe)
    data = data_io.load_dataset(args.data)
    if data.labels is None:
        raise EvalError("evaluation requires labels.csv in the dataset directory")
    if not 0.0 < args.train_frac < 1.0:
        raise ConfigError("train_frac_range", "--train-frac must lie in (0, 1)")
    if args.repeats < 1:
        raise ConfigError("repeats_range", "--repeats must be >= 1")
    task = "classification" if args.task == "classify" else "retrieval"

    n = data.n_samples
    repeats = []
    cutoffs = None
    for i in range(args.repeats):
        rng = np.random.default_rng(args.seed + i)
        train_idx, test_idx = split_indices(n, args.train_frac, rng)
        if cutoffs is None and task == "retrieval":
            gallery_size = len(train_idx)
            if args.top_n:
                cutoffs = [int(x) for x in args.top_n.split(",")]
                if any(c < 1 or c > gallery_size for c in cutoffs):
                    raise ConfigError(
                        "top_n_range",
                        f"--top-n entries must lie in [1, {gallery_size}]",
                    )
            else:
                cutoffs = sorted({min(c, gallery_size) for c in (1, 5, 10)})
        report, model = evaluate_repeat(data, cfg, task, train_idx, test_idx, cutoffs)
        best = report.per_view[report.best_view]
        repeats.append(
            {
                "repeat": i,
                "seed": args.seed + i,
                "best_view": report.best_view,
                "best": best,
                "views": list(report.per_view),
                "alpha": [data_io.format_float(a) for a in model.alpha],
            }
        )

    if task == "classification":
        mean_best = float(np.mean([r["best"]["accuracy"] for r in repeats]))
        mean_block = {"best_accuracy": mean_best}
        headline = {"mean_best_accuracy": mean_best}
    else:
        mean_block = {
            "best_map": float(np.mean([r["best"]["map"] for r in repeats])),
            "best_precision": [
                float(np.mean([r["best"]["precision"][ci] for r in repeats]))
                for ci in range(len(cutoffs))
            ],
            "best_recall": [
                float(np.mean([r["best"]["recall"][ci] for r in repeats]))
                for ci in range(len(cutoffs))
            ],
            "best_f1": [
                float(np.mean([r["best"]["f1"][ci] for r in repeats]))
                for ci in range(len(cutoffs))
            ],
            "cutoffs": cutoffs,
        }
        headline = {"mean_best_map": mean_block["best_map"]}

    report_doc = {
        "task": task,
        "repeats": args.repeats,
        "train_frac": args.train_frac,
        "seed": args.seed,
        "per_repeat": repeats,
        "mean": mean_block,
    }
    out_path = Path(args.out)
    if out_path.parent != Path(""):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    data_io.save_report(report_doc, out_path)
    print(
        summary_line(
            status="ok",
            command="eval",
            task=args.task,
            repeats=args.repeats,
            train_frac=args.train_frac,
            seed=args.seed,
            **headline,
            out=out_path,
        )
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        data = data_io.generate_synthetic(
            classes=args.classes,
            per_class=args.per_class,
            informative_views=args.informative_views,
            noise_views=args.noise_views,
            latent_dim=args.latent_dim,
            noise_scale=args.noise_scale,
            seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError("bad_generator_flags", str(exc)) from None
    out_dir = Path(args.out)
    data_io.save_dataset(data, out_dir)
    print(
        summary_line(
            status="ok",
            command="synth",
            views=data.n_views,
            samples=data.n_samples,
            classes=args.classes,
            out=out_dir,
        )
    )
    return EXIT_OK


def build_parser() -> Parser:
    parser = Parser(prog="kmsa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model on a dataset directory")
    p_fit.add_argument("--data", required=True, help="dataset directory")
    p_fit.add_argument("--out", required=True, help="output directory")
    p_fit.add_argument("--config", required=True, help="JSON config file")
    p_fit.add_argument("--recipe", choices=GRAPH_KINDS, help="graph recipe for all views")
    p_fit.set_defaults(func=cmd_fit)

    p_tr = sub.add_parser("transform", help="embed new points with a fitted model")
    p_tr.add_argument("--model", required=True, help="model directory written by fit")
    p_tr.add_argument("--data", required=True, help="dataset directory of new points")
    p_tr.add_argument("--out", required=True, help="output directory")
    p_tr.set_defaults(func=cmd_transform)

    p_ev = sub.add_parser("eval", help="repeated split-fit-evaluate protocol")
    p_ev.add_argument("--task", required=True, choices=("classify", "retrieve"))
    p_ev.add_argument("--data", required=True, help="labeled dataset directory")
    p_ev.add_argument("--config", required=True, help="JSON config file")
    p_ev.add_argument("--out", required=True, help="metrics file to write")
    p_ev.add_argument("--repeats", type=int, default=20)
    p_ev.add_argument("--train-frac", type=float, default=0.5)
    p_ev.add_argument("--seed", type=int, default=0)
    p_ev.add_argument("--top-n", default="", help="retrieval cutoffs, e.g. 1,5,10")
    p_ev.add_argument("--recipe", choices=GRAPH_KINDS, help="graph recipe for all views")
    p_ev.set_defaults(func=cmd_eval)

    p_sy = sub.add_parser("synth", help="generate a synthetic multiview dataset")
    p_sy.add_argument("--out", required=True, help="dataset directory to write")
    p_sy.add_argument("--classes", type=int, default=3)
    p_sy.add_argument("--per-class", type=int, default=20)
    p_sy.add_argument("--informative-views", type=int, default=3)
    p_sy.add_argument("--noise-views", type=int, default=1)
    p_sy.add_argument("--latent-dim", type=int, default=4)
    p_sy.add_argument("--noise-scale", type=float, default=1.0)
    p_sy.add_argument("--seed", type=int, default=0)
    p_sy.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, GraphError, DimensionError, EvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoError, FormatError, VersionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericError, KmsaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
