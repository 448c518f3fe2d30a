"""Command-line surface tying ingestion, generation, rendering, training,
and evaluation into reproducible runs.

Exit codes: 0 success, 1 usage error, 2 data error (with file/line
diagnostics), 3 internal invariant failure.

Every output artifact is deterministic for identical inputs and flags; the
run configuration and input content hashes are recorded next to each
artifact in ``<artifact>.run.json`` (and inline where the format is
self-describing), while wall-clock timestamps live only in the separate
``<artifact>.times.json`` sidecar.  Configuration comes from flags alone;
environment variables are never consulted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, corpus, hebrew, metrics
from .candidates import KnnIndex, coverage_curve, generate_candidates
from .errors import DataError
from .rendering import RenderConfig, mirror_rtl, render_text, save_image
from .scoring import (
    ScorerConfig,
    TrainConfig,
    build_training_set,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .scoring.training import write_trace

RUN_MAGIC = "DIVRIT-RUN"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _run_payload(subcommand: str, args: argparse.Namespace,
                 inputs: list[str]) -> dict:
    config = {
        key: value for key, value in sorted(vars(args).items())
        if key not in ("func", "subcommand") and not callable(value)
    }
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in config.items()}
    return {
        "format": RUN_MAGIC,
        "version": 1,
        "tool_version": __version__,
        "subcommand": subcommand,
        "run_config": config,
        "inputs": {str(p): sha256_file(p) for p in inputs},
    }


class _ArtifactWriter:
    """Writes artifacts plus their run/timestamp sidecars."""

    def __init__(self, subcommand: str, args: argparse.Namespace,
                 inputs: list[str]):
        self.payload = _run_payload(subcommand, args, inputs)
        self.started = datetime.now(timezone.utc).isoformat()
        self.t0 = time.monotonic()

    def metadata(self) -> dict:
        return {"run": self.payload}

    def sidecars(self, artifact_path) -> None:
        artifact_path = Path(artifact_path)
        run_path = artifact_path.with_name(artifact_path.name + ".run.json")
        with open(run_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        times_path = artifact_path.with_name(artifact_path.name + ".times.json")
        with open(times_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"started": self.started,
                       "elapsed_seconds": round(time.monotonic() - self.t0, 3)},
                      fh, indent=1)
            fh.write("\n")


def _parse_int_list(text: str) -> list[int]:
    """Comma-separated integers and inclusive ranges: "1,3,5-8"."""
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    if not values:
        raise UsageError(f"empty integer list: {text!r}")
    return values


# --- subcommand implementations ----------------------------------------------

def _cmd_build_lexicon(args) -> int:
    sentences = []
    for path in args.inputs:
        sentences.extend(corpus.load_corpus_file(path))
    writer = _ArtifactWriter("build-lexicon", args, args.inputs)
    lexicon = corpus.build_lexicon(sentences, strict=args.strict)
    lexicon.save(args.out)
    writer.sidecars(args.out)
    print(f"lexicon: {len(lexicon)} entries, {lexicon.total_tokens} tokens "
          f"-> {args.out}")
    return 0


def _cmd_candidates(args) -> int:
    lexicon = corpus.Lexicon.load(args.lexicon)
    index = KnnIndex(lexicon)
    writer = _ArtifactWriter("candidates", args, [args.lexicon])
    lines = []
    for word in args.words:
        query = hebrew.strip_marks(word)
        candset = generate_candidates(index, query, k=args.k, c=args.c)
        for cand in candset.candidates:
            pattern = hebrew.encode_pattern(hebrew.extract_pattern(cand))
            lines.append(f"{query}\t{hebrew.to_text(cand)}\t{pattern}")
    listing = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(listing)
        writer.sidecars(args.out)
    else:
        sys.stdout.write(listing)
    return 0


def _cmd_coverage(args) -> int:
    lexicon = corpus.Lexicon.load(args.lexicon)
    sentences = corpus.load_corpus_file(args.test)
    writer = _ArtifactWriter("coverage", args, [args.lexicon, args.test])
    pairs = [(hebrew.strip(gold), gold)
             for _s, _i, gold in metrics.iter_gold_words(sentences)]
    rows = coverage_curve(KnnIndex(lexicon), pairs,
                          _parse_int_list(args.k), _parse_int_list(args.c))
    csv_text = "k,c,coverage\n" + "".join(
        f"{k},{c},{value:.6f}\n" for k, c, value in rows
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text)
    writer.sidecars(args.out)
    print(csv_text, end="")
    return 0


def _cmd_render(args) -> int:
    config = RenderConfig(cell_height=args.cell_height,
                          advance_width=args.advance_width,
                          max_patches=args.max_patches)
    writer = _ArtifactWriter("render", args, [])
    image = render_text(args.text, config, truncate=args.truncate)
    if args.mirror:
        image = mirror_rtl(image)
    save_image(image, args.out)
    writer.sidecars(args.out)
    print(f"rendered {image.width}x{image.height} "
          f"({image.patch_count} patches) -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    sentences = corpus.load_corpus_file(args.corpus)
    inputs = [args.corpus] + ([args.lexicon] if args.lexicon else [])
    writer = _ArtifactWriter("train", args, inputs)
    if args.lexicon:
        lexicon = corpus.Lexicon.load(args.lexicon)
    else:
        lexicon = corpus.build_lexicon(sentences)
    scorer_config = ScorerConfig(
        hidden_dim=args.hidden_dim, embed_dim=args.embed_dim,
        ngram_table_size=args.table_size, window_radius=args.window_radius,
        max_word_len=args.max_word_len, aux=args.aux,
        mirror_candidates=args.mirror,
    )
    render_config = RenderConfig()
    training_set = build_training_set(
        sentences, lexicon, scorer_config=scorer_config,
        render_config=render_config, k=args.k, c=args.c,
        balanced=args.balanced,
    )
    train_config = TrainConfig(
        steps=args.steps, batch_size=args.batch_size,
        learning_rate=args.learning_rate, momentum=args.momentum,
        seed=args.seed, balanced=args.balanced,
    )
    result = train(training_set, scorer_config, train_config)
    save_checkpoint(args.out, result.scorer, render_config,
                    metadata=writer.metadata())
    writer.sidecars(args.out)
    trace_path = args.trace or (str(args.out) + ".trace.csv")
    write_trace(trace_path, result.trace)
    writer.sidecars(trace_path)
    last = result.trace[-1] if result.trace else None
    tail = (f", final loss {last.loss:.4f}, batch accuracy {last.accuracy:.3f}"
            if last else "")
    print(f"trained {args.steps} steps on {len(training_set)} examples{tail} "
          f"-> {args.out}")
    return 0


def _write_report(report: metrics.EvalReport, out, writer: _ArtifactWriter) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_json(metadata=writer.metadata()))
        writer.sidecars(out)
    sys.stdout.write(report.to_table())


def _cmd_evaluate(args) -> int:
    if args.gold or args.pred:
        if not (args.gold and args.pred):
            raise UsageError("external evaluation needs both --gold and --pred")
        if args.checkpoint or args.scheme:
            raise UsageError("--gold/--pred cannot be combined with a checkpoint run")
        writer = _ArtifactWriter("evaluate", args, [args.gold, args.pred])
        with open(args.gold, encoding="utf-8") as fh:
            gold_text = fh.read()
        with open(args.pred, encoding="utf-8") as fh:
            pred_text = fh.read()
        report = metrics.evaluate_texts(gold_text, pred_text)
        _write_report(report, args.out, writer)
        return 0
    if not (args.checkpoint and args.lexicon and args.test and args.scheme):
        raise UsageError(
            "model evaluation needs --checkpoint, --lexicon, --test and --scheme"
        )
    writer = _ArtifactWriter(
        "evaluate", args, [args.checkpoint, args.lexicon, args.test])
    scorer, render_config, _meta = load_checkpoint(args.checkpoint)
    lexicon = corpus.Lexicon.load(args.lexicon)
    sentences = corpus.load_corpus_file(args.test)
    report = metrics.run_scheme(
        args.scheme, scorer, lexicon, sentences, k=args.k, c=args.c,
        render_config=render_config, threads=args.threads,
    )
    _write_report(report, args.out, writer)
    return 0


def _cmd_baseline(args) -> int:
    lexicon = corpus.Lexicon.load(args.lexicon)
    sentences = corpus.load_corpus_file(args.test)
    writer = _ArtifactWriter("baseline", args, [args.lexicon, args.test])
    report = metrics.run_baseline(lexicon, sentences, args.method)
    _write_report(report, args.out, writer)
    return 0


# --- parser ---------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="niqqudkit",
                     description="Hebrew diacritics restoration toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p = sub.add_parser("build-lexicon", help="corpus -> lexicon file")
    p.add_argument("inputs", nargs="+", metavar="CORPUS")
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true",
                   help="reject tokens with unsupported marks instead of skipping")
    p.set_defaults(func=_cmd_build_lexicon)

    p = sub.add_parser("candidates", help="list KNN candidates for words")
    p.add_argument("words", nargs="+", metavar="WORD")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_candidates)

    p = sub.add_parser("coverage", help="coverage CSV over k and c ranges")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--k", default="5", help="comma/range list, e.g. 1,5 or 1-8")
    p.add_argument("--c", default="1-8", help="comma/range list")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("render", help="rasterize text to PGM/PNG")
    p.add_argument("text", metavar="TEXT")
    p.add_argument("--out", required=True)
    p.add_argument("--mirror", action="store_true")
    p.add_argument("--cell-height", type=int, default=16)
    p.add_argument("--advance-width", type=int, default=16)
    p.add_argument("--max-patches", type=int, default=529)
    p.add_argument("--truncate", action="store_true")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("train", help="train the dual-encoder scorer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", help="prebuilt lexicon (default: built from corpus)")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--trace", help="loss/accuracy trace CSV (default: OUT.trace.csv)")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--aux", choices=["none", "bag", "positional"], default="none")
    p.add_argument("--mirror", action="store_true",
                   help="horizontally mirror candidate images")
    p.add_argument("--balanced", action="store_true",
                   help="cap the majority pattern's effective training frequency")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--window-radius", type=int, default=2)
    p.add_argument("--table-size", type=int, default=4096)
    p.add_argument("--max-word-len", type=int, default=16)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint or parallel files")
    p.add_argument("--checkpoint")
    p.add_argument("--lexicon")
    p.add_argument("--test")
    p.add_argument("--scheme", choices=["oracle", "knn"])
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--gold", help="gold text file (external evaluation)")
    p.add_argument("--pred", help="predicted text file (external evaluation)")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("baseline", help="run the majority or knn1 baseline")
    p.add_argument("method", choices=["majority", "knn1"])
    p.add_argument("--lexicon", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=_cmd_baseline)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "subcommand", None):
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"data error: missing file: {e.filename}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except SystemExit:
        raise
    except Exception as e:  # internal invariant failure
        import traceback

        traceback.print_exc()
        print(f"internal error: {e}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
