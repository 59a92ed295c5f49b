"""Command-line front end.

Subcommands: regions, encode-edges, train, eval, predict, render, synth.
Exit codes: 0 success, 1 runtime/I-O failure (message names the path),
2 usage errors. FORMLINK_OUT_DIR, when set, prefixes relative --out paths.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from .data import load_dataset_dir, load_document_file, prepare_documents
from .edges import edge_bit_matrix
from .embeddings import HashFeaturizer, PrecomputedEmbeddings
from .ingest import document_to_dict
from .model import ModelConfig, forward_document, prepare_document
from .nn import load_checkpoint, save_checkpoint
from .regions import assign_all_regions, extract_regions
from .render import render_overlay, scene_from_document
from .synth import SynthSpec, make_synthetic_dataset, write_dataset
from .train import TrainConfig, evaluate, predicted_links, train, write_trace

logger = logging.getLogger(__name__)


def _out_path(path: str) -> str:
    base = os.environ.get("FORMLINK_OUT_DIR")
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _page_size(text: str) -> tuple[float, float]:
    try:
        w, h = text.lower().split("x")
        return float(w), float(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--page-size wants WIDTHxHEIGHT, got {text!r}") from None


def _write_text(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)


def _load_single(args):
    doc, image = load_document_file(args.doc, image_path=args.image, page_size=args.page_size)
    assign_all_regions(doc, extract_regions(doc, image, kernel_fraction=args.kernel_fraction))
    if getattr(args, "dump_model", None):
        _write_text(_out_path(args.dump_model), json.dumps(document_to_dict(doc), indent=2))
    return doc, image


def _provider(args, cfg: ModelConfig):
    if getattr(args, "embeddings", None):
        return PrecomputedEmbeddings(args.embeddings)
    return HashFeaturizer(cfg.hash_dim)


def _load_model(path: str) -> tuple:
    params, meta = load_checkpoint(path)
    return params, ModelConfig.from_dict(meta.get("model", {}))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_regions(args) -> int:
    doc, _ = _load_single(args)
    payload = [
        {"id": r.id, "kind": r.kind.value, "box": list(r.box.as_tuple())} for r in doc.regions
    ]
    out = json.dumps(payload, indent=2)
    if args.out:
        _write_text(_out_path(args.out), out)
    else:
        print(out)
    return 0


def _cmd_encode_edges(args) -> int:
    doc, _ = _load_single(args)
    questions, answers = doc.questions(), doc.answers()
    bits = edge_bit_matrix(questions, answers, doc.regions)
    gold = doc.gold_links
    path = _out_path(args.out)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["doc_id", "question_id", "answer_id", "i_r", "e_lr_r", "e_tb_r", "e_lr_nr", "e_tb_nr", "r_lr", "r_tb", "gold"]
        )
        for i, q in enumerate(questions):
            for j, a in enumerate(answers):
                row = bits[i * len(answers) + j].astype(int).tolist()
                writer.writerow([doc.doc_id, q.id, a.id, *row, int((q.id, a.id) in gold)])
    return 0


def _train_config(args) -> TrainConfig:
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    overrides = {
        "steps": args.steps,
        "batch_size": args.batch_size,
        "base_lr": args.lr,
        "warmup_ratio": args.warmup_ratio,
        "alpha": args.alpha,
        "beta": args.beta,
        "seed": args.seed,
        "eval_every": args.eval_every,
        "decode_mode": args.decode,
    }
    model_overrides = {
        "dim": args.dim,
        "heads": args.heads,
        "layers": args.layers,
        "pair_dim": args.pair_dim,
        "type_dim": args.type_dim,
        "hash_dim": args.hash_dim,
        "dtype": args.dtype,
    }
    merged = cfg.to_dict()
    merged.update({k: v for k, v in overrides.items() if v is not None})
    merged.update({k: v for k, v in model_overrides.items() if v is not None})
    return TrainConfig.from_dict(merged)


def _cmd_train(args) -> int:
    config = _train_config(args)
    provider = _provider(args, config.model)
    loaded = load_dataset_dir(args.data, page_size=args.page_size)
    dataset = prepare_documents(loaded, provider, config.model)
    eval_dataset = None
    if args.eval_data:
        eval_dataset = prepare_documents(
            load_dataset_dir(args.eval_data, page_size=args.page_size), provider, config.model
        )
    result = train(dataset, config, eval_dataset)
    save_checkpoint(_out_path(args.out), result.params, meta={"model": config.model.to_dict()})
    if args.trace:
        write_trace(_out_path(args.trace), result.trace)
    if result.eval_history:
        report = result.eval_history[-1][1]
        print(json.dumps({"best_f1": result.best_f1, "final": report.to_dict()}, indent=2))
    return 0


def _cmd_eval(args) -> int:
    params, model_cfg = _load_model(args.model)
    provider = _provider(args, model_cfg)
    loaded = load_dataset_dir(args.data, page_size=args.page_size)
    dataset = prepare_documents(loaded, provider, model_cfg)
    report = evaluate(dataset, params, model_cfg, args.decode)
    out = json.dumps(report.to_dict(), indent=2)
    if args.out:
        _write_text(_out_path(args.out), out)
    print(out)
    return 0


def _cmd_predict(args) -> int:
    params, model_cfg = _load_model(args.model)
    doc, _ = _load_single(args)
    provider = _provider(args, model_cfg)
    prep = prepare_document(doc, provider, model_cfg)
    result = forward_document(prep, params, model_cfg)
    links = sorted(predicted_links(prep, result, args.decode))
    probs = dict(zip(prep.pair_ids(), result.link_probs()))
    payload = {
        "doc_id": doc.doc_id,
        "links": [list(link) for link in links],
        "scores": [float(probs[link]) for link in links],
    }
    out = json.dumps(payload, indent=2)
    if args.out:
        _write_text(_out_path(args.out), out)
    else:
        print(out)
    return 0


def _cmd_render(args) -> int:
    doc, _ = _load_single(args)
    links = scores = None
    if args.pred:
        with open(args.pred, "r", encoding="utf-8") as fh:
            pred = json.load(fh)
        links = [tuple(pair) for pair in pred.get("links", [])]
        scores = pred.get("scores")
    scene = scene_from_document(doc, links=links, scores=scores)
    _write_text(_out_path(args.out), render_overlay(scene, mode=args.mode))
    return 0


def _cmd_synth(args) -> int:
    rows = cols = None
    if args.grid:
        try:
            rows, cols = (int(v) for v in args.grid.lower().split("x"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"--grid wants RxC, got {args.grid!r}") from None
    spec = SynthSpec(docs=args.docs, kind=args.kind, easy_share=args.easy_share, distractors=args.distractors)
    if rows:
        spec.grid_rows = (rows, rows)
        spec.grid_cols = (cols, cols)
    paths = write_dataset(make_synthetic_dataset(spec, seed=args.seed), _out_path(args.out))
    print(f"wrote {len(paths)} documents to {_out_path(args.out)}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_doc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--doc", required=True, help="annotation JSON file")
    p.add_argument("--image", help="page image (default: sibling .png)")
    p.add_argument("--page-size", type=_page_size, help="WIDTHxHEIGHT when no image exists")
    p.add_argument("--kernel-fraction", type=float, default=1.0 / 40.0, help="line kernel as a fraction of page extent")
    p.add_argument("--dump-model", help="write the parsed internal model as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="formlink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("regions", help="extract paragraph/tabular regions for one document")
    _add_doc_flags(p)
    p.add_argument("--out", help="write regions JSON here (default: stdout)")
    p.set_defaults(func=_cmd_regions)

    p = sub.add_parser("encode-edges", help="dump per-pair spatial indicator bits as CSV")
    _add_doc_flags(p)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=_cmd_encode_edges)

    p = sub.add_parser("train", help="train a link-prediction model")
    p.add_argument("--data", required=True, help="directory of annotation JSON (+PNG) files")
    p.add_argument("--eval-data", help="held-out directory scored during training")
    p.add_argument("--config", help="JSON file of training configuration")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--trace", help="write per-step loss CSV here")
    p.add_argument("--embeddings", help="JSONL sidecar of precomputed entity embeddings")
    p.add_argument("--page-size", type=_page_size, help="WIDTHxHEIGHT for documents without images")
    p.add_argument("--steps", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--warmup-ratio", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--decode", choices=["argmax", "constrained"])
    p.add_argument("--dim", type=int)
    p.add_argument("--heads", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--pair-dim", type=int)
    p.add_argument("--type-dim", type=int)
    p.add_argument("--hash-dim", type=int)
    p.add_argument("--dtype", choices=["float32", "float64"])
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint against gold links")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--decode", choices=["argmax", "constrained"], default="argmax")
    p.add_argument("--embeddings")
    p.add_argument("--page-size", type=_page_size)
    p.add_argument("--out", help="also write the report JSON here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("predict", help="emit predicted links for one document")
    p.add_argument("--model", required=True)
    _add_doc_flags(p)
    p.add_argument("--embeddings")
    p.add_argument("--decode", choices=["argmax", "constrained"], default="argmax")
    p.add_argument("--out", help="write prediction JSON here (default: stdout)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("render", help="render an SVG overlay for one document")
    _add_doc_flags(p)
    p.add_argument("--pred", help="prediction JSON from the predict subcommand (default: gold links)")
    p.add_argument("--mode", choices=["predictions", "regions"], default="predictions")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--docs", type=int, default=10)
    p.add_argument("--kind", choices=["tabular", "paragraph", "mixed", "ambiguous"], default="mixed")
    p.add_argument("--grid", help="fixed RxC grid for tabular pages")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--easy-share", type=float, default=0.6)
    p.add_argument("--distractors", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    return parser


def cli_dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except OSError as e:
        print(f"error: {e.strerror or e}: {getattr(e, 'filename', '')}", file=sys.stderr)
        return 1
    except Exception as e:  # surfaced as a clean one-liner, not a traceback
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
