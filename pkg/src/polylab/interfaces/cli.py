"""Command-line interface.

Every subcommand takes --seed; usage errors exit 2, runtime errors
exit 1 with a structured JSON message on stderr.
"""

import argparse
import json
import os
import sys

import numpy as np


def _fail(message, code="runtime-error"):
    sys.stderr.write(json.dumps({"error": code, "message": str(message)})
                     + "\n")
    raise SystemExit(1)


def _load_config(args):
    from .runconfig import RunConfig

    if getattr(args, "config", None):
        config = RunConfig.load(args.config)
    else:
        config = RunConfig()
    if getattr(args, "seed", None) is not None:
        config.data["seed"] = args.seed
        config.data["pretrain"]["seed"] = args.seed
        config.data["regression"]["seed"] = args.seed
    return config


def _featurized_records(path, config):
    from ..chemcore import TokenVocabulary, featurize_dataset, load_dataset

    records = load_dataset(path)
    vocab = TokenVocabulary.default()
    featurize_dataset(records, vocab=vocab,
                      fp_bits=config["encoders"]["fp_seq_len"],
                      seed=config["seed"])
    return records, vocab


def _records_tsv(records):
    lines = []
    for rec in records:
        props = ";".join(f"{k}={v!r}" for k, v in
                         sorted(rec.properties.items()))
        lines.append(f"{rec.psmiles}\t{props}" if props else rec.psmiles)
    return "\n".join(lines) + "\n"


def _open_pipeline(args, need_records=True):
    from ..chemcore import TokenVocabulary, featurize_dataset, load_dataset
    from .pipeline import Pipeline
    from .snapshot import Snapshot

    snap_path = os.path.join(args.workdir, "snapshot")
    if not os.path.isdir(snap_path):
        _fail(f"no snapshot at {snap_path}; run pretrain first",
              code="missing-snapshot")
    config, store, data, scalers = Snapshot(snap_path).load()
    records = []
    rec_path = os.path.join(snap_path, "records.tsv")
    if need_records and os.path.exists(rec_path):
        records = load_dataset(rec_path)
        featurize_dataset(records,
                          vocab=TokenVocabulary.default(),
                          fp_bits=config["encoders"]["fp_seq_len"],
                          seed=config["seed"])
    return Pipeline(config, store, data=data, scalers=scalers,
                    records=records), snap_path


def _save_pipeline(pipeline, snap_path):
    from .snapshot import write_snapshot

    records_tsv = None
    rec_path = os.path.join(snap_path, "records.tsv")
    if os.path.exists(rec_path):
        with open(rec_path, encoding="utf-8") as f:
            records_tsv = f.read()
    write_snapshot(snap_path, pipeline.config, pipeline.store,
                   data=pipeline.data, scalers=pipeline.scaler_dicts,
                   records_tsv=records_tsv)


# ------------------------------------------------------------ subcommands

def cmd_data(args):
    from ..chemcore import validate_dataset

    if args.action == "validate":
        errors = validate_dataset(args.file)
        for line_no, message in errors:
            print(f"line {line_no}: {message}")
        if errors:
            _fail(f"{len(errors)} invalid record(s) in {args.file}",
                  code="invalid-dataset")
        print(f"{args.file}: all records valid")
        return
    # featurize
    config = _load_config(args)
    records, _ = _featurized_records(args.file, config)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "records.tsv"), "w",
              encoding="utf-8") as f:
        f.write(_records_tsv(records))
    from ..chemcore import save_conformer_sidecar

    save_conformer_sidecar(os.path.join(args.out, "conformers.tsv"),
                           {i: r.conformer for i, r in enumerate(records)})
    print(f"featurized {len(records)} records into {args.out}")


def cmd_pretrain(args):
    from ..pretrain import fit
    from .snapshot import write_snapshot

    config = _load_config(args)
    if args.epochs is not None:
        config.data["pretrain"]["epochs"] = args.epochs
    records, vocab = _featurized_records(args.data, config)
    store, history = fit(records, config.encoder_config(),
                         config.pretrain_config(), vocab=vocab)
    os.makedirs(args.workdir, exist_ok=True)
    snap_path = os.path.join(args.workdir, "snapshot")
    write_snapshot(snap_path, config, store,
                   data={}, scalers={},
                   metrics={"best_val": history.best_val,
                            "best_epoch": history.best_epoch},
                   records_tsv=_records_tsv(records))
    with open(os.path.join(args.workdir, "pretrain_history.tsv"), "w",
              encoding="utf-8") as f:
        f.write(history.to_tsv())
    print(f"snapshot written to {snap_path} "
          f"(best val {history.best_val!r} at epoch {history.best_epoch})")


def cmd_train_head(args):
    from ..propreg import train_regressor

    pipeline, snap_path = _open_pipeline(args)
    records = [r for r in pipeline.records
               if args.property in r.properties]
    if not records:
        _fail(f"no records carry property {args.property!r}",
              code="missing-property")
    targets = np.array([r.properties[args.property] for r in records])
    reg_cfg = pipeline.config.regression_config()
    scaler, history = train_regressor(
        records, pipeline.enc_cfg, pipeline.store, targets,
        config=reg_cfg, head_prefix=f"head.{args.property}")
    pipeline.scaler_dicts[args.property] = scaler.to_dict()
    _save_pipeline(pipeline, snap_path)
    print(f"head for {args.property} trained "
          f"({len(history)} epochs, best val mse {min(history)!r})")


def cmd_cv(args):
    from ..propreg import cross_validate, embed_dataset

    pipeline, _ = _open_pipeline(args)
    records = [r for r in pipeline.records
               if args.property in r.properties]
    if len(records) < args.k:
        _fail(f"{len(records)} records with {args.property!r} "
              f"< {args.k} folds", code="insufficient-data")
    embeddings = embed_dataset(records, pipeline.enc_cfg, pipeline.store)
    targets = np.array([r.properties[args.property] for r in records])
    report = cross_validate(
        embeddings, targets, property_name=args.property,
        k=args.k, seed=args.seed if args.seed is not None else 0,
        config=pipeline.config.regression_config())
    out = args.out or os.path.join(args.workdir, f"cv_{args.property}")
    with open(out + ".tsv", "w", encoding="utf-8") as f:
        f.write(report.to_tsv())
    with open(out + ".json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, sort_keys=True, indent=2)
        f.write("\n")
    print(f"cv report written to {out}.tsv "
          f"(mean r2 {report.mean['r2']!r})")


def cmd_generate(args):
    from ..designgen import candidates_to_tsv

    pipeline, snap_path = _open_pipeline(args)
    candidates, accepted, report, histogram = pipeline.generate(
        args.property, args.target, args.n,
        seed=args.seed if args.seed is not None else None)
    _save_pipeline(pipeline, snap_path)
    out = args.out or os.path.join(args.workdir, "candidates")
    with open(out + ".tsv", "w", encoding="utf-8") as f:
        f.write(candidates_to_tsv(candidates))
    with open(out + "_report.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, sort_keys=True, indent=2)
        f.write("\n")
    landscape = [(c.novelty, c.predictions.get(args.property))
                 for c in candidates
                 if c.psmiles and c.novelty is not None]
    with open(out + "_landscape.tsv", "w", encoding="utf-8") as f:
        f.write("novelty\tproperty\n")
        for nov, prop in landscape:
            f.write(f"{nov!r}\t{prop!r}\n")
    print(f"{len(accepted)} accepted / {len(candidates)} generated; "
          f"validity {report.validity_pct!r}%")


def cmd_attribute(args):
    pipeline, _ = _open_pipeline(args)
    amap = pipeline.attribute(args.psmiles, args.property)
    out = args.out or os.path.join(args.workdir, "attribution.json")
    with open(out, "w", encoding="utf-8") as f:
        json.dump(amap.to_dict(), f, sort_keys=True, indent=2)
        f.write("\n")
    print(f"attribution written to {out} "
          f"({len(amap.highlights)} highlights)")


def cmd_index(args):
    from ..evidence import EvidenceEngine, HashedBowEmbedder, load_manifest

    if args.action == "build":
        docs = load_manifest(args.corpus)
        engine = EvidenceEngine(
            provider=HashedBowEmbedder(dim=args.dim),
            m=args.m, ef_construction=args.ef_construction,
            seed=args.seed if args.seed is not None else 0)
        engine.build(docs)
        os.makedirs(args.out, exist_ok=True)
        engine.index.save(os.path.join(args.out, "index.bin"))
        with open(os.path.join(args.out, "chunks.jsonl"), "w",
                  encoding="utf-8") as f:
            for chunk in engine.chunks:
                f.write(json.dumps({
                    "doc_id": chunk.doc_id,
                    "granularity": chunk.granularity,
                    "span": list(chunk.span), "text": chunk.text,
                    "sha256": chunk.sha256}) + "\n")
        print(f"indexed {len(engine.chunks)} chunks from "
              f"{len(docs)} documents into {args.out}")
        return
    # search
    from ..evidence import HnswIndex

    index = HnswIndex.load(os.path.join(args.index, "index.bin"))
    provider = HashedBowEmbedder(dim=index.dim)
    hits = index.search(provider.embed(args.query), k=args.k,
                        ef_search=args.ef_search)
    for ext_id, sim in hits:
        print(f"{ext_id}\t{sim!r}")


def cmd_fetch_web(args):
    from ..evidence import (FixtureConnector, SOURCE_NAMES, fetch_web,
                            rewrite_query, score_web_results)

    query = rewrite_query(args.query)
    connectors = []
    for name in SOURCE_NAMES:
        path = os.path.join(args.fixtures, f"{name}.json")
        alt = os.path.join(args.fixtures, f"{name}.xml")
        if os.path.exists(path):
            connectors.append(FixtureConnector(name, path))
        elif os.path.exists(alt):
            connectors.append(FixtureConnector(name, alt))
    results, statuses = fetch_web(query, connectors, args.now_year)
    results = score_web_results(query, results)
    for res in results:
        print(f"{res.source}\t{res.title}\t{res.year}\t{res.score!r}")
    for status in statuses:
        if not status.ok:
            print(f"# {status.source}: {status.error}", file=sys.stderr)


def cmd_score_cases(args):
    from ..agentloop import aggregate_scores, cards_to_tsv, load_cases, \
        score_case

    cases = load_cases(args.cases)
    cards = []
    for case in cases:
        systems = sorted(case.rubric) if all(
            isinstance(v, dict) for v in case.rubric.values()) \
            and case.rubric else [args.system]
        for system in systems:
            cards.append(score_case(case.id, system,
                                    case.rubric_inputs(system)))
    out = args.out or "scorecards"
    with open(out + ".tsv", "w", encoding="utf-8") as f:
        f.write(cards_to_tsv(cards))
    summary = aggregate_scores(cards)
    with open(out + "_summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, sort_keys=True, indent=2)
        f.write("\n")
    print(f"scored {len(cards)} card(s) over {len(cases)} case(s)")


def cmd_render(args):
    from ..chemcore import parse_psmiles, substitute_terminus
    from .render import render_svg

    graph = substitute_terminus(parse_psmiles(args.psmiles))
    highlights = [int(x) for x in args.highlights.split(",") if x] \
        if args.highlights else []
    svg = render_svg(graph, highlights=highlights)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(svg)
    print(f"wrote {args.out}")


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    pipeline, _ = _open_pipeline(args)
    app = create_app(pipeline, corpus_manifest=args.corpus)
    host = args.host or pipeline.config["service"]["host"]
    port = args.port or pipeline.config["service"]["port"]
    uvicorn.run(app, host=host, port=port, log_level="warning")


# ------------------------------------------------------------- arg parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="polylab",
        description="Desk-scale polymer representation, regression, "
                    "generation, retrieval, and design-agent toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workdir=True):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None,
                       help="run-config JSON file")
        if workdir:
            p.add_argument("--workdir", default="polylab_run")

    p = sub.add_parser("data", help="validate or featurize a dataset")
    p.add_argument("action", choices=["validate", "featurize"])
    p.add_argument("file")
    p.add_argument("--out", default="featurized")
    common(p, workdir=False)
    p.set_defaults(func=cmd_data)

    p = sub.add_parser("pretrain", help="run multimodal pretraining")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train-head", help="train a property head")
    p.add_argument("--property", required=True)
    common(p)
    p.set_defaults(func=cmd_train_head)

    p = sub.add_parser("cv", help="fivefold cross-validation")
    p.add_argument("--property", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("generate", help="conditional generation")
    p.add_argument("--property", required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("attribute", help="occlusion attribution")
    p.add_argument("--psmiles", required=True)
    p.add_argument("--property", required=True)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("index", help="build or search the evidence index")
    p.add_argument("action", choices=["build", "search"])
    p.add_argument("--corpus", default=None, help="manifest (build)")
    p.add_argument("--out", default="evidence_index")
    p.add_argument("--index", default="evidence_index")
    p.add_argument("--query", default=None)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--ef-construction", type=int, default=200)
    p.add_argument("--ef-search", type=int, default=128)
    common(p, workdir=False)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("fetch-web", help="query web connectors (fixtures)")
    p.add_argument("--query", required=True)
    p.add_argument("--fixtures", required=True)
    p.add_argument("--now-year", type=int, default=2026)
    common(p, workdir=False)
    p.set_defaults(func=cmd_fetch_web)

    p = sub.add_parser("score-cases", help="apply the scoring rubric")
    p.add_argument("--cases", required=True)
    p.add_argument("--system", default="polylab")
    p.add_argument("--out", default=None)
    common(p, workdir=False)
    p.set_defaults(func=cmd_score_cases)

    p = sub.add_parser("render", help="2D structure depiction")
    p.add_argument("--psmiles", required=True)
    p.add_argument("--out", default="structure.svg")
    p.add_argument("--highlights", default="")
    common(p, workdir=False)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="start the HTTP gateway")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--corpus", default=None)
    common(p)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "index" and args.action == "build" \
            and not args.corpus:
        parser.error("index build requires --corpus")
    if args.command == "index" and args.action == "search" \
            and not args.query:
        parser.error("index search requires --query")
    try:
        args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        _fail(exc, code=type(exc).__name__)
    return 0


if __name__ == "__main__":
    sys.exit(main())
