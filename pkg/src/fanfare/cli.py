"""Batch entry points: curate event files, evaluate rankings, generate
synthetic scenarios, build face datasets, and launch the service.

Exit codes: 0 success, 2 unreadable or malformed input data, 3 invalid
configuration (engine config, lexicon, roster).  Every subcommand is
deterministic given its inputs and seed and writes only to its declared
output paths (reports additionally render figures next to the output file).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import engine, evaluation, faces, report
from .events import ParseStats, StreamError, read_events, validate_stream
from .lexicon import ExcitementLexicon, LexiconError, default_lexicon, load_lexicon_file

EXIT_OK = 0
EXIT_DATA = 2
EXIT_CONFIG = 3


class DataError(Exception):
    pass


class ConfigError(Exception):
    pass


def _load_streams(path) -> dict:
    """Group an event file by channel into validated streams."""
    stats = ParseStats()
    by_channel: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, item in read_events(fh, stats):
                if isinstance(item, StreamError):
                    raise DataError(f"{path}:{lineno}: {item}")
                by_channel.setdefault(item.channel, []).append(item)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if stats.unknown_field_count:
        print(f"warning: ignored {stats.unknown_field_count} unknown field(s) "
              f"in {path}", file=sys.stderr)
    return {ch: validate_stream(evs, channel=ch) for ch, evs in sorted(by_channel.items())}


def _load_config(path) -> engine.EngineConfig:
    if path is None:
        return engine.EngineConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            record = json.load(fh)
        return engine.config_from_dict(record)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def _load_lexicon(path) -> ExcitementLexicon:
    if path is None:
        return default_lexicon()
    try:
        return load_lexicon_file(path)
    except OSError as exc:
        raise ConfigError(f"cannot read lexicon {path}: {exc}") from exc
    except LexiconError as exc:
        raise ConfigError(f"invalid lexicon {path}: {exc}") from exc


def _load_roster(path) -> list:
    if path is None:
        return []
    try:
        with open(path, encoding="utf-8") as fh:
            return [line.strip() for line in fh
                    if line.strip() and not line.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read roster {path}: {exc}") from exc


def _write_lines(path, lines) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    lexicon = _load_lexicon(args.lexicon)
    roster = _load_roster(args.roster)
    streams = _load_streams(args.input)

    highlights = []
    if args.workers > 1 and len(streams) > 1:
        # channels are independent; per-channel curation can fan out
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            for result in pool.map(
                    lambda stream: engine.curate(stream, lexicon, roster, cfg),
                    streams.values()):
                highlights.extend(result)
    else:
        for stream in streams.values():
            highlights.extend(engine.curate(stream, lexicon, roster, cfg))
    highlights.sort(key=lambda h: (-h.fused_score, h.t_start, h.channel))

    _write_lines(args.out, (json.dumps(h.to_dict(), separators=(",", ":"))
                            for h in highlights))
    if args.format == "json":
        print(json.dumps({"count": len(highlights),
                          "top": [h.to_dict() for h in highlights[:5]]}, indent=2))
    else:
        print(report.format_run_summary(highlights))
    if args.figures:
        out = Path(args.out)
        fig_path = out.with_name(out.stem + "_components.png")
        report.render_component_figure(highlights, cfg.weights, fig_path)
        print(f"figure: {fig_path}", file=sys.stderr)
    return EXIT_OK


def _load_produced(path) -> tuple:
    """Highlights file -> (list of Highlight, relevance by id or None)."""
    produced = []
    relevance: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    produced.append(engine.Highlight.from_dict(record))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad highlight record: {exc}") from exc
                if "relevance" in record:
                    relevance[record["id"]] = float(record["relevance"])
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rels = relevance if len(relevance) == len(produced) and produced else None
    return produced, rels


def _load_reference(path) -> evaluation.ReferenceSet:
    pairs = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    pairs.append((record["player"], record["hole"]))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad reference record: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return evaluation.ReferenceSet.from_pairs(pairs)


def cmd_eval(args) -> int:
    produced, relevance = _load_produced(args.input)
    reference = _load_reference(args.reference)
    depths = args.depths

    results = {}
    for depth in depths:
        try:
            match = evaluation.match_highlights(produced, reference, depth)
        except evaluation.EmptyReference as exc:
            raise DataError(str(exc)) from exc
        results[str(depth)] = {"precision": match.precision, "recall": match.recall,
                               "matched": sorted([list(m) for m in match.matched])}

    ndcg_values = None
    if relevance is not None:
        ranked = evaluation.RankedList(
            items=tuple((h.id, relevance[h.id]) for h in produced))
        ndcg_values = {str(d): evaluation.ndcg(ranked, d) for d in depths}

    doc = {"depths": depths, "results": results, "ndcg": ndcg_values,
           "produced": len(produced), "reference": len(reference.entries)}
    out = Path(args.out)
    _write_lines(out, [json.dumps(doc, indent=2)])
    summary = report.format_eval_summary(doc)
    _write_lines(out.with_name(out.stem + ".txt"), [summary.rstrip("\n")])
    figures = report.render_eval_figures(doc, out.with_suffix(""))
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        print(summary, end="")
        for fig in figures:
            print(f"figure: {fig}", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            record = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {args.spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid scenario file {args.spec}: {exc}") from exc
    if args.seed is not None:
        record["seed"] = args.seed
    try:
        spec = evaluation.spec_from_dict(record)
    except evaluation.SpecOutOfBounds as exc:
        raise DataError(f"invalid scenario: {exc}") from exc

    stream, truth = evaluation.generate_stream(spec, _load_lexicon(args.lexicon))

    from .events import serialize_event
    out = Path(args.out)
    _write_lines(out, (serialize_event(e) for e in stream.events))
    truth_path = out.with_name(out.stem + ".truth.jsonl")
    _write_lines(truth_path, (json.dumps(h.to_dict(), separators=(",", ":"))
                              for h in truth))
    refs_path = out.with_name(out.stem + ".refs.jsonl")
    seen = set()
    ref_lines = []
    for h in truth:
        key = (h.player, h.hole)
        if key not in seen:
            seen.add(key)
            ref_lines.append(json.dumps({"player": h.player, "hole": h.hole},
                                        separators=(",", ":")))
    _write_lines(refs_path, ref_lines)
    print(f"wrote {len(stream.events)} events, {len(truth)} ground-truth highlights")
    return EXIT_OK


def cmd_faces(args) -> int:
    roster = _load_roster(args.roster)
    if not roster:
        raise ConfigError("faces requires a non-empty --roster")
    streams = _load_streams(args.input)
    out_dir = Path(args.out_dir)

    candidates_by_player: dict = {}
    total_faces = 0
    for stream in streams.values():
        from .events import Kind, slice_stream
        total_faces += len(slice_stream(stream, Kind.FACE, 0, stream.duration))
        for g in slice_stream(stream, Kind.GRAPHIC, 0, stream.duration):
            try:
                player = engine.find_player(g.payload.text, roster)
            except engine.NoPlayerMatch:
                continue
            harvested = faces.harvest_candidates(stream, g.t_start,
                                                 window=args.window,
                                                 min_height_px=args.min_height)
            candidates_by_player.setdefault(player, []).extend(harvested)

    if total_faces == 0:
        print("warning: no face events in input; nothing to build", file=sys.stderr)
        return EXIT_OK

    out_dir.mkdir(parents=True, exist_ok=True)
    for player, cands in sorted(candidates_by_player.items()):
        dataset = faces.build_dataset(cands, player)
        slug = "".join(c.lower() if c.isalnum() else "_" for c in player)
        path = out_dir / f"{slug}.jsonl"
        lines = [json.dumps({"player": player, **faces.candidate_record(c, "kept")},
                            separators=(",", ":")) for c in dataset.kept]
        lines += [json.dumps({"player": player, **faces.candidate_record(c, "rejected")},
                             separators=(",", ":")) for c in dataset.rejected]
        _write_lines(path, lines)
        purity = faces.kept_purity(dataset)
        purity_note = f" purity={purity:.4f}" if purity is not None else ""
        flag = " (low confidence)" if dataset.low_confidence else ""
        print(f"{player}: kept={len(dataset.kept)} rejected={len(dataset.rejected)}"
              f"{purity_note}{flag} -> {path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import HighlightStore, create_app

    store = HighlightStore(args.log, roster=_load_roster(args.roster),
                           lexicon=_load_lexicon(args.lexicon),
                           cfg=_load_config(args.config))
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _parse_depths(text: str) -> list:
    try:
        depths = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("depths must be comma-separated integers")
    if not depths or any(d < 1 for d in depths):
        raise argparse.ArgumentTypeError("depths must be positive integers")
    return depths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanfare",
        description="Curate sports highlights from multimodal marker-event streams.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="curate highlights from an event file")
    run.add_argument("--input", required=True, help="line-delimited JSON event file")
    run.add_argument("--config", help="engine config JSON")
    run.add_argument("--lexicon", help="excitement lexicon file")
    run.add_argument("--roster", help="player roster, one name per line")
    run.add_argument("--out", required=True, help="highlights output (LDJSON)")
    run.add_argument("--figures", action="store_true",
                     help="render a component-breakdown figure next to --out")
    run.add_argument("--format", choices=("text", "json"), default="text")
    run.add_argument("--workers", type=int, default=1,
                     help="parallel workers for multi-channel inputs")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="score a highlights file against a reference")
    ev.add_argument("--input", required=True, help="highlights file from `run`")
    ev.add_argument("--reference", required=True,
                    help="reference LDJSON of {player, hole}")
    ev.add_argument("--depths", type=_parse_depths, default=[10],
                    help="comma-separated depths, e.g. 120,500")
    ev.add_argument("--out", required=True, help="report JSON path")
    ev.add_argument("--format", choices=("text", "json"), default="text")
    ev.set_defaults(func=cmd_eval)

    gen = sub.add_parser("gen", help="generate a synthetic scenario stream")
    gen.add_argument("--spec", required=True, help="scenario spec JSON")
    gen.add_argument("--seed", type=int, help="override the scenario file's seed")
    gen.add_argument("--lexicon", help="lexicon used for ground-truth text scores")
    gen.add_argument("--out", required=True,
                     help="events output; .truth/.refs files land beside it")
    gen.set_defaults(func=cmd_gen)

    fc = sub.add_parser("faces", help="build per-player face datasets")
    fc.add_argument("--input", required=True, help="event file with faces+graphics")
    fc.add_argument("--roster", required=True, help="player roster")
    fc.add_argument("--out-dir", required=True, help="dataset output directory")
    fc.add_argument("--window", type=int, default=faces.HARVEST_WINDOW_MS,
                    help="harvest window after each graphic (ms)")
    fc.add_argument("--min-height", type=int, default=faces.MIN_FACE_HEIGHT_PX,
                    help="minimum face height (px)")
    fc.set_defaults(func=cmd_faces)

    srv = sub.add_parser("serve", help="run the curator service")
    srv.add_argument("--config", help="engine config JSON")
    srv.add_argument("--lexicon", help="excitement lexicon file")
    srv.add_argument("--roster", help="player roster")
    srv.add_argument("--log", default="fanfare_store.jsonl",
                     help="append-only persistence log")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8400)
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
