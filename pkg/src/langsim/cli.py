"""Command-line interface.

Subcommands mirror the analysis pipeline: ``curate`` raw recordings,
``synth`` a ground-truth catalog, ``similarity`` / ``misclass`` /
``tsne`` for the individual analyses, and ``report`` for the combined
document. Every command echoes its resolved configuration and seed in
the output so any result can be regenerated bit-exactly; seeds default
to 0 rather than entropy because reproducibility is the default posture.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audio import CurationConfig, curate_directory
from .classify import SimilarityReport, confusion_profile, top_k
from .errors import LangsimError, MissingLanguageFileError
from .metrics import METRIC_DIRECTIONS, SimilarityScore, cosine_score, fid_matched
from .store import LanguageManifest, load_manifest, load_probability_matrix
from .tsne import ProjectionConfig, tsne

DEFAULT_SEED = 0


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _json_doc(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _ranking_csv(report: SimilarityReport) -> str:
    lines = ["rank,language,value"]
    lines.extend(f"{e.rank},{e.language},{e.value!r}" for e in report.entries)
    return "\n".join(lines) + "\n"


def _report_entries(report: SimilarityReport) -> list[dict]:
    return [{"rank": e.rank, "language": e.language, "value": e.value} for e in report.entries]


def _score_entries(report: SimilarityReport, scores: dict[str, SimilarityScore]) -> list[dict]:
    rows = []
    for e in report.entries:
        score = scores[e.language]
        rows.append(
            {
                "rank": e.rank,
                "language": e.language,
                "value": e.value,
                "sample_count_query": score.sample_count_query,
                "sample_count_target": score.sample_count_target,
                "seed": score.seed,
            }
        )
    return rows


def _emit(report_doc: dict, out: str | None, csv_sections: dict[str, str]) -> None:
    """Write prefix.json plus one CSV mirror per tabular section."""
    if out is None:
        sys.stdout.write(_json_doc(report_doc))
        return
    prefix = Path(out)
    _write_text(prefix.with_suffix(".json"), _json_doc(report_doc))
    for suffix, text in csv_sections.items():
        name = prefix.name + (f"_{suffix}" if suffix else "")
        _write_text(prefix.with_name(name).with_suffix(".csv"), text)


def _similarity_scores(
    manifest: LanguageManifest, metric: str, targets: list[str], seed: int
) -> dict[str, SimilarityScore]:
    query_set = manifest.load_set(manifest.query_language)
    scores: dict[str, SimilarityScore] = {}
    for code in targets:
        target_set = manifest.load_set(code)
        if metric == "cosine":
            scores[code] = cosine_score(query_set, target_set)
        else:
            scores[code] = fid_matched(query_set, target_set, seed)
    return scores


def _resolve_targets(manifest: LanguageManifest, against: str) -> tuple[list[str], int | None]:
    """Expand ``--against`` to target codes and an optional top-k cap."""
    if against == "all":
        return list(manifest.target_languages), None
    if against.startswith("top:"):
        try:
            k = int(against[4:])
        except ValueError:
            raise LangsimError(f"bad --against value {against!r}: top:<k> needs an integer") from None
        if k < 1:
            raise LangsimError(f"bad --against value {against!r}: k must be >= 1")
        return list(manifest.target_languages), k
    codes = [c.strip() for c in against.split(",") if c.strip()]
    if not codes:
        raise LangsimError(f"bad --against value {against!r}")
    known = set(manifest.languages)
    for code in codes:
        if code not in known:
            raise MissingLanguageFileError(code, "<not in manifest>")
    return codes, None


# ---------------------------------------------------------------------------
# Command handlers


def _cmd_curate(args: argparse.Namespace) -> int:
    config = CurationConfig(
        target_rate=args.target_rate,
        silence_threshold_db=args.silence_db,
        frame_ms=args.frame_ms,
        min_duration_s=args.min_dur,
        max_duration_s=args.max_dur,
    )
    manifest = curate_directory(args.in_dir, args.out_dir, config)
    sys.stdout.write(
        f"curated {len(manifest.outputs)} outputs "
        f"({len(manifest.dropped)} dropped, {len(manifest.errors)} errors) "
        f"-> {args.out_dir}\n"
    )
    return 0


def _cmd_similarity(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    targets, cap = _resolve_targets(manifest, args.against)
    scores = _similarity_scores(manifest, args.metric, targets, args.seed)
    direction = METRIC_DIRECTIONS[args.metric]
    k = cap if cap is not None else max(1, len(scores))
    ranking = top_k(scores.values(), k=k, direction=direction, metric=args.metric)
    doc = {
        "command": "similarity",
        "config_echo": {
            "manifest": str(args.manifest),
            "metric": args.metric,
            "against": args.against,
            "seed": args.seed,
            "out": args.out,
        },
        "seed": args.seed,
        "results": {
            "metric": args.metric,
            "direction": direction,
            "query": manifest.query_language,
            "ranking": _score_entries(ranking, scores),
        },
        "warnings": [],
    }
    _emit(doc, args.out, {"": _ranking_csv(ranking)})
    return 0


def _cmd_misclass(args: argparse.Namespace) -> int:
    probs = load_probability_matrix(args.probs_csv)
    profile = confusion_profile(probs, args.true_label)
    ranking = top_k(profile, k=args.top_k, direction="descending")
    doc = {
        "command": "misclass",
        "config_echo": {
            "probs_csv": str(args.probs_csv),
            "true_label": args.true_label,
            "top_k": args.top_k,
            "out": args.out,
        },
        "seed": None,
        "results": {
            "profile": {
                "true_label": profile.true_label,
                "total": profile.total,
                "overall_mr": profile.overall_mr,
                "per_language": profile.per_language,
            },
            "ranking": _report_entries(ranking),
        },
        "warnings": [],
    }
    _emit(doc, args.out, {"": _ranking_csv(ranking)})
    return 0


def _cmd_tsne(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    codes = (
        [c.strip() for c in args.langs.split(",") if c.strip()]
        if args.langs
        else list(manifest.languages)
    )
    sets = [manifest.load_set(code) for code in codes]
    config = ProjectionConfig(perplexity=args.perplexity, iterations=args.iters, seed=args.seed)
    projection = tsne(sets, config)
    lines = ["language,x,y"]
    lines.extend(
        f"{label},{float(x)!r},{float(y)!r}"
        for label, (x, y) in zip(projection.labels, projection.points)
    )
    csv_text = "\n".join(lines) + "\n"
    doc = {
        "command": "tsne",
        "config_echo": {
            "manifest": str(args.manifest),
            "langs": codes,
            "perplexity": config.perplexity,
            "iterations": config.iterations,
            "early_exaggeration": config.early_exaggeration,
            "learning_rate": config.learning_rate,
            "momentum": list(config.momentum),
            "seed": config.seed,
            "out": args.out,
        },
        "seed": config.seed,
        "results": {"final_kl": projection.final_kl, "points": len(projection.labels)},
        "warnings": [],
    }
    prefix = Path(args.out)
    _write_text(prefix.with_suffix(".csv"), csv_text)
    _write_text(prefix.with_suffix(".json"), _json_doc(doc))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    from .synth import build_catalog, load_cluster_specs

    specs, query = load_cluster_specs(args.spec_json)
    manifest = build_catalog(specs, seed=args.seed, out_dir=args.out_dir, query=query)
    sys.stdout.write(
        f"wrote {len(manifest.entries)} embedding sets and manifest -> {args.out_dir}\n"
    )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    targets = list(manifest.target_languages)
    cosine_scores = _similarity_scores(manifest, "cosine", targets, args.seed)
    cosine_ranking = top_k(
        cosine_scores.values(), k=max(1, len(targets)), direction="descending", metric="cosine"
    )

    warnings: list[str] = []
    confusion_doc = None
    if args.probs is not None:
        probs = load_probability_matrix(args.probs)
        profile = confusion_profile(probs, manifest.query_language)
        confusion_doc = {
            "true_label": profile.true_label,
            "total": profile.total,
            "overall_mr": profile.overall_mr,
            "per_language": profile.per_language,
        }
        rate_ranking = top_k(profile, k=10, direction="descending")
        fid_targets = [e.language for e in rate_ranking.entries if e.language in set(targets)]
        if not fid_targets:
            warnings.append("confusion ranking shares no languages with the manifest; "
                            "falling back to cosine top-10 for the distance ranking")
            fid_targets = [e.language for e in cosine_ranking.entries[:10]]
    else:
        fid_targets = [e.language for e in cosine_ranking.entries[:10]]

    fid_scores = _similarity_scores(manifest, "fid", fid_targets, args.seed)
    fid_ranking = top_k(
        fid_scores.values(), k=max(1, len(fid_targets)), direction="ascending", metric="fid"
    )

    cosine_rank_of = {e.language: e.rank for e in cosine_ranking.entries}
    notes = []
    for entry in fid_ranking.entries:
        cos_rank = cosine_rank_of.get(entry.language)
        if cos_rank is not None and cos_rank != entry.rank:
            notes.append(
                f"{entry.language}: distance rank {entry.rank} vs cosine rank {cos_rank}"
            )

    doc = {
        "command": "report",
        "config_echo": {
            "manifest": str(args.manifest),
            "probs": None if args.probs is None else str(args.probs),
            "seed": args.seed,
            "out": args.out,
        },
        "seed": args.seed,
        "results": {
            "query": manifest.query_language,
            "cosine_ranking": _score_entries(cosine_ranking, cosine_scores),
            "fid_ranking": _score_entries(fid_ranking, fid_scores),
            "confusion": confusion_doc,
            "ranking_notes": notes,
        },
        "warnings": warnings,
    }
    sections = {"cosine": _ranking_csv(cosine_ranking), "fid": _ranking_csv(fid_ranking)}
    _emit(doc, args.out, sections)
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="langsim",
        description="Quantify acoustic similarity between a query language and a "
        "catalog of reference languages in a shared speech-embedding space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curate", help="prepare raw WAV recordings for embedding extraction")
    p.add_argument("in_dir", help="directory of input WAV files")
    p.add_argument("out_dir", help="directory for curated outputs and manifest")
    p.add_argument("--target-rate", type=int, default=16000, dest="target_rate",
                   help="output sample rate in Hz (default 16000)")
    p.add_argument("--silence-db", type=float, default=-40.0, dest="silence_db",
                   help="silence gate in dBFS (default -40)")
    p.add_argument("--frame-ms", type=float, default=20.0, dest="frame_ms",
                   help="RMS frame length in ms (default 20)")
    p.add_argument("--min-dur", type=float, default=10.0, dest="min_dur",
                   help="minimum output duration in seconds (default 10)")
    p.add_argument("--max-dur", type=float, default=15.0, dest="max_dur",
                   help="maximum output duration in seconds (default 15)")
    p.set_defaults(handler=_cmd_curate)

    p = sub.add_parser("similarity", help="rank catalog languages by similarity to the query")
    p.add_argument("manifest", help="language manifest file")
    p.add_argument("--metric", choices=("cosine", "fid"), required=True)
    p.add_argument("--against", default="all",
                   help="'all', 'top:<k>', or comma-separated language codes (default all)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help="subsampling seed (default 0)")
    p.add_argument("--out", default=None,
                   help="output prefix; writes <out>.json and <out>.csv (default stdout)")
    p.set_defaults(handler=_cmd_similarity)

    p = sub.add_parser("misclass", help="confusion profile from a probability CSV")
    p.add_argument("probs_csv", help="CSV with language-code header and probability rows")
    p.add_argument("--true-label", required=True, dest="true_label")
    p.add_argument("--top-k", type=int, default=10, dest="top_k",
                   help="entries in the confusion ranking (default 10)")
    p.add_argument("--out", default=None,
                   help="output prefix; writes <out>.json and <out>.csv (default stdout)")
    p.set_defaults(handler=_cmd_misclass)

    p = sub.add_parser("tsne", help="2-D projection of catalog embeddings")
    p.add_argument("manifest", help="language manifest file")
    p.add_argument("--langs", default=None,
                   help="comma-separated language codes (default: all in manifest)")
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True,
                   help="output prefix; writes <out>.csv and <out>.json")
    p.set_defaults(handler=_cmd_tsne)

    p = sub.add_parser("synth", help="generate a synthetic Gaussian catalog")
    p.add_argument("spec_json", help="cluster spec document")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("report", help="combined cosine/distance/confusion report")
    p.add_argument("manifest", help="language manifest file")
    p.add_argument("--probs", default=None,
                   help="optional probability CSV for the confusion section")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None,
                   help="output prefix; writes <out>.json plus CSV mirrors (default stdout)")
    p.set_defaults(handler=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (LangsimError, OSError) as exc:
        sys.stderr.write(f"langsim {args.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
