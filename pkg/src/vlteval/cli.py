"""Command-line entry point: reproducible pipelines over manifest fixtures.

Subcommands mirror the evaluation stages (ingest -> score -> cluster ->
calibrate -> dascore -> report, with judge and audit alongside) so any
stage's artifact can be inspected or substituted. All outputs are
byte-identical across reruns with unchanged inputs.

Exit codes: 0 ok, 1 validation/data, 2 I/O, 3 upstream artifact missing.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click

from . import __version__, audit as audit_mod, calibrate as cal, density, extmetrics, judge as judge_mod, lexmetrics, report as report_mod
from .corpus import (
    DEFAULT_LANGUAGE_TIERS, Corpus, LanguageTierMap, ManifestError, load_manifest, validate,
)
from .vectors import MetricVector, vector_from_dict

EXIT_OK = 0
EXIT_DATA = 1
EXIT_IO = 2
EXIT_UPSTREAM = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _config_hash(params: dict) -> str:
    canonical = json.dumps(params, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _provenance(params: dict) -> dict:
    return {"config_hash": _config_hash(params), "tool_version": __version__}


def _provenance_line(params: dict) -> str:
    p = _provenance(params)
    return f"provenance config={p['config_hash']} version={p['tool_version']}"


def _load_corpus(path) -> Corpus:
    if not os.path.exists(path):
        _fail(EXIT_IO, f"manifest not found: {path}")
    try:
        return load_manifest(path)
    except ManifestError as exc:
        _fail(EXIT_DATA, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))


def _require_artifact(path, producer: str):
    if not os.path.exists(path):
        _fail(EXIT_UPSTREAM, f"missing artifact {path}; run `vlteval {producer}` first")
    return path


def _write_jsonl(path, rows: list[dict], params: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"_provenance": _provenance(params)}, sort_keys=True) + "\n")
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def _read_jsonl(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "_provenance" in obj:
                continue
            rows.append(obj)
    return rows


def _scored_pairs(corpus: Corpus, systems: tuple[str, ...], langs: tuple[str, ...]):
    for sample in corpus:
        for system in sorted(sample.hypotheses):
            if systems and system not in systems:
                continue
            for lang in sorted(sample.hypotheses[system]):
                if langs and lang not in langs:
                    continue
                yield sample, system, lang


def _csv_option(value: str | None) -> tuple[str, ...]:
    return tuple(v for v in (value or "").split(",") if v)


@click.group()
@click.version_option(__version__)
def main():
    """Density-aware evaluation toolkit for vision-language translation."""


@main.command()
@click.option("--manifest", required=True, type=click.Path())
def ingest(manifest):
    """Load and validate a manifest; exit 0 iff clean."""
    corpus = _load_corpus(manifest)
    report = validate(corpus)
    click.echo(f"loaded {len(corpus)} samples from {manifest}")
    for issue in report.issues:
        click.echo(f"issue: sample {issue.sample_id}: {issue.description}")
    if not report.ok:
        _fail(EXIT_DATA, f"{len(report.issues)} validation issue(s)")
    click.echo("validation clean")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--systems", default=None, help="Comma-separated system filter.")
@click.option("--langs", default=None, help="Comma-separated target-language filter.")
@click.option("--scores", "score_files", multiple=True,
              help="External score file as metric=path[:scale], e.g. bsf1=bs.jsonl:0-1.")
@click.option("--adapter", "adapters", multiple=True,
              help="Scoring adapter as metric=command line, e.g. comet=python -m scorer.")
@click.option("--jobs", default=1, show_default=True)
@click.option("--out", required=True, type=click.Path())
def score(manifest, systems, langs, score_files, adapters, jobs, out):
    """Compute native lexical metrics, merge external scores, emit vectors."""
    params = {
        "cmd": "score", "manifest": manifest, "systems": systems, "langs": langs,
        "scores": sorted(score_files), "adapter": sorted(adapters), "jobs": jobs,
    }
    corpus = _load_corpus(manifest)
    systems_f = _csv_option(systems)
    langs_f = _csv_option(langs)
    pairs = list(_scored_pairs(corpus, systems_f, langs_f))

    def score_one(pair):
        sample, system, lang = pair
        return lexmetrics.score_pair(sample, system, lang)

    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                native = list(pool.map(score_one, pairs))
        else:
            native = [score_one(p) for p in pairs]
    except KeyError as exc:
        _fail(EXIT_DATA, str(exc))

    tables: dict[str, extmetrics.ScoreTable] = {}
    for spec in score_files:
        try:
            metric, rest = spec.split("=", 1)
            path, _, scale = rest.partition(":")
            scale = scale or extmetrics.SCALE_0_100
            if not os.path.exists(path):
                _fail(EXIT_IO, f"score file not found: {path}")
            tables[metric] = extmetrics.load_scores(path, metric, scale)
        except extmetrics.ScoreFileError as exc:
            _fail(EXIT_DATA, str(exc))
        except ValueError as exc:
            _fail(EXIT_DATA, f"bad --scores spec {spec!r}: {exc}")

    for spec in adapters:
        try:
            metric, command = spec.split("=", 1)
        except ValueError:
            _fail(EXIT_DATA, f"bad --adapter spec {spec!r}")
        batch = [
            {"id": sample.id, "system": system, "lang": lang,
             "src": sample.source_text,
             "hyp": sample.hypotheses[system][lang],
             "ref": sample.references[lang]}
            for sample, system, lang in pairs
            if lang in sample.references
        ]
        try:
            tables[metric] = extmetrics.run_adapter(
                extmetrics.AdapterSpec(command=tuple(command.split())), batch, metric)
        except extmetrics.AdapterError as exc:
            _fail(EXIT_DATA, str(exc))

    for table in tables.values():
        problems = extmetrics.validate_table(table)
        if problems:
            _fail(EXIT_DATA, "; ".join(problems))

    vectors = extmetrics.merge_into_vectors(native, tables)
    vectors.sort(key=lambda v: v.key)
    os.makedirs(out, exist_ok=True)
    _write_jsonl(os.path.join(out, "vectors.jsonl"), [v.to_dict() for v in vectors], params)
    click.echo(f"wrote {len(vectors)} metric vectors to {out}/vectors.jsonl")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--k", default=density.DEFAULT_K, show_default=True)
@click.option("--seed", default=density.DEFAULT_SEED, show_default=True)
@click.option("--out", required=True, type=click.Path())
def cluster(manifest, k, seed, out):
    """Fit the information-density K-means model and assign tiers."""
    params = {"cmd": "cluster", "manifest": manifest, "k": k, "seed": seed}
    corpus = _load_corpus(manifest)
    try:
        points = density.corpus_points(corpus)
        model = density.fit(points, k=k, seed=seed)
    except ValueError as exc:
        _fail(EXIT_DATA, str(exc))
    os.makedirs(out, exist_ok=True)
    density.save_model(model, os.path.join(out, "density_model.json"))
    tiers = density.assign_corpus(model, corpus)
    rows = [{"id": sid, "tier": tiers[sid]} for sid in sorted(tiers)]
    _write_jsonl(os.path.join(out, "tiers.jsonl"), rows, params)
    click.echo(f"fitted k={k} density model over {len(points)} samples")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
def calibrate(manifest, out):
    """Derive per-tier weights from metric-human correlations."""
    params = {"cmd": "calibrate", "manifest": manifest}
    corpus = _load_corpus(manifest)
    vectors_path = _require_artifact(os.path.join(out, "vectors.jsonl"), "score")
    model_path = _require_artifact(os.path.join(out, "density_model.json"), "cluster")
    vectors = [vector_from_dict(r) for r in _read_jsonl(vectors_path)]
    model = density.load_model(model_path)
    tiers = density.assign_corpus(model, corpus)
    try:
        rows = cal.derive_correlations(vectors, cal.human_overall_map(corpus), tiers)
        profile = cal.profile_from_correlations(rows)
    except ValueError as exc:
        _fail(EXIT_DATA, str(exc))
    cal.save_profile(profile, os.path.join(out, "weights.json"))
    with open(os.path.join(out, "correlations.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {_provenance_line(params)}\n")
        for row in cal.correlations_to_csv_rows(rows):
            fh.write(",".join(row) + "\n")
    click.echo(f"calibrated weights for {len(rows)} tiers")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--weights", default=None, type=click.Path(),
              help="Weight profile JSON; mutually exclusive with --calibrate-from-human.")
@click.option("--calibrate-from-human", is_flag=True, default=False,
              help="Derive weights from this corpus's human ratings.")
@click.option("--out", required=True, type=click.Path())
def dascore(manifest, weights, calibrate_from_human, out):
    """Compute DA scores for every vector, with tier-specific weights."""
    if (weights is None) == (not calibrate_from_human):
        _fail(EXIT_DATA,
              "exactly one of --weights or --calibrate-from-human must be given")
    params = {"cmd": "dascore", "manifest": manifest, "weights": weights,
              "calibrate_from_human": calibrate_from_human}
    corpus = _load_corpus(manifest)
    vectors_path = _require_artifact(os.path.join(out, "vectors.jsonl"), "score")
    model_path = _require_artifact(os.path.join(out, "density_model.json"), "cluster")
    vectors = [vector_from_dict(r) for r in _read_jsonl(vectors_path)]
    model = density.load_model(model_path)
    if weights is not None:
        if not os.path.exists(weights):
            _fail(EXIT_IO, f"weights file not found: {weights}")
        profile = cal.load_profile(weights)
    else:
        tiers = density.assign_corpus(model, corpus)
        try:
            rows = cal.derive_correlations(vectors, cal.human_overall_map(corpus), tiers)
            profile = cal.profile_from_correlations(rows)
        except ValueError as exc:
            _fail(EXIT_DATA, str(exc))
    try:
        results = cal.score_corpus(corpus, vectors, model, profile)
    except (KeyError, ValueError) as exc:
        _fail(EXIT_DATA, str(exc))
    _write_jsonl(os.path.join(out, "da_results.jsonl"),
                 [r.to_dict() for r in results], params)
    click.echo(f"scored {len(results)} pairs")


@main.command(name="judge")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--systems", default=None)
@click.option("--langs", default=None)
@click.option("--provider-id", default="replay")
@click.option("--model", default="replay")
@click.option("--base-url", default="")
@click.option("--replay-cache", default=None, type=click.Path(),
              help="JSONL response cache; with no --base-url the run is offline.")
@click.option("--jobs", default=4, show_default=True)
@click.option("--out", required=True, type=click.Path())
def judge_cmd(manifest, systems, langs, provider_id, model, base_url,
              replay_cache, jobs, out):
    """Judge hypotheses on the four quality dimensions (cached/replayable)."""
    params = {"cmd": "judge", "manifest": manifest, "systems": systems, "langs": langs,
              "provider_id": provider_id, "model": model, "base_url": base_url,
              "replay_cache": replay_cache}
    corpus = _load_corpus(manifest)
    if replay_cache is not None and not os.path.exists(replay_cache):
        _fail(EXIT_IO, f"replay cache not found: {replay_cache}")
    provider = judge_mod.ProviderConfig(
        provider_id=provider_id, model=model, base_url=base_url,
        concurrency=jobs, offline=not base_url,
    )
    cache = judge_mod.JudgeCache(replay_cache)
    pairs = list(_scored_pairs(corpus, _csv_option(systems), _csv_option(langs)))
    requests_ = [
        judge_mod.JudgeRequest(
            source_text=sample.source_text,
            candidate_text=sample.hypotheses[system][lang],
            source_lang=sample.source_lang,
            target_lang=lang,
        )
        for sample, system, lang in pairs
    ]
    outcomes = judge_mod.judge_batch(requests_, provider, cache)
    rows = []
    failures = 0
    for (sample, system, lang), outcome in zip(pairs, outcomes):
        if outcome.error is not None:
            failures += 1
            rows.append({"id": sample.id, "system": system, "lang": lang,
                         "error": outcome.error})
            continue
        resp = outcome.response
        rows.append({
            "id": sample.id, "system": system, "lang": lang,
            **{d: resp.scores[d] for d in judge_mod.DIMENSIONS},
            "overall": resp.overall,
            "low_dimensions": judge_mod.low_scoring_dimensions(resp),
        })
    rows.sort(key=lambda r: (r["id"], r["system"], r["lang"]))
    os.makedirs(out, exist_ok=True)
    _write_jsonl(os.path.join(out, "judge_scores.jsonl"), rows, params)
    click.echo(f"judged {len(rows) - failures}/{len(rows)} pairs")
    if failures:
        _fail(EXIT_DATA, f"{failures} request(s) failed")


@main.command(name="audit")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
def audit_cmd(manifest, out):
    """Summarize the OCR-correction error taxonomy."""
    params = {"cmd": "audit", "manifest": manifest}
    corpus = _load_corpus(manifest)
    try:
        summary = audit_mod.summarize(corpus)
    except ValueError as exc:
        _fail(EXIT_DATA, str(exc))
    os.makedirs(out, exist_ok=True)
    payload = summary.to_json()
    payload["provenance"] = _provenance(params)
    with open(os.path.join(out, "audit.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    audit_mod.write_csv(summary, os.path.join(out, "audit.csv"))
    click.echo(f"audited {summary.total_regions} regions over {summary.total_images} images")


@main.command(name="report")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--group-by", "group_bys", multiple=True,
              default=("dataset", "density_tier", "system"), show_default=True)
@click.option("--tiermap", default=None, type=click.Path(),
              help="JSON {lang: High|Medium|Low}; defaults to the built-in map.")
@click.option("--out", required=True, type=click.Path())
def report_cmd(manifest, group_bys, tiermap, out):
    """Emit aggregate tables and the human-vs-DA-vs-mean distribution CSV."""
    params = {"cmd": "report", "manifest": manifest, "group_by": sorted(group_bys),
              "tiermap": tiermap}
    corpus = _load_corpus(manifest)
    results_path = _require_artifact(os.path.join(out, "da_results.jsonl"), "dascore")
    results = []
    for row in _read_jsonl(results_path):
        results.append(cal.DAResult(
            id=row["id"], system=row["system"], lang=row["lang"], tier=row["tier"],
            vector=vector_from_dict(row), da_score=row["da_score"],
            arithmetic_mean=row["arithmetic_mean"],
            weights_renormalized=row["weights_renormalized"], dataset=row["dataset"],
        ))
    if tiermap is not None:
        with open(tiermap, encoding="utf-8") as fh:
            tier_map = LanguageTierMap(json.load(fh))
    else:
        tier_map = LanguageTierMap(DEFAULT_LANGUAGE_TIERS)

    prov_line = _provenance_line(params)
    prov = _provenance(params)
    try:
        for group_by in group_bys:
            table = report_mod.aggregate(results, group_by, tier_map)
            base = os.path.join(out, f"report_{group_by}")
            report_mod.write_table_csv(table, base + ".csv", prov_line)
            report_mod.write_table_json(table, base + ".json", prov)
    except (KeyError, ValueError) as exc:
        _fail(EXIT_DATA, str(exc))
    rows, skipped = report_mod.export_distributions(results, cal.human_overall_map(corpus))
    report_mod.write_distributions_csv(
        rows, skipped, os.path.join(out, "distributions.csv"), prov_line)
    click.echo(f"wrote {len(group_bys)} tables and {len(rows)} distribution rows")


if __name__ == "__main__":
    main()
