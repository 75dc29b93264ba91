"""Command-line entry points for the sound-indexing toolkit."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from nels import audio, classifier, evaluation, selftrain, textmap
from nels.classifier import Hyper, Model
from nels.config import load_config
from nels.crawler import CrawlJob, crawl_once
from nels.index import ContentIndex
from nels.pipeline import run_pipeline
from nels.service import build_state, parse_source
from nels.vocab import Vocabulary


@click.group()
def main():
    """NELS: crawl, hear & learn, index, search."""


def _load_labels(labels: str, vocab: str | None) -> Vocabulary:
    if labels == "all":
        if vocab is None:
            raise click.UsageError("--labels all requires --vocab <file>")
        return Vocabulary.load(vocab)
    return Vocabulary.load(labels)


@main.command()
@click.option("--labels", required=True, help="Vocabulary CSV (label,dataset) or 'all'.")
@click.option("--vocab", type=click.Path(exists=True), help="Vocabulary used with --labels all.")
@click.option("--source", "source_spec", required=True, help="local:<dir> or http:<url>.")
@click.option("--limit", default=10, show_default=True, help="Max admitted items per label.")
@click.option("--out", type=click.Path(), help="Write NDJSON here instead of stdout.")
def crawl(labels, vocab, source_spec, limit, out):
    """Crawl one batch for every label (round-robin) and emit metadata."""
    vocabulary = _load_labels(labels, vocab)
    source = parse_source(source_spec)
    sink = open(out, "w", encoding="utf-8") if out else sys.stdout
    try:
        total = 0
        for sound_class in vocabulary:
            job = CrawlJob.for_class(sound_class, limit)
            for item in crawl_once(job, source):
                payload = item.record.to_json_dict()
                payload["crawl_label"] = item.crawl_label
                payload["audio_uri"] = item.audio_uri
                sink.write(json.dumps(payload, ensure_ascii=False) + "\n")
                total += 1
        click.echo(f"crawled {total} admitted items", err=True)
    finally:
        if out:
            sink.close()


@main.command()
@click.argument("audio_file", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Matrix file to write.")
def features(audio_file, out):
    """Log-mel features of one audio file (header: melspec 60 T)."""
    samples, rate = audio.load_wav(audio_file)
    waveform = audio.canonicalize_audio(samples, rate)
    matrix = audio.log_mel_of_samples(waveform.samples)
    audio.write_matrix_file(matrix, out)
    click.echo(f"wrote {matrix.mel_bands} x {matrix.frames} matrix to {out}", err=True)


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", default=7, show_default=True)
@click.option("--epochs", default=Hyper.epochs, show_default=True)
@click.option("--lr", default=Hyper.learning_rate, show_default=True)
@click.option("--l2", default=Hyper.l2, show_default=True)
@click.option("--vocab", type=click.Path(exists=True), help="Restrict labels to a vocabulary CSV.")
def train(manifest, out, seed, epochs, lr, l2, vocab):
    """Train the reference classifier from a dataset manifest."""
    vocabulary = Vocabulary.load(vocab) if vocab else None
    model = classifier.train(
        manifest,
        Hyper(learning_rate=lr, epochs=epochs, l2=l2),
        seed=seed,
        vocabulary=vocabulary,
    )
    model.save(out)
    final_loss = model.train_meta.loss_history[-1]
    click.echo(f"trained {model.n_classes} classes, final loss {final_loss:.6f}, saved {out}")


@main.command(name="selftrain")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--pool", "pool_dir", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True), help="Base labeled manifest.")
@click.option("--eval", "eval_manifest", required=True, type=click.Path(exists=True), help="Held-out manifest.")
@click.option("--rounds", default=5, show_default=True)
@click.option("--tau", default=0.85, show_default=True, help="Pseudo-label confidence threshold.")
@click.option("--patience", default=3, show_default=True)
@click.option("--out", type=click.Path(), help="Where to save the final accepted model.")
def selftrain_cmd(model_path, pool_dir, manifest, eval_manifest, rounds, tau, patience, out):
    """Self-train on a directory of unlabeled audio."""
    model = Model.load(model_path)
    base = classifier.load_manifest(manifest)
    eval_split = classifier.load_manifest(eval_manifest)
    pool = []
    for wav in sorted(Path(pool_dir).glob("*.wav")):
        samples, rate = audio.load_wav(wav)
        waveform = audio.canonicalize_audio(samples, rate)
        for seg in audio.segment_waveform(waveform, wav.stem):
            pool.append(audio.log_mel_features(seg))
    cfg = selftrain.SelfTrainConfig(
        eval_split=eval_split,
        confidence_threshold=tau,
        max_rounds=rounds,
        plateau_patience=patience,
    )
    reports = selftrain.run_self_training(cfg, base, pool, model)
    for r in reports:
        status = "accepted" if r.accepted else "rejected"
        click.echo(
            f"round {r.round_index}: pseudo={r.pseudo_count} "
            f"precision {r.precision_before:.4f} -> {r.precision_after:.4f} [{status}]"
        )
    if out:
        selftrain.final_model(model, reports).save(out)
        click.echo(f"saved final model to {out}")


@main.group(name="index")
@click.option("--path", "index_path", envvar="NELS_INDEX_PATH", default="index.ndjson",
              show_default=True, help="Index log file.")
@click.pass_context
def index_group(ctx, index_path):
    """Inspect or maintain an index log."""
    ctx.obj = index_path


@index_group.command()
@click.pass_context
def stats(ctx):
    """Counts, indexed hours, per-class histogram."""
    with ContentIndex(ctx.obj) as idx:
        click.echo(json.dumps(idx.stats(), indent=2))


@index_group.command()
@click.option("--class", "class_label", required=True)
@click.option("--k", default=40, show_default=True)
@click.pass_context
def topk(ctx, class_label, k):
    """Highest-confidence segments of one class."""
    with ContentIndex(ctx.obj) as idx:
        for entry in idx.query_by_class_topk(class_label, k):
            click.echo(f"{entry.segment_id}\t{entry.confidence:.6f}\t{entry.metadata.title}")


@index_group.command()
@click.pass_context
def compact(ctx):
    """Rewrite the log to one record per live segment."""
    with ContentIndex(ctx.obj) as idx:
        idx.compact()
        click.echo(f"compacted {len(idx)} entries")


@main.command(name="map")
@click.option("--query", required=True)
@click.option("--embeddings", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--classes", "classes_path", required=True, type=click.Path(exists=True),
              help="Vocabulary CSV of candidate classes.")
def map_cmd(query, emb_path, classes_path):
    """Map free text to the closest sound class."""
    vocab = textmap.load_embeddings(emb_path)
    classes = list(Vocabulary.load(classes_path))
    mapping = textmap.map_query(vocab, classes, query)
    if mapping.matched_class is None:
        click.echo("no class above threshold")
    else:
        click.echo(f"{mapping.matched_class.label}\t{mapping.similarity:.4f}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def discover(in_path, out_path):
    """Discover candidate sound labels from a text corpus."""
    text = Path(in_path).read_text(encoding="utf-8")
    candidates = textmap.discover_phrases(text)
    Path(out_path).write_text("\n".join(candidates) + ("\n" if candidates else ""), encoding="utf-8")
    click.echo(f"found {len(candidates)} candidate labels", err=True)


@main.command(name="eval")
@click.option("--path", "index_path", envvar="NELS_INDEX_PATH", default="index.ndjson", show_default=True)
@click.option("--k", default=40, show_default=True)
@click.option("--classes", "classes_spec", default="all", show_default=True,
              help="'all' or a vocabulary CSV.")
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_cmd(index_path, k, classes_spec, out_path):
    """Dual-reference precision report over the index."""
    with ContentIndex(index_path) as idx:
        if classes_spec == "all":
            labels = idx.class_labels()
        else:
            labels = Vocabulary.load(classes_spec).labels
        report = evaluation.compare_references(idx, labels, k=k)
        evaluation.write_report_csv(report, out_path)
    mean = "n/a" if report.mean_abs_delta is None else f"{report.mean_abs_delta:.4f}"
    click.echo(f"wrote {len(report.rows)} classes to {out_path}; mean |delta| = {mean}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def serve(config_path):
    """Run the search service."""
    from nels.service import serve as run_server

    run_server(load_config(config_path))


@main.command(name="pipeline")
@click.option("--labels", required=True, help="Vocabulary CSV (label,dataset) or 'all'.")
@click.option("--vocab", type=click.Path(exists=True))
@click.option("--source", "source_spec", required=True)
@click.option("--limit", default=10, show_default=True)
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--index-path", default="index.ndjson", show_default=True, envvar="NELS_INDEX_PATH")
@click.option("--workers", default=2, show_default=True)
def pipeline_cmd(labels, vocab, source_spec, limit, model_path, index_path, workers):
    """Crawl, extract features, classify and index in one pass."""
    vocabulary = _load_labels(labels, vocab)
    source = parse_source(source_spec)
    model = Model.load(model_path)
    jobs = [CrawlJob.for_class(c, limit) for c in vocabulary]
    with ContentIndex(index_path) as idx:
        stats_out = run_pipeline(jobs, source, model, idx, feature_workers=workers)
    click.echo(
        f"crawled {stats_out.media_crawled} media, indexed {stats_out.segments_indexed} segments "
        f"(skipped {stats_out.crawl_counters.inadmissible} inadmissible, "
        f"{stats_out.crawl_counters.failed + stats_out.failed_media} failed)"
    )


if __name__ == "__main__":
    main()
