#!/usr/bin/env python3
"""Build a small seeded backend and serve it, for the UI end-to-end tests.

Generates a synthetic tone corpus, trains the classifier, indexes every
clip through the pipeline, writes a matching embedding fixture, and serves
the search API on the requested port.
"""

import argparse
from pathlib import Path

import uvicorn

from nels import classifier, pipeline, synth, textmap
from nels.crawler import CrawlJob, LocalCorpusSource
from nels.index import ContentIndex
from nels.service import AppState, create_app

EMBEDDINGS = """\
tone440 1 0 0 0
tone1000 0 1 0 0
tone3000 0 0 1 0
white 0 0 0 1
noise 0 0 0 1
"""


def build_state(workdir: Path) -> AppState:
    corpus = workdir / "corpus"
    manifest = synth.generate_corpus(corpus, clips_per_class=6, seed=2, sidecars=True)
    model = classifier.train(manifest, classifier.Hyper(epochs=200), seed=7)

    source = LocalCorpusSource(corpus)
    index = ContentIndex(workdir / "index.ndjson")
    jobs = [CrawlJob.for_class(c, limit=10) for c in model.class_list]
    stats = pipeline.run_pipeline(jobs, source, model, index)
    print(f"seeded {stats.segments_indexed} segments", flush=True)

    embeddings_path = workdir / "vectors.txt"
    embeddings_path.write_text(EMBEDDINGS, encoding="utf-8")
    return AppState(
        index=index,
        model=model,
        embeddings=textmap.load_embeddings(embeddings_path),
        source=source,
    )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, required=True)
    parser.add_argument("--dir", required=True, help="Scratch directory for corpus/model/index.")
    args = parser.parse_args()

    workdir = Path(args.dir)
    workdir.mkdir(parents=True, exist_ok=True)
    app = create_app(build_state(workdir))
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
