"""Command implementations. Data goes to files and stdout; diagnostics to stderr."""

import json
import statistics
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, TextIO

from pydantic import BaseModel, ConfigDict, Field

from ..core.config import RUN_CONFIG_FILE, RunConfig
from ..core.error_utils import raise_not_found
from ..core.exceptions import FormatError
from ..core.logging import get_logger, set_phase
from ..core.metrics import get_metrics_collector
from ..corpus.io import read_jsonl, write_jsonl
from ..corpus.models import CaptionRecord, ReferenceRecord, Video, caption_pool
from ..corpus.split import train_test_split
from ..corpus.synthetic import SyntheticSpec, generate_synthetic
from ..corpus.text import build_vocab, tokenize
from ..evaluation.report import (
    EvalReport,
    ReportMetadata,
    VideoScore,
    build_report,
    score_synopsis,
)
from ..models.vlcmu import pseudo_label
from ..pipeline.analysis import event_spans
from ..pipeline.runner import VideoResult, cross_validate, infer_videos, train_model
from ..repositories.corpus import CorpusRepository
from ..repositories.model import ModelRepository

logger = get_logger(__name__)
metrics = get_metrics_collector()

TRAIN_LOG_FILE = "train_log.jsonl"
REPORT_FILE = "eval_report.json"
CROSSVAL_FILE = "crossval_report.json"


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _finish(config: RunConfig, out: Path) -> None:
    """Provenance and metrics next to every output."""
    config.save(out)
    metrics.export(out)


def cmd_synth(spec_path: Path, out: Path, seed: int | None = None) -> RunConfig:
    """Generate a synthetic corpus from a spec file."""
    if not spec_path.exists():
        raise_not_found("spec file", str(spec_path))
    spec = SyntheticSpec.load(spec_path)
    if seed is not None:
        spec = SyntheticSpec.model_validate({**spec.dump(), "seed": seed})
    set_phase("synth")
    videos = generate_synthetic(spec)
    CorpusRepository(out).save_all(videos, spec)
    config = RunConfig.load(synthetic=spec.dump())
    _finish(config, out)
    return config


def cmd_train(config: RunConfig, corpus_dir: Path, out: Path) -> list[dict[str, Any]]:
    """Pretrain, freeze and jointly train.

    Held-out video ids are recorded in the saved run config.
    """
    videos = CorpusRepository(corpus_dir).load()
    train, held_out = train_test_split(videos, config.train.test_fraction)
    run = train_model(
        train,
        held_out,
        config.captioner,
        config.vlcmu,
        config.purport,
        config.train,
    )
    repo = ModelRepository(out)
    repo.save(run.model)
    log = [record.to_json() for record in run.history]
    with (out / TRAIN_LOG_FILE).open("w") as handle:
        for record in log:
            handle.write(json.dumps(record) + "\n")

    spec = run.model.spec
    resolved = config.model_copy(
        update={
            "captioner": spec.captioner,
            "vlcmu": spec.vlcmu,
            "purport": spec.purport,
            "held_out": [video.id for video in held_out],
            "paths": config.paths.model_copy(update={"corpus": str(corpus_dir)}),
        }
    )
    _finish(resolved, out)
    return log


def _score_rows(video: Video, result: VideoResult) -> list[dict[str, Any]]:
    series = result.scores.series
    rows = []
    for shot, caption in zip(video.shots, result.scores.captions):
        rows.append(
            {
                "video": video.id,
                "shot": shot.index,
                "caption": caption.text,
                "alpha": float(series.alpha[shot.index]),
                "eta_bar": pseudo_label(caption.tokens, shot.groundtruth.tokens),
                "beta": float(series.beta[shot.index]),
                "phi": shot.important,
            }
        )
    return rows


def cmd_infer(
    config: RunConfig,
    model_dir: Path,
    corpus_dir: Path,
    out: Path,
    video_id: str | None = None,
    stdout: TextIO | None = None,
) -> dict[str, VideoResult]:
    """Synopses for one video, or for every held-out video of the training run."""
    model = ModelRepository(model_dir).get()
    corpus = CorpusRepository(corpus_dir)
    if video_id is not None:
        videos = [corpus.get(video_id)]
    elif config.held_out:
        videos = [corpus.get(held) for held in config.held_out]
    else:
        videos = corpus.load()

    results = infer_videos(model, videos, config.inference)
    out.mkdir(parents=True, exist_ok=True)
    by_id = {video.id: video for video in videos}
    for vid, result in results.items():
        payload = result.synopsis.to_json()
        payload["granularities"] = [list(r) for r in result.synopsis.granularities]
        _write_json(out / f"synopsis_{vid}.json", payload)
        (out / f"synopsis_{vid}.txt").write_text(result.synopsis.text())
        with (out / f"scores_{vid}.jsonl").open("w") as handle:
            for row in _score_rows(by_id[vid], result):
                handle.write(json.dumps(row) + "\n")
        if stdout is not None:
            stdout.write(json.dumps(result.synopsis.to_json()) + "\n")
    write_captions(out, results)

    resolved = config.model_copy(
        update={
            "paths": config.paths.model_copy(
                update={"corpus": str(corpus_dir), "model": str(model_dir)}
            )
        }
    )
    _finish(resolved, out)
    return results


class SynopsisLine(BaseModel):
    shot: int = Field(..., ge=0)
    sentence: str


class SynopsisDocument(BaseModel):
    """A synopsis JSON file as written by ``infer``."""

    model_config = ConfigDict(extra="ignore")

    video: str
    entries: list[SynopsisLine] = Field(default_factory=list)
    passes: int = 0

    def tokens(self) -> list[str]:
        return [token for entry in self.entries for token in tokenize(entry.sentence)]


def _load_references(path: Path) -> dict[str, list[list[str]]]:
    if path.is_dir():
        path = path / "references.jsonl"
    if not path.exists():
        raise_not_found("references", str(path))
    grouped: dict[str, list[ReferenceRecord]] = {}
    for record in read_jsonl(path, ReferenceRecord):
        grouped.setdefault(record.video, []).append(record)
    return {
        video: [tokenize(r.text) for r in sorted(records, key=lambda r: r.ref)]
        for video, records in grouped.items()
    }


def _load_synopsis(path: Path) -> SynopsisDocument:
    if not path.exists():
        raise_not_found("synopsis", str(path))
    try:
        return SynopsisDocument.model_validate_json(path.read_text())
    except ValueError as e:
        raise FormatError(
            f"unreadable synopsis: {e}", context={"path": str(path)}
        ) from e


def cmd_eval(
    config: RunConfig,
    synopsis_paths: Sequence[Path],
    references: Path,
    out: Path,
    stdout: TextIO | None = None,
) -> EvalReport:
    """Score synopses against every reference of their video, then macro-average."""
    set_phase("eval")
    docs = [_load_synopsis(path) for path in synopsis_paths]
    refs = _load_references(references)
    for doc in docs:
        if doc.video not in refs:
            raise_not_found("video references", doc.video)

    def score(doc: SynopsisDocument) -> tuple[str, VideoScore]:
        return doc.video, score_synopsis(doc.tokens(), refs[doc.video])

    if config.inference.workers > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=config.inference.workers) as pool:
            scored = list(pool.map(score, docs))
    else:
        scored = [score(doc) for doc in docs]

    # Provenance of the synopses: the run config written beside them
    source = synopsis_paths[0].parent / RUN_CONFIG_FILE if synopsis_paths else None
    provenance = RunConfig.read(source.parent) if source and source.exists() else config
    metadata = ReportMetadata(
        seed=provenance.seed,
        config_hash=provenance.config_hash(),
        passes=docs[0].passes if docs else None,
        ablation=provenance.train.ablation,
        references=max((len(refs[doc.video]) for doc in docs), default=0),
    )
    report = build_report(dict(scored), metadata)
    out.mkdir(parents=True, exist_ok=True)
    (out / REPORT_FILE).write_text(report.model_dump_json(indent=2) + "\n")
    if stdout is not None:
        stdout.write(report.model_dump_json() + "\n")

    resolved = config.model_copy(
        update={
            "paths": config.paths.model_copy(
                update={
                    "synopses": [str(p) for p in synopsis_paths],
                    "references": str(references),
                }
            )
        }
    )
    _finish(resolved, out)
    return report


def cmd_inspect(corpus_dir: Path, stdout: TextIO | None = None) -> dict[str, Any]:
    """Corpus statistics for debugging."""
    corpus = CorpusRepository(corpus_dir)
    videos = corpus.load()
    shots = [shot for video in videos for shot in video.shots]
    events = [stop - start for video in videos for start, stop in event_spans(video)]
    stats: dict[str, Any] = {
        "videos": len(videos),
        "shots": len(shots),
        "shots_per_video": {
            "min": min(len(v) for v in videos),
            "max": max(len(v) for v in videos),
        },
        "frames_per_shot": shots[0].frames,
        "feature_dim": shots[0].feature_dim,
        "vocab_size": len(build_vocab(caption_pool(videos))),
        "phi_fraction": sum(s.important for s in shots) / len(shots),
        "distractor_fraction": (
            sum(s.distractor is not None for s in shots) / len(shots)
        ),
        "mean_event_duration": statistics.fmean(events),
        "references_per_video": statistics.fmean(
            len(v.reference_texts) for v in videos
        ),
    }
    spec = corpus.load_spec()
    if spec is not None:
        stats["seed"] = spec.seed
    if stdout is not None:
        stdout.write(json.dumps(stats, indent=2) + "\n")
    return stats


def cmd_crossval(
    config: RunConfig, corpus_dir: Path, out: Path, stdout: TextIO | None = None
) -> EvalReport:
    """Leave-one-video-out training and evaluation over the whole corpus."""
    videos = CorpusRepository(corpus_dir).load()
    report = cross_validate(
        videos,
        config.captioner,
        config.vlcmu,
        config.purport,
        config.train,
        config.inference,
        ReportMetadata(
            seed=config.seed,
            config_hash=config.config_hash(),
            passes=config.inference.passes,
            ablation=config.train.ablation,
            references=max(len(v.reference_texts) for v in videos),
        ),
    )
    out.mkdir(parents=True, exist_ok=True)
    (out / CROSSVAL_FILE).write_text(report.model_dump_json(indent=2) + "\n")
    if stdout is not None:
        stdout.write(report.macro.model_dump_json() + "\n")
    resolved = config.model_copy(
        update={"paths": config.paths.model_copy(update={"corpus": str(corpus_dir)})}
    )
    _finish(resolved, out)
    return report


def write_captions(out: Path, results: dict[str, VideoResult]) -> None:
    """Decoded captions as JSON lines, one file per video."""
    for vid, result in results.items():
        write_jsonl(
            out / f"captions_{vid}.jsonl",
            (
                CaptionRecord(video=vid, shot=p, caption=c.text)
                for p, c in enumerate(result.scores.captions)
            ),
        )
