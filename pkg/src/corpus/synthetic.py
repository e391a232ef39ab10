"""Seeded synthetic corpora of segmented daily-activity videos.

Each video is a sequence of latent events. An event has a type (its activity)
and one of that type's caption templates (its sub-activity); every shot of the
event shares the same feature mean and caption, so per-frame noise is the only
difference between them.
"""

import json
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.logging import get_logger
from ..diffcore.rng import SplitMix64
from .models import Shot, Video
from .text import Caption

logger = get_logger(__name__)

# Daily activities with short, mostly disjoint caption templates
DEFAULT_LEXICON: dict[str, list[str]] = {
    "driving": ["i drive the car", "i park the car"],
    "shopping": ["i push a shopping cart", "i pay at the register"],
    "cooking": ["i cook in the kitchen", "i chop vegetables"],
    "dining": ["i eat lunch with friends", "i drink coffee"],
    "studying": ["i read a book", "i write notes"],
    "walking": ["i walk down the street", "i cross the road"],
    "cleaning": ["i wash the dishes", "i sweep the floor"],
    "talking": ["i talk on the phone", "i chat with a friend"],
    "exercising": ["i run on a treadmill", "i lift weights"],
    "watching": ["i watch television", "i sit on the couch"],
}

TEMPLATE_OFFSET_SCALE = 0.5


def default_templates(event_types: int) -> dict[str, list[str]]:
    """The first ``event_types`` activities, padded with generated ones."""
    names = list(DEFAULT_LEXICON)[:event_types]
    templates = {name: list(DEFAULT_LEXICON[name]) for name in names}
    for e in range(len(names), event_types):
        templates[f"activity{e}"] = [f"i do task{e} here", f"i finish job{e} now"]
    return templates


class SyntheticSpec(BaseModel):
    """Generator parameters; only ``seed`` is required, the rest default."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(..., ge=0, lt=2**64)
    videos: int = Field(25, ge=1)
    shots_per_video: int = Field(60, ge=1)
    event_types: int = Field(8, ge=2)
    feature_dim: int = Field(32, ge=1)
    frames_per_shot: int = Field(6, ge=1)
    mean_event_duration: float = Field(5.0, ge=1.0)
    noise_scale: float = Field(0.3, ge=0.0)
    corruption_rate: float = Field(0.3, ge=0.0, le=1.0)
    important_fraction: float = Field(0.3, ge=0.0, le=1.0)
    references: int = Field(3, ge=1)
    templates: dict[str, list[str]] | None = None

    @field_validator("templates")
    @classmethod
    def validate_templates(
        cls, v: dict[str, list[str]] | None
    ) -> dict[str, list[str]] | None:
        """Every event type needs at least one non-empty template."""
        if v is None:
            return v
        for name, options in v.items():
            if not options or any(not Caption.from_text(t).tokens for t in options):
                raise ValueError(f"event type {name!r} needs non-empty templates")
        return v

    @model_validator(mode="after")
    def resolve_templates(self) -> "SyntheticSpec":
        """Inject the documented default templates and check the count."""
        if self.templates is None:
            self.templates = default_templates(self.event_types)
        if len(self.templates) < self.event_types:
            raise ValueError(
                f"templates define {len(self.templates)} event types, "
                f"event_types is {self.event_types}"
            )
        return self

    def event_names(self) -> list[str]:
        assert self.templates is not None
        return list(self.templates)[: self.event_types]

    @classmethod
    def load(cls, path: Path) -> "SyntheticSpec":
        return cls.model_validate_json(path.read_text())

    def dump(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(self.dump(), indent=2) + "\n")


def generate_synthetic(spec: SyntheticSpec) -> list[Video]:
    """Generate ``spec.videos`` videos, fully determined by ``spec.seed``."""
    rng = SplitMix64(spec.seed)
    names = spec.event_names()
    assert spec.templates is not None
    templates = [[Caption.from_text(t) for t in spec.templates[n]] for n in names]

    type_means = rng.normal((spec.event_types, spec.feature_dim))
    template_means = [
        [
            type_means[e] + rng.normal((spec.feature_dim,), TEMPLATE_OFFSET_SCALE)
            for _ in templates[e]
        ]
        for e in range(spec.event_types)
    ]

    videos = []
    for v in range(spec.videos):
        video = _generate_video(
            f"v{v:03d}", spec, rng.fork(), templates, template_means
        )
        videos.append(video)

    important = sum(sum(video.importance) for video in videos)
    logger.info(
        "Synthetic corpus generated",
        videos=len(videos),
        shots=sum(len(video) for video in videos),
        important_shots=important,
        seed=spec.seed,
    )
    return videos


def _generate_video(
    video_id: str,
    spec: SyntheticSpec,
    rng: SplitMix64,
    templates: list[list[Caption]],
    template_means: list[list[np.ndarray]],
) -> Video:
    # (event type, template index, first shot, important)
    events: list[tuple[int, int, int, bool]] = []
    position = 0
    previous = -1
    while position < spec.shots_per_video:
        if previous < 0:
            event_type = rng.integer(spec.event_types)
        else:
            event_type = rng.integer(spec.event_types - 1)
            if event_type >= previous:
                event_type += 1
        template = rng.integer(len(templates[event_type]))
        duration = rng.geometric(1.0 / spec.mean_event_duration)
        important = rng.random() < spec.important_fraction
        events.append((event_type, template, position, important))
        position += duration
        previous = event_type

    # Every video keeps at least one important event so references are non-empty
    if not any(event[3] for event in events):
        first = events[0]
        events[0] = (first[0], first[1], first[2], True)

    shots = []
    for n, (event_type, template, start, important) in enumerate(events):
        stop = events[n + 1][2] if n + 1 < len(events) else spec.shots_per_video
        stop = min(stop, spec.shots_per_video)
        mean = template_means[event_type][template]
        caption = templates[event_type][template]
        for index in range(start, stop):
            noise = rng.normal(
                (spec.frames_per_shot, spec.feature_dim), spec.noise_scale
            )
            distractor = None
            if rng.random() < spec.corruption_rate:
                other = rng.integer(spec.event_types - 1)
                if other >= event_type:
                    other += 1
                distractor = rng.choice(templates[other])
            shots.append(
                Shot(
                    index=index,
                    features=mean[None, :] + noise,
                    groundtruth=caption,
                    important=int(important and index == start),
                    distractor=distractor,
                )
            )

    references = []
    for r in range(spec.references):
        sentences = []
        for event_type, template, _, important in events:
            if not important:
                continue
            if r == 0:
                caption = templates[event_type][template]
            else:
                caption = rng.choice(templates[event_type])
            sentences.append(caption.text + ".")
        references.append(" ".join(sentences))

    return Video(id=video_id, shots=tuple(shots), reference_texts=tuple(references))
