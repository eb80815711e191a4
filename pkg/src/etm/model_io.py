"""Model dump: one JSON document holding everything ``report`` needs.

Schema (all keys required)::

    {
      "format": "etm-model/1",
      "params": {"K", "alpha", "beta", "lam", "corr_threshold",
                 "iterations", "burn_in", "seed", "average_samples"},
      "vocabulary": [word, ...],            # V entries, index = word id
      "pseudo_texts": {"L": int, "assignment": [pseudo id per text]},
      "z": [[topic per token] per pseudo-text],
      "phi": [[V floats] per topic],
      "theta": [[K floats] per pseudo-text]
    }
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import PseudoTextSet
from .inference import ModelParams, TopicEstimates, TopicModelState

FORMAT = "etm-model/1"


@dataclass(frozen=True)
class ModelDump:
    params: ModelParams
    vocabulary: tuple[str, ...]
    pseudo_texts: PseudoTextSet
    z: list[list[int]]
    estimates: TopicEstimates


def save_model(path, params: ModelParams, state: TopicModelState, estimates: TopicEstimates,
               pseudo_texts: PseudoTextSet, vocabulary) -> None:
    payload = {
        "format": FORMAT,
        "params": dataclasses.asdict(params),
        "vocabulary": list(vocabulary),
        "pseudo_texts": {"L": pseudo_texts.L, "assignment": list(pseudo_texts.assignment)},
        "z": [state.topics(l).tolist() for l in range(state.layout.L)],
        "phi": estimates.phi.tolist(),
        "theta": estimates.theta.tolist(),
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path) -> ModelDump:
    with Path(path).open(encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != FORMAT:
        raise ValueError(f"{path}: not an {FORMAT} model dump")
    vocab = tuple(payload["vocabulary"])
    return ModelDump(
        ModelParams(**payload["params"]),
        vocab,
        PseudoTextSet(tuple(payload["pseudo_texts"]["assignment"]), payload["pseudo_texts"]["L"]),
        payload["z"],
        TopicEstimates(np.array(payload["phi"]), np.array(payload["theta"]), vocab),
    )
