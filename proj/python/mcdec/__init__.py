# Copyright 2026 The mcdec Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Multi-input contrastive decoding for retrieval-augmented QA."""

import json

from ._core import (
    Bm25Index,
    DecodeStrategy,
    LanguageModel,
    McdecError,
    NgramBackend,
    ScriptedBackend,
    analyze,
    argmax,
    combine_cad,
    combine_contrastive,
    decode,
    dynamic_alpha,
    exact_match,
    fixed_irrelevant_text,
    normalize_answer,
    popularity_bucket,
    ratio_form_probability,
    render_prompt,
    run_cli,
    select_irrelevant,
    softmax,
)
from ._core import generate_conflict_set_json as _generate_conflict_set_json


def generate_conflict_set(records, pool=None, seed=0):
    """Substitutes answer entities in QA record dicts; returns the new record dicts."""
    body = "".join(json.dumps(r) + "\n" for r in records)
    out = _generate_conflict_set_json(body, pool, seed)
    return [json.loads(line) for line in out.splitlines() if line]


__all__ = [
    "Bm25Index",
    "DecodeStrategy",
    "LanguageModel",
    "McdecError",
    "NgramBackend",
    "ScriptedBackend",
    "analyze",
    "argmax",
    "combine_cad",
    "combine_contrastive",
    "decode",
    "dynamic_alpha",
    "exact_match",
    "fixed_irrelevant_text",
    "generate_conflict_set",
    "normalize_answer",
    "popularity_bucket",
    "ratio_form_probability",
    "render_prompt",
    "run_cli",
    "select_irrelevant",
    "softmax",
]
