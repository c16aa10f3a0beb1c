#!/usr/bin/env python3
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

"""Writes the synthetic stale-fact world under data/synthetic/.

The world is a set of invented countries with capitals. A stale snapshot
(used to train the n-gram model) states each country's old capital; the
current passages (the retrieval corpus and gold contexts) state the current
one. Some capitals moved, so closed-book answers go stale on those facts.

    python3 tools/make_synthetic_world.py [--out data/synthetic] [--seed 7]
"""

import argparse
import json
import random
from pathlib import Path

NUM_FACTS = 50
NUM_CHANGED = 28
NUM_QA = 25
NUM_SHOTS = 5
REGIONS = ["northern", "southern", "eastern", "western", "central", "coastal"]
EXPORTS = ["wool", "copper", "grain", "salt", "timber", "glass", "silk", "tin"]

ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "kr", "tr", "st"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ou"]
CODAS = ["", "n", "r", "l", "s", "th", "m"]


def make_names(rng, count, syllables, suffixes, taken):
    names = []
    while len(names) < count:
        word = "".join(rng.choice(ONSETS) + rng.choice(VOWELS) + rng.choice(CODAS) for _ in range(syllables))
        word = (word + rng.choice(suffixes)).capitalize()
        # Article-like or very short names would interfere with answer normalization.
        if len(word) < 5 or word.lower() in taken:
            continue
        taken.add(word.lower())
        names.append(word)
    return names


def passage(country, region, largest, export, capital):
    return (f"{country} is a country in the {region} region. Its largest city is {largest}. "
            f"It is known for {export}. Question: What is the capital of {country}? Answer: {capital}.")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    taken = set()
    countries = make_names(rng, NUM_FACTS, 2, ["ia", "land", "ar", "ova"], taken)
    old_capitals = make_names(rng, NUM_FACTS, 2, ["ton", "burg", "grad", "ford", "heim"], taken)
    new_cities = make_names(rng, NUM_FACTS, 2, ["ville", "port", "stad", "mouth"], taken)

    changed = set(rng.sample(range(NUM_FACTS), NUM_CHANGED))
    facts = []
    for i, country in enumerate(countries):
        is_changed = i in changed
        facts.append({
            "country": country,
            "region": rng.choice(REGIONS),
            "export": rng.choice(EXPORTS),
            # In the stale snapshot the future capital is already the largest city.
            "largest_city": new_cities[i],
            "old_capital": old_capitals[i],
            "capital": new_cities[i] if is_changed else old_capitals[i],
            "changed": is_changed,
            "popularity": int(10 ** rng.uniform(0.0, 6.9)),
        })

    # QA items: 20 changed facts and 5 unchanged ones; shots come from the rest.
    changed_ids = [i for i in range(NUM_FACTS) if facts[i]["changed"]]
    unchanged_ids = [i for i in range(NUM_FACTS) if not facts[i]["changed"]]
    qa_ids = sorted(changed_ids[:20] + unchanged_ids[:5])
    rest = [i for i in range(NUM_FACTS) if i not in qa_ids]
    shot_ids = rest[:NUM_SHOTS]

    (out / "world.json").write_text(json.dumps({"seed": args.seed, "facts": facts}, indent=2) + "\n")

    with open(out / "stale_corpus.txt", "w") as f:
        for fact in facts:
            f.write(passage(fact["country"], fact["region"], fact["largest_city"], fact["export"],
                            fact["old_capital"]) + "\n")

    with open(out / "corpus.jsonl", "w") as f:
        for i, fact in enumerate(facts):
            text = passage(fact["country"], fact["region"], fact["largest_city"], fact["export"], fact["capital"])
            f.write(json.dumps({"id": f"p{i:03d}", "title": fact["country"], "text": text}) + "\n")

    with open(out / "qa.jsonl", "w") as f:
        for n, i in enumerate(qa_ids):
            fact = facts[i]
            text = passage(fact["country"], fact["region"], fact["largest_city"], fact["export"], fact["capital"])
            start = text.rindex("Answer: ") + len("Answer: ")
            f.write(json.dumps({
                "id": f"q{n:02d}",
                "question": f"What is the capital of {fact['country']}?",
                "answers": [fact["capital"]],
                "gold_context": text,
                "entity_popularity": fact["popularity"],
                "answer_entity_span": [start, start + len(fact["capital"])],
            }) + "\n")

    with open(out / "shots.jsonl", "w") as f:
        for i in shot_ids:
            fact = facts[i]
            f.write(json.dumps({
                "question": f"What is the capital of {fact['country']}?",
                "answer": fact["capital"],
                "context": passage(fact["country"], fact["region"], fact["largest_city"], fact["export"],
                                   fact["capital"]),
            }) + "\n")

    (out / "ngram.json").write_text(json.dumps({
        "corpus": "stale_corpus.txt", "order": 5, "unit": "word", "prompt_cache_weight": 4.0}, indent=2) + "\n")

    (out / "run_config.json").write_text(json.dumps({
        "backend": "ngram:ngram.json",
        "index": "corpus.jsonl",
        "dataset": "qa.jsonl",
        "shots": "shots.jsonl",
        "strategies": ["reg-closed", "reg-open", "cad", "ours-fixed", "ours-dynamic"],
        "irrelevant": "most-distant",
        "seed": 13,
        "max_new_tokens": 8,
        "stop": ["\n", "."],
    }, indent=2) + "\n")


if __name__ == "__main__":
    main()
