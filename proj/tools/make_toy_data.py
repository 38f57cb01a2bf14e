#!/usr/bin/env python3
#
# Copyright 2026 The Taxo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Regenerates the bundled toy dataset under data/toy/.

Sentences fill six two-slot templates per language with noun pairs drawn
from a small ten-category taxonomy. Binary labels follow the template's
acceptability rule; Likert scores are a noisy monotone function of it.
"""

import argparse
import pathlib
import random

TAXONOMY = {
    "drink": ["beer", "wine", "tea", "coffee", "juice", "cider"],
    "animal": ["dog", "cat", "horse", "rabbit", "goat", "donkey"],
    "flower": ["rose", "tulip", "daisy", "lily", "orchid", "violet"],
    "tree": ["oak", "pine", "birch", "maple", "willow", "cedar"],
    "fish": ["salmon", "trout", "cod", "tuna", "carp", "perch"],
    "tool": ["hammer", "axe", "wrench", "drill", "chisel", "pliers"],
    "instrument": ["violin", "piano", "guitar", "flute", "cello", "harp"],
    "vehicle": ["car", "truck", "bus", "bicycle", "tractor", "van"],
    "fruit": ["apple", "pear", "plum", "cherry", "mango", "peach"],
    "bird": ["sparrow", "eagle", "owl", "crow", "robin", "swan"],
}

NOUNS = {
    "fr": {
        "drink": "boisson", "beer": "bière", "wine": "vin", "tea": "thé", "coffee": "café",
        "juice": "jus", "cider": "cidre", "animal": "animal", "dog": "chien", "cat": "chat",
        "horse": "cheval", "rabbit": "lapin", "goat": "chèvre", "donkey": "âne",
        "flower": "fleur", "rose": "rose", "tulip": "tulipe", "daisy": "marguerite",
        "lily": "lys", "orchid": "orchidée", "violet": "violette", "tree": "arbre",
        "oak": "chêne", "pine": "pin", "birch": "bouleau", "maple": "érable",
        "willow": "saule", "cedar": "cèdre", "fish": "poisson", "salmon": "saumon",
        "trout": "truite", "cod": "morue", "tuna": "thon", "carp": "carpe", "perch": "perche",
        "tool": "outil", "hammer": "marteau", "axe": "hache", "wrench": "clé",
        "drill": "perceuse", "chisel": "ciseau", "pliers": "pince",
        "instrument": "instrument", "violin": "violon", "piano": "piano",
        "guitar": "guitare", "flute": "flûte", "cello": "violoncelle", "harp": "harpe",
        "vehicle": "véhicule", "car": "voiture", "truck": "camion", "bus": "autobus",
        "bicycle": "vélo", "tractor": "tracteur", "van": "fourgon", "fruit": "fruit",
        "apple": "pomme", "pear": "poire", "plum": "prune", "cherry": "cerise",
        "mango": "mangue", "peach": "pêche", "bird": "oiseau", "sparrow": "moineau",
        "eagle": "aigle", "owl": "hibou", "crow": "corbeau", "robin": "rouge-gorge",
        "swan": "cygne",
    },
    "it": {
        "drink": "bevanda", "beer": "birra", "wine": "vino", "tea": "tè", "coffee": "caffè",
        "juice": "succo", "cider": "sidro", "animal": "animale", "dog": "cane", "cat": "gatto",
        "horse": "cavallo", "rabbit": "coniglio", "goat": "capra", "donkey": "asino",
        "flower": "fiore", "rose": "rosa", "tulip": "tulipano", "daisy": "margherita",
        "lily": "giglio", "orchid": "orchidea", "violet": "viola", "tree": "albero",
        "oak": "quercia", "pine": "pino", "birch": "betulla", "maple": "acero",
        "willow": "salice", "cedar": "cedro", "fish": "pesce", "salmon": "salmone",
        "trout": "trota", "cod": "merluzzo", "tuna": "tonno", "carp": "carpa",
        "perch": "persico", "tool": "attrezzo", "hammer": "martello", "axe": "ascia",
        "wrench": "chiave", "drill": "trapano", "chisel": "scalpello", "pliers": "pinza",
        "instrument": "strumento", "violin": "violino", "piano": "pianoforte",
        "guitar": "chitarra", "flute": "flauto", "cello": "violoncello", "harp": "arpa",
        "vehicle": "veicolo", "car": "automobile", "truck": "camion", "bus": "autobus",
        "bicycle": "bicicletta", "tractor": "trattore", "van": "furgone", "fruit": "frutto",
        "apple": "mela", "pear": "pera", "plum": "prugna", "cherry": "ciliegia",
        "mango": "mango", "peach": "pesca", "bird": "uccello", "sparrow": "passero",
        "eagle": "aquila", "owl": "gufo", "crow": "corvo", "robin": "pettirosso",
        "swan": "cigno",
    },
}

# (template, rule). Rules: "hypo_first" -> label 1 iff slot 1 is a hyponym of
# slot 2; "hyper_first" -> iff slot 2 is a hyponym of slot 1; "unrelated" ->
# iff neither slot is a hypernym of the other.
TEMPLATES = {
    "en": [
        ("I like {x}, and more specifically {y}.", "hyper_first"),
        ("I like {x}, an interesting type of {y}.", "hypo_first"),
        ("I do not like {x}, a special kind of {y}.", "hypo_first"),
        ("He trusts {x}, except {y}.", "hyper_first"),
        ("I like {x} more than {y}.", "unrelated"),
        ("I saw {x}, and {y} too.", "unrelated"),
    ],
    "fr": [
        ("J'aime {x}, et plus précisément {y}.", "hyper_first"),
        ("J'aime {x}, un type intéressant de {y}.", "hypo_first"),
        ("Je n'aime pas {x}, une sorte spéciale de {y}.", "hypo_first"),
        ("Il fait confiance à {x}, sauf {y}.", "hyper_first"),
        ("J'aime {x} plus que {y}.", "unrelated"),
        ("J'ai vu {x}, et {y} aussi.", "unrelated"),
    ],
    "it": [
        ("Mi piace {x}, e più precisamente {y}.", "hyper_first"),
        ("Mi piace {x}, un tipo interessante di {y}.", "hypo_first"),
        ("Non mi piace {x}, un tipo speciale di {y}.", "hypo_first"),
        ("Si fida di {x}, tranne {y}.", "hyper_first"),
        ("Mi piace {x} più di {y}.", "unrelated"),
        ("Ho visto {x}, e anche {y}.", "unrelated"),
    ],
}

# Word-level glosses of the template words into English, used by the mock
# dictionary translator.
TEMPLATE_GLOSSES = {
    "fr": {"j'aime": "I like", "et": "and", "plus": "more", "précisément": "specifically",
           "un": "an", "type": "type", "intéressant": "interesting", "de": "of",
           "je": "I", "n'aime": "do not", "pas": "like", "une": "a", "sorte": "kind",
           "spéciale": "special", "il": "he", "fait": "trusts", "confiance": "", "à": "",
           "sauf": "except", "que": "than", "j'ai": "I", "vu": "saw", "aussi": "too"},
    "it": {"mi": "I", "piace": "like", "e": "and", "più": "more",
           "precisamente": "specifically", "un": "an", "tipo": "type",
           "interessante": "interesting", "di": "of", "non": "do not", "speciale": "special",
           "si": "he", "fida": "trusts", "tranne": "except", "ho": "I", "visto": "saw",
           "anche": "too"},
}

PER_TEMPLATE = 20


def hypernym_of(noun):
    for hyper, hypos in TAXONOMY.items():
        if noun in hypos:
            return hyper
    return None


def label(rule, x, y):
    if rule == "hypo_first":
        return int(hypernym_of(x) == y)
    if rule == "hyper_first":
        return int(hypernym_of(y) == x)
    related = hypernym_of(x) == y or hypernym_of(y) == x
    return int(not related)


def pairs_for(rule, rng, count):
    hypers = sorted(TAXONOMY)
    out = []
    for i in range(count):
        h = rng.choice(hypers)
        hypo = rng.choice(TAXONOMY[h])
        other = rng.choice([c for c in hypers if c != h])
        other_hypo = rng.choice(TAXONOMY[other])
        want_positive = i % 2 == 0
        if rule == "hypo_first":
            pair = (hypo, h) if want_positive else rng.choice([(h, hypo), (hypo, other)])
        elif rule == "hyper_first":
            pair = (h, hypo) if want_positive else rng.choice([(hypo, h), (other, hypo)])
        else:
            pair = (hypo, other_hypo) if want_positive else rng.choice([(hypo, h), (h, hypo)])
        out.append(pair)
    return out


def localize(noun, lang):
    return noun if lang == "en" else NOUNS[lang][noun]


def generate(lang, seed):
    rng = random.Random(f"{seed}-{lang}")
    rows = []
    for t, (template, rule) in enumerate(TEMPLATES[lang]):
        pair_rng = random.Random(f"{seed}-{t}")  # same noun pairs in every language
        for x, y in pairs_for(rule, pair_rng, PER_TEMPLATE):
            text = template.format(x=localize(x, lang), y=localize(y, lang))
            rows.append((text, label(rule, x, y)))
    rng.shuffle(rows)
    return rows


def likert(rows, lang, seed):
    rng = random.Random(f"{seed}-likert-{lang}")
    out = []
    for text, lab in rows:
        centre = 5.8 if lab else 2.2
        score = min(7.0, max(1.0, round(centre + rng.uniform(-1.2, 1.2), 2)))
        out.append((text, score))
    return out


def write_task(path, rows, value_column):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"ID\tSentence\t{value_column}\n")
        for i, (text, value) in enumerate(rows, 1):
            f.write(f"{i}\t{text}\t{value}\n")


def write_dictionary(path):
    langs = ["en", "fr", "it"]
    lines = []
    for src in langs:
        for tgt in langs:
            if src == tgt:
                continue
            for noun in sorted(NOUNS["fr"]):
                a, b = localize(noun, src), localize(noun, tgt)
                if a != b:
                    lines.append(f"{src}\t{tgt}\t{a}\t{b}")
    for src, glosses in TEMPLATE_GLOSSES.items():
        for word, gloss in sorted(glosses.items()):
            lines.append(f"{src}\ten\t{word}\t{gloss}")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("# src\ttgt\tword\ttranslation\n")
        f.write("\n".join(lines) + "\n")


COMMONSENSE = [
    ("He put a turkey into the fridge.", 1),
    ("He put an elephant into the fridge.", 0),
    ("She drinks coffee every morning.", 1),
    ("She drinks a chair every morning.", 0),
    ("The dog chased the cat.", 1),
    ("The cat chased the mountain.", 0),
    ("He plays the violin at concerts.", 1),
    ("He plays the salmon at concerts.", 0),
    ("Birds can fly over the lake.", 1),
    ("Trees can fly over the lake.", 0),
    ("She cut the bread with a knife.", 1),
    ("She cut the bread with a cloud.", 0),
    ("He drove the truck to the farm.", 1),
    ("He drove the apple to the farm.", 0),
    ("They planted an oak in the garden.", 1),
    ("They planted a piano in the garden.", 0),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent
                                             / "data" / "toy"))
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for lang in ["en", "fr", "it"]:
        rows = generate(lang, args.seed)
        write_task(out / f"train_{lang}.tsv", rows, "Labels")
        write_task(out / f"likert_{lang}.tsv", likert(rows, lang, args.seed), "Score")
    write_dictionary(out / "dictionary.tsv")
    with open(out / "commonsense_en.tsv", "w", encoding="utf-8", newline="\n") as f:
        f.write("sentence\tvalid\n")
        for text, valid in COMMONSENSE:
            f.write(f"{text}\t{valid}\n")
    # Held-out comparative templates, one per language.
    for lang in ["en", "fr", "it"]:
        template = TEMPLATES[lang][4][0].format(x="⟨B⟩", y="⟨B⟩")
        with open(out / f"complex_patterns_{lang}.txt", "w", encoding="utf-8") as f:
            f.write(template + "\n")
    with open(out / "fill_lexicon.tsv", "w", encoding="utf-8") as f:
        for w in ["really", "truly", "certainly", "often", "still", "always"]:
            f.write(f"insert\t{w}\n")
        for w in ["adore", "enjoy", "love", "prefer", "admire", "fancy"]:
            f.write(f"substitute\t{w}\n")


if __name__ == "__main__":
    main()
