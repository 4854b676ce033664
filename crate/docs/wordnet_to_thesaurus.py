#!/usr/bin/env python3
"""Convert WordNet into the JSON-lines thesaurus read by `compnli stats antonym`.

    pip install nltk
    python -c "import nltk; nltk.download('wordnet')"
    python docs/wordnet_to_thesaurus.py > thesaurus.jsonl

Synonyms of a word are the other single-word lemmas of every synset it
belongs to. Antonyms are the lemma-level antonym links. Multi-word lemmas
are skipped.
"""

import argparse
import json
import sys
from collections import defaultdict


def build(wordnet):
    synonyms = defaultdict(set)
    antonyms = defaultdict(set)
    for synset in wordnet.all_synsets():
        lemmas = [l for l in synset.lemmas() if "_" not in l.name()]
        names = {l.name().lower() for l in lemmas}
        for lemma in lemmas:
            word = lemma.name().lower()
            synonyms[word] |= names - {word}
            for other in lemma.antonyms():
                if "_" not in other.name():
                    antonyms[word].add(other.name().lower())
    return synonyms, antonyms


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--no-synonyms", action="store_true", help="emit antonym lists only")
    args = parser.parse_args()

    from nltk.corpus import wordnet

    synonyms, antonyms = build(wordnet)
    words = sorted(set(antonyms) | (set() if args.no_synonyms else set(synonyms)))
    out = sys.stdout
    out.write(f"# wordnet {wordnet.get_version()}\n")
    for word in words:
        record = {"word": word}
        if not args.no_synonyms and synonyms[word]:
            record["synonyms"] = sorted(synonyms[word])
        if antonyms[word]:
            record["antonyms"] = sorted(antonyms[word])
        if len(record) > 1:
            out.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
