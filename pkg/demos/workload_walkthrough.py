"""
Running the standard workload on a generated corpus
===================================================

Generates 1000 documents, binds the eight query shapes to the standard
parameter values, and shows plans, complexities, selectivities and the top
results of a few queries.
"""

from textbends import STANDARD_PARAMS, GeneratorConfig, build_workload, complexity, generate
from textbends.engine import execute, plan, selectivity

corpus, manifest = generate(GeneratorConfig(sf=0.001, seed=42))
print(f"{manifest.document_count} documents, {manifest.vocabulary_size} lemmas, checksum {manifest.checksum[:12]}")

# 8 shapes x 2 schemes x 2 genders
specs = build_workload(STANDARD_PARAMS)
print(len(specs), "specs")

# one line per male spec: plan stages, traversal count, selectivity
for spec in specs:
    if spec.filters.gender != "male":
        continue
    stages = " -> ".join(str(s) for s in plan(spec).stages)
    print(f"{spec.label:18s} C={complexity(spec):2d} S={selectivity(spec, corpus):.4f}  {stages}")

# the most characteristic words of female authors in the geo box
q3 = next(s for s in specs if s.label == "Q3/bm25/female")
for word, score in execute(corpus, q3).entries:
    print(f"  {word:12s} {score:8.4f}")

# the best-matching documents for the search terms, restricted in time and space
q4d = next(s for s in specs if s.label == "Q4d/tfidf/male")
print(execute(corpus, q4d, "mapreduce").entries)
