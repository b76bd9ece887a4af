"""
Scoring a three-document corpus by hand
=======================================

Builds a tiny corpus, runs one keyword query and one document query on each
executor, and prints the weights next to their closed forms.
"""

import math

from textbends import FilterSet, QuerySpec, from_nested
from textbends.engine import EXECUTORS, execute

# three short documents; lemma_text is the token source
records = [
    {"doc_id": 1, "lemma_text": "a a b", "author": {"gender": "male"},
     "time": {"date": "2015-09-17T09:00:00"}, "location": {"x": 30, "y": 10}},
    {"doc_id": 2, "lemma_text": "b c", "author": {"gender": "male"},
     "time": {"date": "2015-09-17T10:00:00"}, "location": {"x": 31, "y": -5}},
    {"doc_id": 3, "lemma_text": "a", "author": {"gender": "female"},
     "time": {"date": "2015-09-17T11:00:00"}, "location": {"x": 25, "y": 0}},
]
corpus = from_nested(records)

# top keywords among male authors: only d1 and d2 count, so N = 2
keywords = QuerySpec("Q1", "tfidf", FilterSet(gender="male"))
for name in EXECUTORS:
    print(name, execute(corpus, keywords, name).entries)

ln2 = math.log(2)
print("closed forms: b = 0.75 + 1 =", 1.75, "| a = c = 1 + ln 2 =", 1 + ln2)

# top documents for the search term "a": d3 is filtered out, d2 lacks the term
documents = QuerySpec("Q1d", "bm25", FilterSet(gender="male", search_terms=("a",)))
print(execute(corpus, documents).entries)
