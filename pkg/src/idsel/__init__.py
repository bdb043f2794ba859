"""Informed data selection toolkit.

Orders an unlabeled corpus for human annotation (random, reverse semantic
search, ordered clustering, limited lexical similarity), simulates annotation
to measure the overannotation rate, serves live annotation sessions, and
evaluates selected subsets with an embedding-space few-shot classifier.
"""

__version__ = "0.1.0"
