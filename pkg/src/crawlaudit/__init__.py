"""Audit toolkit for web-crawled multilingual corpora.

Reads corpora, draws reproducible audit samples, collects human quality
labels through a local annotation service, lints language codes, evaluates
sentence-level LangID filtering and computes the aggregate quality
statistics of a corpus audit.
"""

__version__ = "0.1.0"
