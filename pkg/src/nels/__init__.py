"""NELS: a continuously running sound-indexing system.

Crawls media from pluggable sources, recognizes sound events in 2.3 s
segments, indexes segments by content, serves text-based sound search over
an embedding-mapped vocabulary, and evaluates its own recognition quality
against human feedback and the crawl query.
"""

__version__ = "0.1.0"
