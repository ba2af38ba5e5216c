"""Desk-scale toolkit for MediaWiki revision-history dumps: streaming
parse, repartition, pushdown extraction, temporal indexing, analytics."""

__version__ = "0.1.0"
