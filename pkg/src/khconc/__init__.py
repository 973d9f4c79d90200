"""Reduced rational Khovanov homology, the Lee spectral sequence and
cobordism maps, with concordance obstruction checks built on them."""

__version__ = "0.1.0"
