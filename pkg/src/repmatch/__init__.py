"""repmatch: matches report text segments to regulatory checklist requirements."""

__version__ = "0.1.0"
