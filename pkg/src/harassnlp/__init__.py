"""Harassment tweet classification toolkit.

Covers the full study pipeline: corpus ingestion and preprocessing, the
five-category taxonomy (with the nine-category pilot remap), n-gram and
embedding features, naive Bayes and LSTM classifiers, Fleiss' kappa
agreement, gold-question trust scoring with trust-weighted label
aggregation, LDA hashtag discovery, cross-validated evaluation, a CLI,
and an HTTP annotation service.
"""

from .taxonomy import Category, Gender, LegacyCategory, remap_legacy

__version__ = "0.1.0"

__all__ = ["Category", "Gender", "LegacyCategory", "remap_legacy", "__version__"]
