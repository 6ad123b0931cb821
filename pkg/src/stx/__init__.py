"""Short-text (tweet) classification into product-taxonomy root categories.

Modules
-------
corpus      JSON-Lines ingestion, retweet/rare-class filtering, stratified split
taxonomy    browse-node graph and root resolution
textprep    normalization and stop lists
features    vocabulary, CSR TF-IDF, ANOVA-F selection
learners    naive Bayes, one-vs-rest linear SVM / logistic regression
expansion   hashtag and category thesauri, document/query expansion
evaluation  stratified k-fold, per-class/macro/micro metrics
pipeline    fit/predict glue used by cross-validation and the CLI
"""

__version__ = "0.1.0"

from .errors import StxError  # noqa: E402

__all__ = ["StxError", "__version__"]
