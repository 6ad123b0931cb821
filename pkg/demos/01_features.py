"""From raw tweets to selected TF-IDF features.

Walks a handful of tweets through normalization, vocabulary building,
TF-IDF weighting and ANOVA-based feature selection, printing each stage.
Run with ``python demos/01_features.py``.
"""

# %% Normalize
import numpy as np

from stx.features import anova_f, build_vocabulary, select_top, tfidf
from stx.textprep import load_stop_lists, normalize

stops = load_stop_lists()
tweets = [
    ("Loving this mystery novel, can't put it down! #books", "books"),
    ("New chapters of the novel out today http://t.co/xyz", "books"),
    ("RT our kitchen blender review is live #cooking", "home"),
    ("Cooking pasta in the new pan tonight", "home"),
]
docs, labels = [], []
for text, label in tweets:
    tokens, hashtags = normalize(text, stops)
    print(f"{text!r:60} -> {tokens}")
    docs.append(tokens)
    labels.append(label)

# %% Vocabulary and TF-IDF
# columns are sorted tokens; idf is ln(N / df), so a token in every document scores 0
vocab = build_vocabulary(docs)
X = tfidf(docs, vocab)
print("\nvocabulary:", vocab.tokens)
print("idf:", np.round(vocab.idf, 3))
print("stored entries:", X.nnz, "of", X.shape[0] * X.shape[1])

# %% ANOVA F and the top quarter
scores = anova_f(X, labels)
mask = select_top(scores, keep_fraction=0.25)
order = np.argsort(-scores, kind="stable")
print("\ntop features by F:")
for j in order[:6]:
    print(f"  {vocab.tokens[j]:12} F={scores[j]:.3g}")
print("kept:", [vocab.tokens[j] for j in mask.kept_columns])
print("reduced matrix shape:", mask.apply(X).shape)
