"""Short-text topic modeling with word embeddings.

Short texts are grouped into pseudo-texts by Word Mover's Distance, then
topics are inferred with an MRF-regularized LDA via collapsed Gibbs sampling.
"""
__version__ = "0.1.0"
