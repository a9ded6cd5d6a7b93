"""Dutch die/dat prediction toolkit.

Corpus preprocessing (occurrence masking, context windows, splits), skip-gram
word embeddings, a binary BiLSTM die/dat classifier and three multitask
die/dat + part-of-speech variants, trained with manually backpropagated
gradients on a small dense-numerics core. The hot loops run through a
compiled extension when available (see ``diedat.kernels``).
"""

__version__ = "0.1.0"
