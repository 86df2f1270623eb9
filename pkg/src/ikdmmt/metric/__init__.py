from .base import Base
from .accuracy import AmbiguousAccuracy, ambiguous_accuracy
from .bleu import Bleu, BleuReport, bleu4
from .retrieval import RetrievalReport, cosine_matrix, retrieval_rk
