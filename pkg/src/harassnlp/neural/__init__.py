"""From-scratch gradient-trained models: word and document embeddings via
negative sampling, and an LSTM classifier with BPTT."""

from .embeddings import (
    DocVectorTable,
    EmbeddingTable,
    SgdConfig,
    doc_embed_average,
    infer_doc_vector,
    loss_curve_csv,
    negative_sampling_gradients,
    negative_sampling_loss,
    train_pvdbow,
    train_skipgram,
)
from .lstm import (
    LstmClassifier,
    LstmConfig,
    lstm_gradients,
    lstm_loss,
    lstm_train,
    pad_or_truncate,
)

__all__ = [
    "DocVectorTable",
    "EmbeddingTable",
    "SgdConfig",
    "doc_embed_average",
    "infer_doc_vector",
    "loss_curve_csv",
    "negative_sampling_gradients",
    "negative_sampling_loss",
    "train_pvdbow",
    "train_skipgram",
    "LstmClassifier",
    "LstmConfig",
    "lstm_gradients",
    "lstm_loss",
    "lstm_train",
    "pad_or_truncate",
]
