from src.application.networks.embedding_network import EmbeddingNetwork, EmbeddingOutput

__all__ = ["EmbeddingNetwork", "EmbeddingOutput"]
