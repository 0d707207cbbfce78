from src.application.factories.network_factory import NetworkFactory

__all__ = ["NetworkFactory"]
