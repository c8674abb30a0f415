from .mock_implementations import ConstantStrategy, FailingStrategy

__all__ = ["ConstantStrategy", "FailingStrategy"]
