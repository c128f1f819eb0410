from .manager import PriorManager
