"""Named registries for circuit ensembles and learning strategies."""

from typing import Any, Callable, Dict, List


class Registry:
    """Registry mapping lower-case names to factories."""

    def __init__(self, kind: str):
        """Initialize empty registry.

        Args:
            kind: Human-readable label used in error messages
        """
        self.kind = kind
        self._entries: Dict[str, Callable[..., Any]] = {}

    def register(self, name: str) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
        """Register a factory under ``name``.

        Args:
            name: Entry name

        Returns:
            Decorator function
        """
        def decorator(obj: Callable[..., Any]) -> Callable[..., Any]:
            self._entries[name.lower()] = obj
            return obj
        return decorator

    def get(self, name: str) -> Callable[..., Any]:
        """Get a factory by name.

        Args:
            name: Entry name

        Returns:
            Registered factory

        Raises:
            KeyError: If no entry is registered under ``name``
        """
        if name not in self._entries:
            raise KeyError(f"{self.kind.capitalize()} '{name}' not found")
        return self._entries[name]

    def names(self) -> List[str]:
        return list(self._entries.keys())


# Global registry instances
ensembles = Registry("ensemble")
strategies = Registry("strategy")


def register_ensemble(name: str) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Register a circuit ensemble with the global registry.

    Args:
        name: Ensemble name

    Returns:
        Decorator function
    """
    return ensembles.register(name)


def get_ensemble(name: str) -> Callable[..., Any]:
    """Get a registered circuit ensemble.

    Args:
        name: Name of the ensemble

    Returns:
        Ensemble sampler

    Raises:
        ValueError: If the ensemble is not registered
    """
    name = name.lower()
    if name not in ensembles.names():
        raise ValueError(f"Unsupported ensemble: {name}")
    return ensembles.get(name)


def list_ensembles() -> List[str]:
    """List all registered ensembles.

    Returns:
        List of ensemble names
    """
    return ensembles.names()


def register_strategy(name: str) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Register a probe strategy with the global registry.

    Args:
        name: Strategy name

    Returns:
        Decorator function
    """
    return strategies.register(name)


def get_strategy(name: str) -> Callable[..., Any]:
    """Get a registered probe strategy.

    Args:
        name: Name of the strategy

    Returns:
        Strategy class

    Raises:
        ValueError: If the strategy is not registered
    """
    name = name.lower()
    if name not in strategies.names():
        raise ValueError(f"Unsupported strategy: {name}")
    return strategies.get(name)


def list_strategies() -> List[str]:
    """List all registered strategies.

    Returns:
        List of strategy names
    """
    return strategies.names()
