"""Registry for checkers and experiments."""

from typing import Callable, Dict, Generic, List, TypeVar

T = TypeVar('T')


class Registry(Generic[T]):
    """Maps string IDs to registered classes or callables."""

    def __init__(self, kind: str):
        """Initialize an empty registry.

        Args:
            kind: What the registry holds, used in error messages.
        """
        self.kind = kind
        self._entries: Dict[str, T] = {}

    def register(self, entry_id: str) -> Callable[[T], T]:
        """Register a class or callable under an ID.

        Args:
            entry_id: The ID to register the entry under.

        Returns:
            A decorator function that registers the entry.

        Raises:
            ValueError: If the ID is already taken.
        """
        def decorator(entry: T) -> T:
            if entry_id in self._entries:
                raise ValueError(f"Duplicate {self.kind} ID: {entry_id}")
            self._entries[entry_id] = entry
            return entry
        return decorator

    def get(self, entry_id: str) -> T:
        """Get a registered entry by ID.

        Raises:
            ValueError: If the ID is not registered.
        """
        if entry_id not in self._entries:
            raise ValueError(f"Unknown {self.kind} ID: {entry_id}")
        return self._entries[entry_id]

    def create(self, entry_id: str, **kwargs):
        """Instantiate (or call) the entry registered under an ID.

        Args:
            entry_id: The ID of the entry.
            **kwargs: Parameters passed to the entry.

        Returns:
            Whatever the entry returns.

        Raises:
            ValueError: If the ID is not registered.
        """
        return self.get(entry_id)(**kwargs)

    def ids(self) -> List[str]:
        return sorted(self._entries)

    def __contains__(self, entry_id: str) -> bool:
        return entry_id in self._entries
