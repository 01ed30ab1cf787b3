class FairGraphError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FairGraphError, ValueError):
    """An index or argument lies outside its valid range."""


class ConfigError(FairGraphError, ValueError):
    """A configuration value violates its documented invariant."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class CapabilityError(FairGraphError):
    """The request exceeds a documented size or budget limit."""


class GenerationError(FairGraphError):
    """Random generation could not satisfy its constraints."""


class ContractError(FairGraphError):
    """A caller broke an operation's precondition."""
