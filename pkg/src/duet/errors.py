"""Exception hierarchy shared across the package."""
from __future__ import annotations


class DuetError(Exception):
    """Base class for all errors raised by this package."""


class EmptyNameError(DuetError):
    """A name canonicalized to the empty string."""


class MalformedMultiplicityError(DuetError):
    """A multiplicity string does not match the accepted grammar."""


class DuplicateNodeError(DuetError):
    """Two nodes collide on the same canonical name."""


class DuplicateMemberError(DuetError):
    """Two attributes (or operation signatures) collide within one node."""


class InvalidDiagramError(DuetError):
    """A diagram violates a structural invariant, e.g. a dangling endpoint."""


class KindMismatchError(DuetError):
    """The diagram kind differs from the expected or required kind."""


class MixedKindsError(DuetError):
    """A source mixes entity declarations with class-style declarations."""


class MissingEnclosureError(DuetError):
    """The @startuml/@enduml enclosure is absent."""


class PlantUmlSyntaxError(DuetError):
    """Malformed member or relationship line; carries all diagnostics.

    `diagnostics` holds every diagnostic collected before the failure,
    warnings included, so callers can report more than the first problem.
    """

    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class InconsistentMatchingError(DuetError):
    """A matching references nodes that do not exist in the diagrams."""


class MissingTemplateError(DuetError):
    """No feedback template exists for a required (audience, category, change) key."""


class TemplateNotFoundError(DuetError):
    """No prompt template exists for the requested key."""


class GatewayError(DuetError):
    """Base class for LLM gateway failures."""


class OfflineModeError(GatewayError):
    """A network operation was requested while offline mode is active."""


class UnsupportedImageError(GatewayError):
    """The uploaded image is not PNG/JPEG or exceeds the size limit."""


class TransportError(GatewayError):
    """All transport attempts against the model endpoint failed."""


class NoDiagramInResponseError(GatewayError):
    """The model response contained no @startuml...@enduml block."""


class UnknownReferenceError(DuetError):
    """No stored record exists for the given id."""


class CorruptRecordError(DuetError):
    """A stored record failed its checksum on read."""
