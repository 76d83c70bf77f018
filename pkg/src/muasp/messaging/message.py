from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

from ..asp import Atom
from ..query import Query, QueryResult


class Performative(enum.Enum):
    REQUEST = "request"
    CONFIRM = "confirm"
    QUERY_IF = "query-if"
    FAILURE = "failure"
    INFORM = "inform"


Content = Union[Atom, Query, QueryResult, str, tuple]

REPLIES = (Performative.CONFIRM, Performative.FAILURE)


class MessageError(ValueError):
    pass


@dataclass(frozen=True)
class Message:
    """Performative-tagged envelope.

    ``content`` is a ground atom, a query, a query result, a tuple of ground
    atoms, or free text (failure reasons).  CONFIRM and FAILURE must name the
    message they answer in ``in_reply_to``.
    """

    performative: Performative
    sender: str
    receiver: str
    id: str
    content: Content = ()
    in_reply_to: Optional[str] = None

    def validate(self) -> None:
        if self.performative in REPLIES and not self.in_reply_to:
            raise MessageError(f"{self.performative.value} message {self.id} lacks in_reply_to")
        if not self.id:
            raise MessageError("message id must be nonempty")
        c = self.content
        atoms = c if isinstance(c, tuple) else (c,) if isinstance(c, Atom) else ()
        for a in atoms:
            if not isinstance(a, Atom) or not a.is_ground():
                raise MessageError(f"message content must be ground atoms, got {a}")

    def reply(self, performative: Performative, id: str, content: Content = ()) -> Message:
        return Message(performative, self.receiver, self.sender, id, content, in_reply_to=self.id)

    def __str__(self) -> str:
        c = self.content
        if isinstance(c, tuple):
            body = ", ".join(map(str, c))
        else:
            body = str(c)
        corr = f" in-reply-to {self.in_reply_to}" if self.in_reply_to else ""
        return f"{self.performative.value.upper()}({body}) {self.sender} -> {self.receiver} [{self.id}]{corr}"
