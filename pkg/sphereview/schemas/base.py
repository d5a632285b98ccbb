# sphereview/schemas/base.py
from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True)


class FrozenSchema(BaseModel):
    """Immutable value type; safe to share across threads and use as a dict key."""

    model_config = ConfigDict(frozen=True)
