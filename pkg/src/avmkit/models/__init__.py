"""Bundled model assets."""

from importlib import resources


def antivirus_text() -> str:
    """Source text of the bundled protection-service model."""
    return resources.files(__package__).joinpath("antivirus.avm").read_text(encoding="utf-8")


def antivirus_document():
    """The bundled model, parsed and validated."""
    from ..dsl import parse_model

    return parse_model(antivirus_text(), name="antivirus")
