from .registry import (
    FAMILIES,
    METHODS,
    MethodSpec,
    RenderedPrompt,
    fixture_path,
    get_method,
    language_name,
    list_methods,
    render_prompt,
    stages_for,
)

__all__ = [
    "FAMILIES",
    "METHODS",
    "MethodSpec",
    "RenderedPrompt",
    "fixture_path",
    "get_method",
    "language_name",
    "list_methods",
    "render_prompt",
    "stages_for",
]
