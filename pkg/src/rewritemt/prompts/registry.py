"""Rewriting-method registry and byte-exact prompt rendering.

Templates live here as string constants; the files under fixtures/ pin the
exact bytes (one file per method and stage, placeholders left unsubstituted).
Rendering is pure string substitution: same inputs, same output bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import InvalidStage, MissingInput, UnknownMethod

FAMILIES = ("mt_agnostic", "task_aware", "translatability_aware", "postedit", "sft_template")

# Placeholder tokens shared by templates and fixture files.
SRC = "«SRC»"
TGT_LANG = "«TGT_LANG»"
MT = "«MT»"
REF = "«REF»"

# Spelled-out target-language names keyed by BCP-47 tag.
LANGUAGE_NAMES = {
    "en": "English",
    "de": "German",
    "ru": "Russian",
    "zh": "Chinese",
    "cs": "Czech",
    "he": "Hebrew",
    "ja": "Japanese",
    "uk": "Ukrainian",
    "fr": "French",
    "es": "Spanish",
}


@dataclass(frozen=True)
class MethodSpec:
    name: str
    family: str
    needs_target_lang: bool = False
    needs_mt_output: bool = False
    needs_reference: bool = False
    stages: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "mt_agnostic" and (
            self.needs_target_lang or self.needs_mt_output or self.needs_reference
        ):
            raise ValueError(f"mt_agnostic method {self.name!r} must not need task inputs")


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    method: str
    stage: int


_SIMPLIFY_INSTRUCTION = (
    "Simplify the English sentence. Simplification may include identifying complex words "
    "and replacing with simpler or shorter words or using active voice instead of passive "
    "voice. Try to keep the meaning of the Original sentence."
)

# Post-edit variants reuse the simplification wording with the English target
# swapped for the output language; Ow additionally shows the original source.
_POSTEDIT_INSTRUCTION = (
    f"Simplify the {TGT_LANG} sentence. Simplification may include identifying complex words "
    "and replacing with simpler or shorter words or using active voice instead of passive "
    "voice. Try to keep the meaning of the Original sentence."
)

_TEMPLATES: dict[tuple[str, int], str] = {
    ("simplification", 1): f"{_SIMPLIFY_INSTRUCTION}\nOriginal: {SRC}\nSimplified:",
    ("paraphrase", 1): (
        "Paraphrase the English sentence. Try to not directly copy but keep the meaning "
        f"of the Original sentence.\nOriginal: {SRC}\nParaphrase:"
    ),
    ("stylistic.gec", 1): f"Fix the grammar: {SRC}",
    ("stylistic.coherent", 1): f"Make this text coherent: {SRC}",
    ("stylistic.understandable", 1): f"Rewrite to make this easier to understand: {SRC}",
    ("stylistic.formal", 1): f"Write this more formally: {SRC}",
    ("easy_translation", 1): (
        f"Rewrite the Original sentence to be easier for translation in {TGT_LANG}. "
        f"New sentence should be in English.\nOriginal: {SRC}\nNew:"
    ),
    ("cot", 1): (
        f"Rewrite the Original English sentence to New English sentence that translates "
        f"better into {TGT_LANG}. Avoid directly copying the Original sentence while "
        f"keeping its meaning. New sentence should be in English.\nOriginal: {SRC}\nNew:"
    ),
    ("cot", 2): f"Now, translate the English sentence to {TGT_LANG}.\nEnglish: {SRC}\n{TGT_LANG}:",
    ("postedit.owo", 1): f"{_POSTEDIT_INSTRUCTION}\nOriginal: {MT}\nSimplified:",
    ("postedit.ow", 1): f"Original: {SRC}\n{_POSTEDIT_INSTRUCTION}\nOriginal: {MT}\nSimplified:",
    ("sft.basic", 1): (
        "### Instruction: Rewrite this English sentence to give a better translation.\n\n"
        f"### English: {SRC}\n### English rewrite:"
    ),
    ("sft.mt", 1): (
        f"### Instruction: Rewrite this English sentence to give a better translation in "
        f"{TGT_LANG}. {TGT_LANG} sentence is the hypothesis translation that we are trying "
        f"to improve.\n\n### English: {SRC}\n### {TGT_LANG}: {MT}\n### English rewrite:"
    ),
    ("sft.reference", 1): (
        f"### Instruction: Rewrite this English sentence to give a better translation in "
        f"{TGT_LANG}. {TGT_LANG} sentence is the human-annotated translation that we are "
        f"trying to pursue.\n\n### English: {SRC}\n### {TGT_LANG}: {REF}\n### English rewrite:"
    ),
}

METHODS: tuple[MethodSpec, ...] = (
    MethodSpec("simplification", "mt_agnostic"),
    MethodSpec("paraphrase", "mt_agnostic"),
    MethodSpec("stylistic.gec", "mt_agnostic"),
    MethodSpec("stylistic.coherent", "mt_agnostic"),
    MethodSpec("stylistic.understandable", "mt_agnostic"),
    MethodSpec("stylistic.formal", "mt_agnostic"),
    MethodSpec("easy_translation", "task_aware", needs_target_lang=True),
    MethodSpec("cot", "task_aware", needs_target_lang=True, stages=(1, 2)),
    MethodSpec("postedit.owo", "postedit", needs_target_lang=True, needs_mt_output=True),
    MethodSpec("postedit.ow", "postedit", needs_target_lang=True, needs_mt_output=True),
    MethodSpec("sft.basic", "sft_template"),
    MethodSpec("sft.mt", "sft_template", needs_target_lang=True, needs_mt_output=True),
    MethodSpec("sft.reference", "sft_template", needs_target_lang=True, needs_reference=True),
)

_BY_NAME = {m.name: m for m in METHODS}
assert len(_BY_NAME) == len(METHODS), "method names must be unique"


def get_method(name: str) -> MethodSpec:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise UnknownMethod(name) from None


def list_methods(family: str | None = None) -> list[MethodSpec]:
    """Registered methods in declaration order, optionally filtered by family."""
    if family is None:
        return list(METHODS)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    return [m for m in METHODS if m.family == family]


def stages_for(name: str) -> tuple[int, ...]:
    return get_method(name).stages


def language_name(tag_or_name: str) -> str:
    """Spelled-out language name for a BCP-47 tag; names pass through."""
    return LANGUAGE_NAMES.get(tag_or_name.lower(), tag_or_name)


def render_prompt(
    method: str,
    source: str,
    tgt_lang: str | None = None,
    mt_output: str | None = None,
    reference: str | None = None,
    stage: int = 1,
) -> RenderedPrompt:
    """Substitute the placeholders of the (method, stage) template.

    No byte outside a placeholder changes. Required inputs follow the
    method's needs_* flags; missing ones raise MissingInput.
    """
    spec = get_method(method)
    if stage not in spec.stages:
        raise InvalidStage(stage)
    if not source:
        raise MissingInput("source")
    if spec.needs_target_lang and not tgt_lang:
        raise MissingInput("tgt_lang")
    if spec.needs_mt_output and not mt_output:
        raise MissingInput("mt_output")
    if spec.needs_reference and not reference:
        raise MissingInput("reference")

    text = _TEMPLATES[(method, stage)]
    text = text.replace(SRC, source)
    if tgt_lang is not None:
        text = text.replace(TGT_LANG, language_name(tgt_lang))
    if mt_output is not None:
        text = text.replace(MT, mt_output)
    if reference is not None:
        text = text.replace(REF, reference)
    return RenderedPrompt(text=text, method=method, stage=stage)


def fixture_path(method: str, stage: int) -> Path:
    """Path of the checked-in fixture file pinning this template's bytes."""
    base = resources.files(__package__) / "fixtures"
    return Path(str(base)) / f"{method}.stage{stage}.txt"


def all_template_keys() -> list[tuple[str, int]]:
    return [(m.name, s) for m in METHODS for s in m.stages]


def template_text(method: str, stage: int) -> str:
    spec = get_method(method)
    if stage not in spec.stages:
        raise InvalidStage(stage)
    return _TEMPLATES[(method, stage)]
