"""Exception types shared across the pipeline.

Every error carries enough context (segment id, method, line number) to
locate the offending record without re-running the stage.
"""


class RewriteMtError(Exception):
    """Base class for all pipeline errors."""


class MalformedLine(RewriteMtError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"malformed record at line {line_no}" + (f": {reason}" if reason else ""))


class DuplicateId(RewriteMtError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"duplicate record id: {record_id!r}")


class EmptySource(RewriteMtError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"empty source for segment {record_id!r}")


class IoFailure(RewriteMtError):
    def __init__(self, path, cause: Exception | None = None):
        self.path = path
        self.cause = cause
        super().__init__(f"I/O failure for {path}" + (f": {cause}" if cause else ""))


class UnknownMethod(RewriteMtError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown rewriting method: {name!r}")


class MissingInput(RewriteMtError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"missing required prompt input: {field}")


class InvalidStage(RewriteMtError):
    def __init__(self, stage: int):
        self.stage = stage
        super().__init__(f"invalid prompt stage: {stage}")


class BackendUnreachable(RewriteMtError):
    def __init__(self, backend_id: str, cause: Exception | None = None):
        self.backend_id = backend_id
        self.cause = cause
        super().__init__(f"backend {backend_id!r} unreachable" + (f": {cause}" if cause else ""))


class BackendError(RewriteMtError):
    def __init__(self, backend_id: str, status: int, body: str = ""):
        self.backend_id = backend_id
        self.status = status
        self.body = body
        super().__init__(f"backend {backend_id!r} returned status {status}: {body[:200]}")


class BackendTimeout(RewriteMtError):
    def __init__(self, backend_id: str):
        self.backend_id = backend_id
        super().__init__(f"backend {backend_id!r} timed out")


class RangeViolation(RewriteMtError):
    def __init__(self, value: float, expected: str = "[0,1]"):
        self.value = value
        super().__init__(f"score {value} outside expected range {expected}")


class CacheCorrupt(RewriteMtError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"corrupt cache entry for key {key}")


class EmptyGeneration(RewriteMtError):
    def __init__(self, segment_id: str, method: str):
        self.segment_id = segment_id
        self.method = method
        super().__init__(f"empty generation for segment {segment_id!r}, method {method!r}")


class EmptyInput(RewriteMtError):
    def __init__(self, what: str = "input"):
        super().__init__(f"empty {what}")


class MissingScore(RewriteMtError):
    def __init__(self, segment_id: str, method: str | None = None):
        self.segment_id = segment_id
        self.method = method
        detail = f"segment {segment_id!r}" + (f", method {method!r}" if method else "")
        super().__init__(f"missing score for {detail}")


class MissingField(RewriteMtError):
    def __init__(self, template: str, field: str):
        self.template = template
        self.field = field
        super().__init__(f"template {template!r} requires field {field!r}")


class CoverageMismatch(RewriteMtError):
    def __init__(self, method: str, missing_ids):
        self.method = method
        self.missing_ids = list(missing_ids)
        shown = ", ".join(self.missing_ids[:5])
        super().__init__(f"method {method!r} missing scores for segments: {shown}"
                         + ("..." if len(self.missing_ids) > 5 else ""))


class PairingMismatch(RewriteMtError):
    pass


class DegenerateInput(RewriteMtError):
    pass


class EmptyText(RewriteMtError):
    pass


class DuplicateJudgment(RewriteMtError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"duplicate judgment: {key}")


class UnevenRaters(RewriteMtError):
    def __init__(self, item_id: str):
        self.item_id = item_id
        super().__init__(f"item {item_id!r} has a different number of raters")


class DegenerateChance(RewriteMtError):
    pass


class OutOfRange(RewriteMtError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"rating {value} outside 1..4")


class MissingDependency(RewriteMtError):
    def __init__(self, stage: str, needs: str):
        self.stage = stage
        self.needs = needs
        super().__init__(f"stage {stage!r} requires outputs of {needs!r}; run that stage first")


class ConfigError(RewriteMtError):
    pass
