"""Shared exception types."""


class MetricsetError(Exception):
    pass


class ParseError(MetricsetError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnboundVariable(MetricsetError):
    pass


class CaptureError(MetricsetError):
    pass


class EmptyStructure(MetricsetError):
    pass


class IllTyped(MetricsetError):
    pass


class UnsupportedFormula(MetricsetError):
    pass


class DegenerateFormula(MetricsetError):
    pass


class CapExceeded(MetricsetError):
    def __init__(self, predicted: int, cap: int):
        # predicted can be astronomically large; avoid huge decimal strings
        shown = (str(predicted) if predicted.bit_length() <= 64
                 else f"about 2^{predicted.bit_length() - 1}")
        super().__init__(f"predicted universe size {shown} exceeds cap {cap}")
        self.predicted = predicted
        self.cap = cap


class NoWitness(MetricsetError):
    def __init__(self, message: str, best_index: int | None = None, best_residual=None):
        super().__init__(message)
        self.best_index = best_index
        self.best_residual = best_residual


class InsufficientDepth(MetricsetError):
    pass


class InvalidGauge(MetricsetError):
    pass
