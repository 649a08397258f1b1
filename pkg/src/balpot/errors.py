class BalpotError(Exception):
    pass


class SupportOutsideGrid(BalpotError):
    pass


class RadiusTooSmall(BalpotError):
    pass


class MassNotNegative(BalpotError):
    pass


class NotConverged(BalpotError):
    def __init__(self, iterations, message=None):
        self.iterations = iterations
        super().__init__(message or f"no convergence after {iterations} iterations")


class NegativeDensity(BalpotError):
    pass


class QInfinite(BalpotError):
    pass


class EmptySupport(BalpotError):
    pass


class WrongCase(BalpotError):
    pass
