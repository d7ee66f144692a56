class Malformed(ValueError):
    """Binary input that cannot be decoded."""


class Oversize(ValueError):
    """Message does not fit its uplink slot budget."""


class NotMyTurn(RuntimeError):
    """A node tried to transmit in an uplink slot it does not own."""


class Unreachable(ValueError):
    def __init__(self, src, dst):
        super().__init__(f"no path from {src} to {dst}")
        self.src = src
        self.dst = dst


class InvalidScenario(ValueError):
    pass


class NotFormed(RuntimeError):
    pass


class NotConverged(RuntimeError):
    pass
