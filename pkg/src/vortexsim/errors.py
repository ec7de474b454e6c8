"""Exception types shared across the simulator."""


class VortexSimError(ValueError):
    pass


class DomainError(VortexSimError):
    """Argument outside the supported numerical range."""


class SingularityError(VortexSimError):
    """Field evaluated at a source point (r = 0) or on a vortex axis."""


class SamplingError(VortexSimError):
    """Ring has too few elements to represent the requested mode."""


class DegenerateSumError(VortexSimError):
    """Multi-mode vector sum vanishes, so the unit phase is undefined."""

    def __init__(self, units, message=None):
        self.units = [tuple(int(i) for i in u) for u in units]
        if message is None:
            shown = ", ".join(f"(m={m}, n={n})" for m, n in self.units[:10])
            more = "" if len(self.units) <= 10 else f" and {len(self.units) - 10} more"
            message = f"degenerate vector sum at {len(self.units)} unit(s): {shown}{more}"
        super().__init__(message)


class ShapeMismatchError(VortexSimError):
    pass


class ConfigError(VortexSimError):
    """Invalid or unparsable scenario configuration.

    ``field`` is the dotted path of the offending entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
