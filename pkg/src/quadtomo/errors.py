"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the command line
front end reports verbatim.
"""


class QuadTomoError(Exception):
    code = "QuadTomoError"


class ValidationError(QuadTomoError):
    code = "ValidationError"


class NotHermitian(ValidationError):
    code = "NotHermitian"


class AnomalousSymmetryViolated(ValidationError):
    code = "AnomalousSymmetryViolated"


class BosonicMNotPositiveDefinite(ValidationError):
    code = "BosonicMNotPositiveDefinite"


class DegenerateSpectrum(QuadTomoError):
    code = "DegenerateSpectrum"


class ZeroMode(QuadTomoError):
    code = "ZeroMode"


class MismatchedRecords(QuadTomoError):
    code = "MismatchedRecords"


class RankDeficient(QuadTomoError):
    code = "RankDeficient"


class CollinearProbes(QuadTomoError):
    code = "CollinearProbes"


class InconsistentSurface(QuadTomoError):
    code = "InconsistentSurface"


class EqualCouplingBond(QuadTomoError):
    code = "EqualCouplingBond"

    def __init__(self, bond, msg=None):
        self.bond = bond
        super().__init__(msg or f"bond ({bond}, {bond + 1}) has |A| == |B|")


class DistinctCouplingBond(QuadTomoError):
    code = "DistinctCouplingBond"

    def __init__(self, bond, msg=None):
        self.bond = bond
        super().__init__(msg or f"bond ({bond}, {bond + 1}) has |A| != |B|")


class UnidentifiableRegimeSwitch(QuadTomoError):
    """An equal-coupling bond is followed by a distinct-coupling bond.

    Data at the chain end does not determine such chains locally.
    """

    code = "UnidentifiableRegimeSwitch"


class BrokenChain(QuadTomoError):
    code = "BrokenChain"

    def __init__(self, bond, msg=None):
        self.bond = bond
        super().__init__(msg or f"couplings on bond ({bond}, {bond + 1}) vanish")


class NoTransverseField(QuadTomoError):
    code = "NoTransverseField"

    def __init__(self, site, msg=None):
        self.site = site
        super().__init__(msg or f"A_nn == B_nn at site {site}; excitations do not propagate")


class NotInfecting(QuadTomoError):
    code = "NotInfecting"


class EqualCouplingEdge(QuadTomoError):
    code = "EqualCouplingEdge"


class ZeroAnchorEntry(QuadTomoError):
    code = "ZeroAnchorEntry"

    def __init__(self, k, msg=None):
        self.k = k
        super().__init__(msg or f"anchor entry <1|E_{k}> vanishes")


class SizeLimit(QuadTomoError):
    code = "SizeLimit"


class DimensionMismatch(QuadTomoError):
    code = "DimensionMismatch"


class ParseError(QuadTomoError):
    code = "ParseError"
