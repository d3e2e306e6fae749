"""Exception types shared across the package."""


class TwistedBadError(Exception):
    pass


class MixedFieldError(TwistedBadError, ValueError):
    """Raised when two quadratic irrationals from different fields meet."""


class DimensionError(TwistedBadError, ValueError):
    pass


class Undecidable(TwistedBadError):
    """A comparison could not be certified at the maximal precision."""


class DegenerateRank(TwistedBadError):
    def __init__(self, witness):
        super().__init__(f"matrix is rank deficient, witness u={list(witness)}")
        self.witness = witness


class BoxTooLarge(TwistedBadError):
    def __init__(self, estimate, limit):
        super().__init__(f"box holds ~{estimate} lattice candidates (limit {limit})")
        self.estimate = estimate
        self.limit = limit


class NoPoint(TwistedBadError):
    """The Minkowski box had no admissible point; inputs or arithmetic are wrong."""


class AuditFailure(TwistedBadError):
    def __init__(self, inequality, r, detail=""):
        msg = f"audit failed: {inequality} at r={r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.inequality = inequality
        self.r = r


class IllegalMove(TwistedBadError):
    def __init__(self, player, round_no, reason=""):
        super().__init__(f"illegal move by {player} in round {round_no}: {reason}")
        self.player = player
        self.round_no = round_no
