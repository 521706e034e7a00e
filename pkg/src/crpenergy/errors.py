"""Exception hierarchy shared by all modules."""


class CRPError(Exception):
    """Base class for library errors."""


class IllegalMove(CRPError):
    """A requested crane move violates the stacking constraints."""


class RelocationToFullStack(IllegalMove):
    pass


class EmptyOriginStack(IllegalMove):
    pass


class SameStack(IllegalMove):
    pass


class TargetBlocked(IllegalMove):
    pass


class IllegalDestination(IllegalMove):
    pass


class Deadlock(CRPError):
    """No legal destination exists for a blocker, or the move budget ran out."""


class InfeasibleGenomeEvaluation(CRPError):
    def __init__(self, instance_id, message="deadlock"):
        super().__init__(f"instance {instance_id}: {message}")
        self.instance_id = instance_id


class BudgetTooSmall(CRPError):
    pass


class DatasetUnavailable(CRPError):
    pass


class InstanceFormatError(CRPError):
    pass


class MalformedHeader(InstanceFormatError):
    pass


class StackOverfilled(InstanceFormatError):
    pass


class DuplicateContainerId(InstanceFormatError):
    pass


class MissingMaxHeight(InstanceFormatError):
    pass


class WeightsAlreadyPresent(CRPError):
    pass


class EmptySample(CRPError):
    pass


class DegenerateGroups(CRPError):
    pass


class MissingArtifacts(CRPError):
    pass
