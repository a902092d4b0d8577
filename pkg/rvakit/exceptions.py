"rvakit-specific Exception classes"


class ValidationError(ValueError):
    "Raised whenever an input violates a documented precondition."

class ShapeError(ValidationError):
    "Raised if an op receives inputs whose shapes it cannot combine"
    def __init__(self, op, *shapes):
        self.op, self.shapes = op, shapes
        super().__init__("%s: incompatible shapes %s"
                         % (op, " and ".join(str(tuple(s)) for s in shapes)))

class GraphError(ValidationError):
    "Raised if a differentiation graph is used out of protocol"

class ConfigError(ValidationError):
    "Raised if a configuration is unknown, malformed, or infeasible"

class DatasetError(ValidationError):
    "Raised if a dataset file does not parse; carries the record index"
    def __init__(self, msg, record=None):
        self.record = record
        if record is not None:
            msg = "record %i: %s" % (record, msg)
        super().__init__(msg)

class CheckpointError(ValidationError):
    "Raised if a checkpoint file is corrupt or does not fit the model"

class EmbeddingFormatError(ValidationError):
    "Raised if an embedding file has a malformed line"
    def __init__(self, lineno, msg):
        self.lineno = lineno
        super().__init__("line %i: %s" % (lineno, msg))

class RecursionCacheMiss(ValidationError):
    "Raised if a round backtracks to a round that was never processed"


class NumericalError(ArithmeticError):
    "Raised whenever a computation leaves the finite reals."

class NonFiniteError(NumericalError):
    "Raised if an op produces NaN or Inf"
    def __init__(self, op):
        self.op = op
        super().__init__("%s produced a non-finite value" % op)

class DivergedTraining(NumericalError):
    "Raised if the training loss becomes non-finite"
    def __init__(self, epoch, step):
        self.epoch, self.step = epoch, step
        super().__init__("non-finite loss at epoch %i, step %i"
                         % (epoch, step))

class GradientCheckFailure(NumericalError):
    "Raised if analytic and numeric gradients disagree"
