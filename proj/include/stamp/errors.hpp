#pragma once

#include <stdexcept>
#include <string>

namespace stamp {

class StampError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnknownLabel : public StampError { public: using StampError::StampError; };
class InvalidZone : public StampError { public: using StampError::StampError; };
class InvalidConfig : public StampError { public: using StampError::StampError; };
class SingularCorrelation : public StampError { public: using StampError::StampError; };
class DomainError : public StampError { public: using StampError::StampError; };
class OverflowGuard : public StampError { public: using StampError::StampError; };
class NonConvergence : public StampError { public: using StampError::StampError; };
class FactorizationFailure : public StampError { public: using StampError::StampError; };
class OptimizerFailure : public StampError { public: using StampError::StampError; };
class MissingSamples : public StampError { public: using StampError::StampError; };
class MismatchedIds : public StampError { public: using StampError::StampError; };
class ComponentMissing : public StampError { public: using StampError::StampError; };
class EmptyData : public StampError { public: using StampError::StampError; };
class EffectiveSampleSizeTooLow : public StampError { public: using StampError::StampError; };
class NotConverged : public StampError { public: using StampError::StampError; };
class ParseError : public StampError { public: using StampError::StampError; };

} // namespace stamp
