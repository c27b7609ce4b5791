#ifndef LPKIT_ERRORS_HPP
#define LPKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lpkit {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Two objects built on different GridSpecs were combined.
class IncompatibleGrids : public Error {
  public:
    using Error::Error;
};

/// A dyadic cube or scale window is not representable on the grid.
class CubeResolutionError : public Error {
  public:
    using Error::Error;
};

class InvalidWeight : public Error {
  public:
    using Error::Error;
};

/// Zero denominator or an otherwise meaningless ratio was requested.
class DegenerateInput : public Error {
  public:
    using Error::Error;
};

/// A parameter left the domain a lemma requires (e.g. K = alpha2).
class ParameterDomainViolation : public Error {
  public:
    using Error::Error;
};

/// Coefficient fields or weight sequences with mismatched scale windows.
class IncompatibleWindows : public Error {
  public:
    using Error::Error;
};

class AtomConstructionFailure : public Error {
  public:
    using Error::Error;
};

class DecompositionFailure : public Error {
  public:
    using Error::Error;
};

class FormatError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace lpkit

#endif
