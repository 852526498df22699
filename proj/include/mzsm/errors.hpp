#pragma once

#include <stdexcept>
#include <string>

namespace mzsm {

// Base for every failure raised by the library. Callers that only care
// about "something went wrong" catch this; the CLI maps subclasses onto
// exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
public:
    using Error::Error;
};

class EmptyRegion : public Error {
public:
    using Error::Error;
};

class DegenerateNode : public Error {
public:
    using Error::Error;
};

class ProbabilityOutOfRange : public Error {
public:
    using Error::Error;
};

class AllMassLost : public Error {
public:
    using Error::Error;
};

class OracleCapExceeded : public Error {
public:
    using Error::Error;
};

class UnreachableConfidence : public Error {
public:
    using Error::Error;
};

class SingularFit : public Error {
public:
    using Error::Error;
};

class BothEmpty : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mzsm
