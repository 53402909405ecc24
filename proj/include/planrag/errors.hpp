#pragma once

#include <stdexcept>
#include <string>

namespace planrag {

/// Base class for every error raised by the engine. Callers that do not care
/// about the exact failure class can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- segment grammar ----

class ParseError : public Error {
public:
    enum class Kind { UnbalancedMarker, OrderViolation, UnknownMarker };

    ParseError(Kind kind, const std::string& message)
        : Error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

// ---- numeric core ----

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfVocab : public Error {
public:
    using Error::Error;
};

// ---- retrieval ----

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

class DuplicateDocId : public Error {
public:
    using Error::Error;
};

/// Remote backend (LM, reranker, annotation) could not be reached or returned
/// an unusable response; the message carries the cause.
class BackendUnavailable : public Error {
public:
    using Error::Error;
};

// ---- orchestrator / mock backend ----

class ScriptExhausted : public Error {
public:
    using Error::Error;
};

class ModeMismatch : public Error {
public:
    using Error::Error;
};

class MalformedGeneration : public Error {
public:
    using Error::Error;
};

// ---- dataset builder ----

class AnnotationFailure : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

// ---- evaluation / CLI ----

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class NotSupported : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace planrag
